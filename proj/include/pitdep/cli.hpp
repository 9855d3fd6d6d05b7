#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "pitdep/combine.hpp"
#include "pitdep/experiment.hpp"
#include "pitdep/influence.hpp"
#include "pitdep/pointwise.hpp"

namespace pitdep::cli {

std::string_view version();

enum class Command { Test, Plot, Simulate };
enum class InputFormat { Auto, Text, Csv, Json };
enum class OutputFormat { Json, Csv };

struct RunConfig {
  Command command = Command::Test;
  std::string input_path;
  InputFormat input_format = InputFormat::Auto;
  // CSV column: header name or 0-based index. Empty means the first column.
  std::string column;
  // Number of posterior draws behind rank-based PITs; 0 means continuous.
  std::int64_t ranks = 0;
  std::vector<Method> methods{Method::PietC};
  Combiner combiner = Combiner::TCCT;
  double alpha = 0.05;
  // nullopt selects the automatic threshold.
  std::optional<double> gamma;
  std::string reference = "exp:1";
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  unsigned jobs = 1;
  OutputFormat format = OutputFormat::Json;
  // SimSpec file for the simulate command.
  std::string config_path;
};

// Name of the environment variable holding the default output directory.
inline constexpr const char* kOutDirEnv = "PITDEP_OUT_DIR";

// Output directory: --out, else $PITDEP_OUT_DIR, else the working directory.
std::filesystem::path resolve_out_dir(const RunConfig& config);

// Throws ConfigError on invalid flags or missing input files.
void validate(const RunConfig& config);

// Parses argv into a RunConfig. Returns nullopt when help or the version was
// printed.
std::optional<RunConfig> parse_args(int argc, const char* const* argv, std::ostream& out);

Method parse_method(const std::string& name);
Combiner parse_combiner(const std::string& name);
Reference parse_reference(const std::string& text);

// Resolved configuration as recorded in reports. The worker count is left out
// so outputs do not depend on it.
nlohmann::json to_json(const RunConfig& config);

// --- input ---

// Reads PIT values. Parse errors name the offending line.
PitSample read_pit_file(const std::filesystem::path& path, InputFormat format,
                        const std::string& column = {}, std::int64_t ranks = 0);
PitSample parse_pit_text(const std::string& text, InputFormat format,
                         const std::string& column = {}, std::int64_t ranks = 0);
InputFormat detect_format(const std::filesystem::path& path);

// --- SimSpec ---

// Flat "key = value" document; '#' starts a comment. Unknown keys, repeated
// keys and malformed values are ConfigErrors.
ExperimentConfig parse_simspec(const std::string& text);
ExperimentConfig read_simspec(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& config);

// --- pipeline ---

struct MethodRun {
  TestReport report;
  // Set for POT-C, PRIT-C and PIET-C.
  std::optional<PointwiseResult> pointwise;
};

MethodRun run_test(const PitSample& sample, Method method, Combiner combiner, double alpha,
                   const Reference& reference);

nlohmann::json to_json(const TestReport& report);
nlohmann::json to_json(const std::vector<EcdfPoint>& points);
std::vector<EcdfPoint> ecdf_points_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SimOutcome& outcome);

// Markers for the tests in IR(gamma): one (x, ECDF(x)) point per influential
// test index.
struct Marker {
  std::size_t test_index = 0;
  double x = 0.0;
  double tilted = 0.0;
};
std::vector<Marker> influence_markers(const PitSample& sample, const PointwiseResult& pointwise,
                                      const std::set<std::size_t>& influential);

std::string render_svg(const std::vector<EcdfPoint>& points, const std::vector<Marker>& markers,
                       const std::string& title);

// --- commands ---
// Each returns the process exit code: 0 success, 2 rejection (test only), 1 error.
// Errors are reported on `err`; summaries go to `out`.

int cmd_test(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_plot(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_simulate(const RunConfig& config, std::ostream& out, std::ostream& err);

int run(const RunConfig& config, std::ostream& out, std::ostream& err);

// Whole program: argument parsing, dispatch and error handling.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pitdep::cli
