#include <charconv>
#include <ostream>

#include "CLI11.hpp"
#include "pitdep/cli.hpp"
#include "pitdep/error.hpp"

namespace pitdep::cli {
namespace {

std::optional<double> parse_gamma(const std::string& text) {
  if (text == "auto") return std::nullopt;
  double x = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, x);
  if (ec != std::errc{} || ptr != end) {
    throw Error(ErrorCode::Config, "gamma must be 'auto' or a number, got '" + text + "'");
  }
  return x;
}

InputFormat parse_input_format(const std::string& text) {
  if (text == "auto") return InputFormat::Auto;
  if (text == "text") return InputFormat::Text;
  if (text == "csv") return InputFormat::Csv;
  if (text == "json") return InputFormat::Json;
  throw Error(ErrorCode::Config, "input format must be auto, text, csv or json");
}

}  // namespace

std::optional<RunConfig> parse_args(int argc, const char* const* argv, std::ostream& out) {
  CLI::App app{"Calibration tests for dependent PIT values", "pitdep"};
  app.set_version_flag("--version", std::string(version()));
  app.require_subcommand(1);

  struct Raw {
    std::string input, input_format = "auto", column, combiner = "tcct", gamma = "auto",
                       reference = "exp:1", out, format = "json", config;
    std::vector<std::string> methods;
    double alpha = 0.05;
    std::int64_t ranks = 0;
    std::optional<std::uint64_t> seed;
    unsigned jobs = 1;
  } raw;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", raw.seed, "Master seed");
    sub->add_option("--jobs", raw.jobs, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out", raw.out,
                    std::string("Output directory (default: $") + kOutDirEnv + " or .)");
  };
  auto add_test_options = [&](CLI::App* sub) {
    sub->add_option("input", raw.input, "PIT file")->required();
    sub->add_option("--method", raw.methods, "potc, pritc, pietc, ks, ad or pitos (repeatable)")
        ->delimiter(',');
    sub->add_option("--combiner", raw.combiner, "cct, tcct or tippett");
    sub->add_option("--alpha", raw.alpha, "Significance level");
    sub->add_option("--gamma", raw.gamma, "Influence threshold: auto or a number");
    sub->add_option("--reference", raw.reference, "PIET-C reference: exp:<rate> or normal");
    sub->add_option("--format", raw.format, "Report format: json or csv");
    sub->add_option("--input-format", raw.input_format, "auto, text, csv or json");
    sub->add_option("--column", raw.column, "CSV column name or 0-based index");
    sub->add_option("--ranks", raw.ranks, "Rank-based input from S posterior draws");
    add_common(sub);
  };

  CLI::App* test = app.add_subcommand("test", "Run calibration tests on a PIT file");
  add_test_options(test);
  CLI::App* plot = app.add_subcommand("plot", "Influence analysis and tilted ECDF plot");
  add_test_options(plot);
  CLI::App* simulate = app.add_subcommand("simulate", "Run a simulation experiment");
  simulate->add_option("--config", raw.config, "SimSpec file")->required();
  add_common(simulate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return std::nullopt;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return std::nullopt;
  } catch (const CLI::CallForVersion&) {
    out << version() << '\n';
    return std::nullopt;
  } catch (const CLI::ParseError& e) {
    throw Error(ErrorCode::Config, e.what());
  }

  RunConfig config;
  if (app.got_subcommand(simulate)) {
    config.command = Command::Simulate;
    config.config_path = raw.config;
  } else {
    config.command = app.got_subcommand(plot) ? Command::Plot : Command::Test;
    config.input_path = raw.input;
    config.input_format = parse_input_format(raw.input_format);
    config.column = raw.column;
    config.ranks = raw.ranks;
    if (!raw.methods.empty()) {
      config.methods.clear();
      for (const auto& m : raw.methods) config.methods.push_back(parse_method(m));
    }
    config.combiner = parse_combiner(raw.combiner);
    config.alpha = raw.alpha;
    config.gamma = parse_gamma(raw.gamma);
    config.reference = raw.reference;
    if (raw.format == "json") config.format = OutputFormat::Json;
    else if (raw.format == "csv") config.format = OutputFormat::Csv;
    else throw Error(ErrorCode::Config, "format must be json or csv");
  }
  config.out_dir = raw.out;
  config.seed = raw.seed;
  config.jobs = raw.jobs;
  return config;
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  try {
    const auto config = parse_args(argc, argv, out);
    if (!config) return 0;
    return run(*config, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return 1;
}

}  // namespace pitdep::cli
