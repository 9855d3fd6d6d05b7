#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>

#include <fmt/format.h>

#include "pitdep/baselines.hpp"
#include "pitdep/cli.hpp"
#include "pitdep/error.hpp"
#include "pitdep/pitos.hpp"

namespace pitdep::cli {
namespace {

using nlohmann::json;

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Config, "cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw Error(ErrorCode::Config, "write to '" + path.string() + "' failed");
}

std::filesystem::path prepare_out_dir(const RunConfig& config) {
  const auto dir = resolve_out_dir(config);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Config, "cannot create '" + dir.string() + "': " + ec.message());
  return dir;
}

json envelope(const RunConfig& config) {
  json j;
  j["version"] = version();
  j["config"] = to_json(config);
  return j;
}

json sample_json(const RunConfig& config, const PitSample& sample) {
  json j;
  j["path"] = config.input_path;
  j["n"] = sample.size();
  j["kind"] = sample.kind == PitKind::Continuous ? "continuous" : "rank_based";
  if (sample.kind == PitKind::RankBased) j["draws"] = sample.draws;
  return j;
}

json pointwise_json(const PointwiseResult& r) {
  json j;
  j["p_values"] = r.p_values;
  j["tested_quantity"] = r.tested_quantity;
  if (r.method == Method::PritC) j["partition"] = r.partition;
  return j;
}

PitSample load_input(const RunConfig& config) {
  return read_pit_file(config.input_path, config.input_format, config.column, config.ranks);
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string join(const std::vector<std::string>& items, const char* sep) {
  std::string out;
  for (std::size_t k = 0; k < items.size(); ++k) {
    if (k > 0) out += sep;
    out += items[k];
  }
  return out;
}

template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return 1;
}

bool is_pointwise(Method m) {
  return m == Method::PotC || m == Method::PritC || m == Method::PietC;
}

}  // namespace

MethodRun run_test(const PitSample& sample, Method method, Combiner combiner, double alpha,
                   const Reference& reference) {
  MethodRun run;
  switch (method) {
    case Method::PotC: run.pointwise = potc_pointwise(sample); break;
    case Method::PritC:
      run.pointwise = pritc_pointwise(sample, sample.kind == PitKind::RankBased
                                                  ? std::vector<double>{}
                                                  : even_partition(sample.size()));
      break;
    case Method::PietC: run.pointwise = pietc_pointwise(sample, reference); break;
    case Method::KS: run.report = ks_test(sample, alpha); return run;
    case Method::AD: run.report = ad_test(sample, alpha); return run;
    case Method::PITOS: run.report = pitos_test(sample, 0, alpha); return run;
  }
  run.report = combine_pointwise(*run.pointwise, combiner, alpha);
  return run;
}

json to_json(const TestReport& r) {
  json j;
  j["method"] = to_string(r.method);
  j["combiner"] = to_string(r.combiner);
  j["statistic"] = r.statistic;
  j["global_p"] = r.global_p;
  j["alpha"] = r.alpha;
  j["reject"] = r.reject;
  j["n"] = r.n;
  if (r.method == Method::PITOS) {
    j["raw_p"] = r.raw_p;
    j["pairs_used"] = r.pairs_used;
    j["pairs_dropped"] = r.pairs_dropped;
  }
  j["notes"] = r.notes;
  return j;
}

json to_json(const std::vector<EcdfPoint>& points) {
  json j = json::array();
  for (const auto& p : points) {
    j.push_back({{"x", p.x}, {"ecdf", p.ecdf}, {"tilted", p.tilted}, {"highlighted", p.highlighted}});
  }
  return j;
}

std::vector<EcdfPoint> ecdf_points_from_json(const json& j) {
  if (!j.is_array()) throw Error(ErrorCode::Parse, "plot data must be a JSON array");
  std::vector<EcdfPoint> points;
  for (const auto& item : j) {
    EcdfPoint p;
    p.x = item.at("x").get<double>();
    p.ecdf = item.at("ecdf").get<double>();
    p.tilted = item.at("tilted").get<double>();
    p.highlighted = item.at("highlighted").get<bool>();
    points.push_back(p);
  }
  return points;
}

json to_json(const SimOutcome& o) {
  json j;
  j["methods"] = o.labels;
  j["alphas"] = o.alphas;
  j["replicates"] = o.replicates;
  j["n"] = o.n;
  json rates = json::array();
  for (std::size_t k = 0; k < o.labels.size(); ++k) {
    for (std::size_t a = 0; a < o.alphas.size(); ++a) {
      const double rate = o.rejection_rate[k][a];
      rates.push_back({{"method", o.labels[k]},
                       {"alpha", o.alphas[a]},
                       {"rejections", static_cast<std::size_t>(
                                          std::llround(rate * static_cast<double>(o.replicates)))},
                       {"rate", rate},
                       {"se", std::sqrt(rate * (1.0 - rate) / static_cast<double>(o.replicates))}});
    }
  }
  j["rejection_rates"] = rates;
  json p_values = json::object();
  for (std::size_t k = 0; k < o.labels.size(); ++k) p_values[o.labels[k]] = o.p_values[k];
  j["p_values"] = p_values;
  j["mean_pairwise_correlation"] = o.mean_pairwise_correlation;
  j["clamped_pits"] = o.clamped_pits;
  json failures = json::array();
  for (const auto& f : o.failures) {
    failures.push_back({{"replicate", f.replicate}, {"method", f.method}, {"message", f.message}});
  }
  j["failures"] = failures;
  if (!o.pits.empty()) j["pits"] = o.pits;
  return j;
}

int cmd_test(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    validate(config);
    const Reference reference = parse_reference(config.reference);
    const PitSample sample = load_input(config);
    const auto dir = prepare_out_dir(config);

    std::vector<MethodRun> runs;
    for (Method m : config.methods) {
      runs.push_back(run_test(sample, m, config.combiner, config.alpha, reference));
    }
    bool any_reject = false;
    if (config.format == OutputFormat::Json) {
      for (const auto& run : runs) {
        json j = envelope(config);
        j["input"] = sample_json(config, sample);
        j["report"] = to_json(run.report);
        if (run.pointwise) j["pointwise"] = pointwise_json(*run.pointwise);
        write_file(dir / fmt::format("report_{}.json", to_string(run.report.method)),
                   j.dump(2) + "\n");
      }
    } else {
      std::string csv = fmt::format("# pitdep {} config={}\n", version(), to_json(config).dump());
      csv += "method,combiner,n,statistic,global_p,alpha,reject,notes\n";
      for (const auto& run : runs) {
        const auto& r = run.report;
        csv += fmt::format("{},{},{},{:.17g},{:.17g},{:.17g},{},{}\n", to_string(r.method),
                           to_string(r.combiner), r.n, r.statistic, r.global_p, r.alpha,
                           r.reject ? "true" : "false", csv_escape(join(r.notes, "; ")));
      }
      write_file(dir / "reports.csv", csv);
    }
    for (const auto& run : runs) {
      const auto& r = run.report;
      any_reject = any_reject || r.reject;
      std::string label(to_string(r.method));
      if (r.combiner != Combiner::None && r.method != Method::PITOS) {
        label += fmt::format("+{}", to_string(r.combiner));
      }
      out << fmt::format("{:<14} p* = {:<12.6g} {}\n", label, r.global_p,
                         r.reject ? "reject" : "no rejection");
      for (const auto& note : r.notes) out << "  warning: " << note << '\n';
    }
    return any_reject ? 2 : 0;
  });
}

int cmd_plot(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    validate(config);
    const auto method = std::find_if(config.methods.begin(), config.methods.end(), is_pointwise);
    if (method == config.methods.end()) {
      throw Error(ErrorCode::Config, "plot needs one of potc, pritc or pietc");
    }
    const Reference reference = parse_reference(config.reference);
    const PitSample sample = load_input(config);
    const auto dir = prepare_out_dir(config);

    const MethodRun run = run_test(sample, *method, config.combiner, config.alpha, reference);
    const InfluenceReport influence =
        analyze_influence(sample, *run.pointwise, config.combiner, config.alpha, config.gamma);
    const auto markers = influence_markers(sample, *run.pointwise, influence.influential);

    const std::string name(to_string(*method));
    write_file(dir / fmt::format("ecdf_{}.json", name), to_json(influence.ecdf_points).dump(2) + "\n");
    const std::string title = fmt::format("Tilted ECDF, {}+{}, p* = {:.4g}, gamma = {:.4g}", name,
                                          to_string(config.combiner), run.report.global_p,
                                          influence.gamma);
    write_file(dir / fmt::format("ecdf_{}.svg", name),
               render_svg(influence.ecdf_points, markers, title));

    json j = envelope(config);
    j["input"] = sample_json(config, sample);
    j["report"] = to_json(run.report);
    j["pointwise"] = pointwise_json(*run.pointwise);
    j["phi"] = influence.phi;
    j["gamma"] = influence.gamma;
    j["influential"] = influence.influential;
    j["harmonic_n"] = influence.harmonic_n;
    j["grand_value"] = influence.grand_value;
    write_file(dir / fmt::format("influence_{}.json", name), j.dump(2) + "\n");

    out << fmt::format("{}+{}: p* = {:.6g}, gamma = {:.6g}, {} influential test(s)\n", name,
                       to_string(config.combiner), run.report.global_p, influence.gamma,
                       influence.influential.size());
    return 0;
  });
}

int cmd_simulate(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    validate(config);
    ExperimentConfig experiment = read_simspec(config.config_path);
    if (config.seed) {
      std::visit([&](auto& spec) { spec.seed = *config.seed; }, experiment.model);
    }
    experiment.parallelism = config.jobs;
    validate(experiment);
    const auto dir = prepare_out_dir(config);

    const SimOutcome outcome = run_experiment(experiment);

    json j = envelope(config);
    j["simspec"] = to_json(experiment);
    j["outcome"] = to_json(outcome);
    write_file(dir / "sim_outcome.json", j.dump(2) + "\n");

    std::string csv = fmt::format("# pitdep {} simspec={}\n", version(), to_json(experiment).dump());
    csv += "method,alpha,rejections,replicates,rate,se\n";
    std::string table = fmt::format("{:<16} {:>7} {:>9} {:>9}\n", "method", "alpha", "rate", "se");
    const double S = static_cast<double>(outcome.replicates);
    for (std::size_t k = 0; k < outcome.labels.size(); ++k) {
      for (std::size_t a = 0; a < outcome.alphas.size(); ++a) {
        const double rate = outcome.rejection_rate[k][a];
        const double se = std::sqrt(rate * (1.0 - rate) / S);
        csv += fmt::format("{},{:.17g},{},{},{:.17g},{:.17g}\n", outcome.labels[k],
                           outcome.alphas[a], std::llround(rate * S), outcome.replicates, rate, se);
        table += fmt::format("{:<16} {:>7.3g} {:>9.4f} {:>9.4f}\n", outcome.labels[k],
                             outcome.alphas[a], rate, se);
      }
    }
    write_file(dir / "rejection_rates.csv", csv);
    out << fmt::format("S = {}, n = {}, mean pairwise PIT correlation = {:.4f}\n",
                       outcome.replicates, outcome.n, outcome.mean_pairwise_correlation);
    out << table;
    if (!outcome.failures.empty()) {
      out << fmt::format("{} replicate failure(s) within budget\n", outcome.failures.size());
    }
    return 0;
  });
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  switch (config.command) {
    case Command::Test: return cmd_test(config, out, err);
    case Command::Plot: return cmd_plot(config, out, err);
    case Command::Simulate: return cmd_simulate(config, out, err);
  }
  return 1;
}

}  // namespace pitdep::cli
