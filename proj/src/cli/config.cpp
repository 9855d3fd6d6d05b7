#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "pitdep/cli.hpp"
#include "pitdep/error.hpp"

namespace pitdep::cli {
namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& detail) {
  throw Error(ErrorCode::Config, detail);
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) parts.push_back(trim(item));
  return parts;
}

double to_double(const std::string& key, const std::string& value) {
  double x = 0.0;
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, x);
  if (ec != std::errc{} || ptr != end || std::isnan(x)) {
    config_error("key '" + key + "': '" + value + "' is not a number");
  }
  return x;
}

template <typename Int>
Int to_int(const std::string& key, const std::string& value) {
  Int x{};
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, x);
  if (ec != std::errc{} || ptr != end) {
    config_error("key '" + key + "': '" + value + "' is not a valid integer");
  }
  return x;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  config_error("key '" + key + "': '" + value + "' is not a boolean");
}

// Keys consumed per model and per DGP.
const std::set<std::string> kExperimentKeys{"model",   "pit",          "methods",
                                             "replicates", "alphas",    "reference",
                                             "pitos_budget", "error_budget", "keep_pits",
                                             "seed"};
const std::set<std::string> kHierKeys{"G", "m", "sigma", "tau", "mu0", "dgp", "fit"};
const std::set<std::string> kCopulaKeys{"n", "p", "loading_scale", "structure"};
const std::map<std::string, std::set<std::string>> kDgpKeys{
    {"normal", {}},          {"student_t", {"nu"}},       {"lognormal", {"sigma_log"}},
    {"gennormal", {"gn_alpha", "gn_beta"}}, {"betabinomial", {"N", "phi"}},
    {"negbinomial", {"phi"}}};

std::string dgp_name(const Dgp& dgp) {
  switch (dgp.index()) {
    case 0: return "normal";
    case 1: return "student_t";
    case 2: return "lognormal";
    case 3: return "gennormal";
    case 4: return "betabinomial";
    default: return "negbinomial";
  }
}

json number_or_string(double x) {
  if (std::isfinite(x)) return x;
  return x > 0 ? "inf" : "-inf";
}

std::string reference_string(const Reference& reference) {
  if (const auto* e = std::get_if<ExpReference>(&reference)) {
    std::ostringstream s;
    s.precision(17);
    s << "exp:" << e->rate;
    return s.str();
  }
  if (std::holds_alternative<NormalReference>(reference)) return "normal";
  return "custom";
}

std::string_view to_string(InputFormat f) {
  switch (f) {
    case InputFormat::Auto: return "auto";
    case InputFormat::Text: return "text";
    case InputFormat::Csv: return "csv";
    case InputFormat::Json: return "json";
  }
  return "auto";
}

std::string_view to_string(Command c) {
  switch (c) {
    case Command::Test: return "test";
    case Command::Plot: return "plot";
    case Command::Simulate: return "simulate";
  }
  return "test";
}

}  // namespace

std::string_view version() {
#ifdef PITDEP_VERSION
  return PITDEP_VERSION;
#else
  return "unknown";
#endif
}

std::filesystem::path resolve_out_dir(const RunConfig& config) {
  if (!config.out_dir.empty()) return config.out_dir;
  if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') return env;
  return ".";
}

Method parse_method(const std::string& name) {
  for (Method m : {Method::PotC, Method::PritC, Method::PietC, Method::KS, Method::AD,
                   Method::PITOS}) {
    if (name == to_string(m)) return m;
  }
  config_error("unknown method '" + name + "'");
}

Combiner parse_combiner(const std::string& name) {
  for (Combiner c : {Combiner::CCT, Combiner::TCCT, Combiner::Tippett}) {
    if (name == to_string(c)) return c;
  }
  config_error("unknown combiner '" + name + "'");
}

Reference parse_reference(const std::string& text) {
  if (text == "normal") return NormalReference{};
  if (text.rfind("exp:", 0) == 0) {
    const double rate = to_double("reference", text.substr(4));
    if (!(rate > 0.0) || !std::isfinite(rate)) config_error("exponential rate must be positive");
    return ExpReference{rate};
  }
  if (text == "exp") return ExpReference{1.0};
  config_error("reference must be exp:<rate> or normal, got '" + text + "'");
}

void validate(const RunConfig& config) {
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) config_error("alpha must lie in (0, 1)");
  if (config.jobs < 1) config_error("jobs must be >= 1");
  if (config.methods.empty()) config_error("no method selected");
  if (config.ranks < 0) config_error("ranks must be >= 0");
  if (config.gamma && !std::isfinite(*config.gamma)) config_error("gamma must be finite");
  parse_reference(config.reference);
  if (config.command == Command::Simulate) {
    if (config.config_path.empty()) config_error("simulate needs --config <SimSpec file>");
    if (!std::filesystem::is_regular_file(config.config_path)) {
      config_error("config file '" + config.config_path + "' does not exist");
    }
  } else {
    if (config.input_path.empty()) config_error("no input file given");
    if (!std::filesystem::is_regular_file(config.input_path)) {
      config_error("input file '" + config.input_path + "' does not exist");
    }
  }
}

json to_json(const RunConfig& config) {
  json j;
  j["command"] = to_string(config.command);
  if (config.command == Command::Simulate) {
    j["config_path"] = config.config_path;
  } else {
    j["input_path"] = config.input_path;
    j["input_format"] = to_string(config.input_format);
    j["column"] = config.column;
    j["ranks"] = config.ranks;
    json methods = json::array();
    for (Method m : config.methods) methods.push_back(to_string(m));
    j["methods"] = methods;
    j["combiner"] = to_string(config.combiner);
    j["alpha"] = config.alpha;
    j["gamma"] = config.gamma ? json(*config.gamma) : json("auto");
    j["reference"] = reference_string(parse_reference(config.reference));
    j["format"] = config.format == OutputFormat::Json ? "json" : "csv";
  }
  j["seed"] = config.seed ? json(*config.seed) : json(nullptr);
  return j;
}

ExperimentConfig parse_simspec(const std::string& text) {
  std::map<std::string, std::string> values;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      config_error("line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty() || value.empty()) {
      config_error("line " + std::to_string(line_no) + ": empty key or value");
    }
    if (!values.emplace(key, value).second) {
      config_error("line " + std::to_string(line_no) + ": key '" + key + "' repeated");
    }
  }

  const std::string model = values.count("model") ? values.at("model") : "hier";
  if (model != "hier" && model != "copula") config_error("model must be hier or copula");
  std::set<std::string> allowed = kExperimentKeys;
  std::string dgp = "normal";
  if (model == "hier") {
    allowed.insert(kHierKeys.begin(), kHierKeys.end());
    if (values.count("dgp")) dgp = values.at("dgp");
    const auto it = kDgpKeys.find(dgp);
    if (it == kDgpKeys.end()) config_error("unknown dgp '" + dgp + "'");
    allowed.insert(it->second.begin(), it->second.end());
  } else {
    allowed.insert(kCopulaKeys.begin(), kCopulaKeys.end());
  }
  for (const auto& [key, value] : values) {
    if (!allowed.count(key)) {
      config_error("unknown key '" + key + "' for model " + model +
                   (model == "hier" ? " with dgp " + dgp : std::string()));
    }
  }
  auto get = [&](const std::string& key) -> const std::string* {
    const auto it = values.find(key);
    return it == values.end() ? nullptr : &it->second;
  };

  ExperimentConfig config;
  std::uint64_t seed = 1;
  if (const auto* v = get("seed")) seed = to_int<std::uint64_t>("seed", *v);

  if (model == "hier") {
    ConjugateHierSpec spec;
    spec.seed = seed;
    if (const auto* v = get("G")) spec.G = to_int<int>("G", *v);
    if (const auto* v = get("m")) spec.m = to_int<int>("m", *v);
    if (const auto* v = get("sigma")) spec.sigma = to_double("sigma", *v);
    if (const auto* v = get("tau")) spec.tau = to_double("tau", *v);
    if (const auto* v = get("mu0")) spec.mu0 = to_double("mu0", *v);
    if (const auto* v = get("fit")) {
      if (*v == "known") spec.fit = FitMode::Known;
      else if (*v == "plugin") spec.fit = FitMode::Plugin;
      else config_error("fit must be known or plugin");
    }
    if (dgp == "student_t") {
      StudentTDgp d;
      if (const auto* v = get("nu")) d.nu = to_double("nu", *v);
      spec.dgp = d;
    } else if (dgp == "lognormal") {
      LogNormalDgp d;
      if (const auto* v = get("sigma_log")) d.sigma_log = to_double("sigma_log", *v);
      spec.dgp = d;
    } else if (dgp == "gennormal") {
      GeneralizedNormalDgp d;
      if (const auto* v = get("gn_alpha")) d.alpha = to_double("gn_alpha", *v);
      if (const auto* v = get("gn_beta")) d.beta = to_double("gn_beta", *v);
      spec.dgp = d;
    } else if (dgp == "betabinomial") {
      BetaBinomialDgp d;
      if (const auto* v = get("N")) d.N = to_int<std::int64_t>("N", *v);
      if (const auto* v = get("phi")) d.phi = to_double("phi", *v);
      spec.dgp = d;
    } else if (dgp == "negbinomial") {
      NegBinomialDgp d;
      if (const auto* v = get("phi")) d.phi = to_double("phi", *v);
      spec.dgp = d;
    }
    config.model = spec;
  } else {
    LowRankCopulaSpec spec;
    spec.seed = seed;
    if (const auto* v = get("n")) spec.n = to_int<std::size_t>("n", *v);
    if (const auto* v = get("p")) spec.p = to_int<std::size_t>("p", *v);
    if (const auto* v = get("loading_scale")) spec.loading_scale = to_double("loading_scale", *v);
    if (const auto* v = get("structure")) {
      if (*v == "shared_factor") spec.structure = CopulaStructure::SharedFactor;
      else if (*v == "residual") spec.structure = CopulaStructure::Residual;
      else config_error("structure must be shared_factor or residual");
    }
    config.model = spec;
  }

  if (const auto* v = get("pit")) {
    if (*v == "loo") config.pit = PitVariant::Loo;
    else if (*v == "posterior") config.pit = PitVariant::Posterior;
    else if (*v == "spp") config.pit = PitVariant::Spp;
    else config_error("pit must be loo, posterior or spp");
  }
  if (const auto* v = get("methods")) {
    for (const auto& item : split(*v, ',')) {
      MethodSpec m;
      const auto plus = item.find('+');
      m.method = parse_method(item.substr(0, plus));
      if (plus != std::string::npos) {
        m.combiner = parse_combiner(item.substr(plus + 1));
      } else if (m.method == Method::PITOS) {
        m.combiner = Combiner::CCT;
      } else if (m.method == Method::KS || m.method == Method::AD) {
        m.combiner = Combiner::None;
      }
      config.methods.push_back(m);
    }
  } else {
    config.methods = {{Method::PietC, Combiner::TCCT}};
  }
  if (const auto* v = get("replicates")) config.replicates = to_int<std::size_t>("replicates", *v);
  if (const auto* v = get("alphas")) {
    config.alphas.clear();
    for (const auto& item : split(*v, ',')) config.alphas.push_back(to_double("alphas", item));
  }
  if (const auto* v = get("reference")) config.reference = parse_reference(*v);
  if (const auto* v = get("pitos_budget")) {
    config.pitos_budget = to_int<std::size_t>("pitos_budget", *v);
  }
  if (const auto* v = get("error_budget")) {
    config.error_budget = to_int<std::size_t>("error_budget", *v);
  }
  if (const auto* v = get("keep_pits")) config.keep_pits = to_bool("keep_pits", *v);
  validate(config);
  return config;
}

ExperimentConfig read_simspec(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) config_error("cannot open config file '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_simspec(buffer.str());
}

json to_json(const ExperimentConfig& config) {
  json j;
  if (const auto* spec = std::get_if<ConjugateHierSpec>(&config.model)) {
    j["model"] = "hier";
    j["G"] = spec->G;
    j["m"] = spec->m;
    j["sigma"] = number_or_string(spec->sigma);
    j["tau"] = number_or_string(spec->tau);
    j["mu0"] = spec->mu0;
    j["fit"] = spec->fit == FitMode::Known ? "known" : "plugin";
    j["dgp"] = dgp_name(spec->dgp);
    std::visit(
        [&](const auto& d) {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, StudentTDgp>) j["nu"] = number_or_string(d.nu);
          if constexpr (std::is_same_v<T, LogNormalDgp>) j["sigma_log"] = d.sigma_log;
          if constexpr (std::is_same_v<T, GeneralizedNormalDgp>) {
            j["gn_alpha"] = d.alpha;
            j["gn_beta"] = d.beta;
          }
          if constexpr (std::is_same_v<T, BetaBinomialDgp>) {
            j["N"] = d.N;
            j["phi"] = d.phi;
          }
          if constexpr (std::is_same_v<T, NegBinomialDgp>) j["phi"] = d.phi;
        },
        spec->dgp);
    j["seed"] = spec->seed;
  } else {
    const auto& c = std::get<LowRankCopulaSpec>(config.model);
    j["model"] = "copula";
    j["n"] = c.n;
    j["p"] = c.p;
    j["loading_scale"] = c.loading_scale;
    j["structure"] = c.structure == CopulaStructure::SharedFactor ? "shared_factor" : "residual";
    j["seed"] = c.seed;
  }
  j["pit"] = to_string(config.pit);
  json methods = json::array();
  for (const auto& m : config.methods) methods.push_back(m.label());
  j["methods"] = methods;
  j["replicates"] = config.replicates;
  j["alphas"] = config.alphas;
  j["reference"] = reference_string(config.reference);
  j["pitos_budget"] = config.pitos_budget;
  j["error_budget"] = config.error_budget;
  j["keep_pits"] = config.keep_pits;
  return j;
}

}  // namespace pitdep::cli
