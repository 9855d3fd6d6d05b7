#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "doctest.h"
#include "pitdep/cli.hpp"
#include "pitdep/error.hpp"

using namespace pitdep;
using namespace pitdep::cli;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / ("pitdep_test_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path write(const std::string& file, const std::string& content) const {
    std::ofstream(path / file, std::ios::binary) << content;
    return path / file;
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Outcome {
  int code;
  std::string out, err;
};

Outcome run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "pitdep");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::size_t count_of(const std::string& haystack, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = haystack.find(needle); pos != std::string::npos;
       pos = haystack.find(needle, pos + 1)) {
    ++n;
  }
  return n;
}

// Checks that elements nest properly; attribute syntax is not inspected.
bool well_formed_xml(const std::string& xml) {
  std::vector<std::string> stack;
  std::size_t pos = 0;
  while ((pos = xml.find('<', pos)) != std::string::npos) {
    const auto close = xml.find('>', pos);
    if (close == std::string::npos) return false;
    const std::string tag = xml.substr(pos + 1, close - pos - 1);
    pos = close + 1;
    if (tag.empty()) return false;
    if (tag.front() == '?' || tag.front() == '!') continue;
    if (tag.front() == '/') {
      if (stack.empty() || stack.back() != tag.substr(1)) return false;
      stack.pop_back();
      continue;
    }
    if (tag.back() == '/') continue;
    stack.push_back(tag.substr(0, tag.find_first_of(" \n\t")));
  }
  return stack.empty();
}

}  // namespace

TEST_CASE("test command composes the library pipeline") {
  TempDir dir("compose");
  const auto input = dir.write("three.txt", "0.5\n0.5\n0.5\n");
  const auto out = (dir.path / "out").string();

  // The middle order statistic has p = 1, which the untruncated CCT refuses.
  auto r = run_cli({"test", input.string(), "--method", "potc", "--combiner", "cct", "--out", out});
  CHECK(r.code == 1);
  CHECK(r.err.find("DegenerateP") != std::string::npos);

  r = run_cli({"test", input.string(), "--method", "potc", "--combiner", "tcct", "--out", out});
  const auto sample = PitSample::continuous({0.5, 0.5, 0.5});
  const auto expected = combine(potc_pointwise(sample).p_values, Combiner::TCCT);
  const auto report = nlohmann::json::parse(slurp(fs::path(out) / "report_potc.json"));
  CHECK(r.code == (expected.p_star <= 0.05 ? 2 : 0));
  CHECK(report["report"]["global_p"].get<double>() == expected.p_star);
  CHECK(report["report"]["statistic"].get<double>() == expected.statistic);
  CHECK(report["version"] == std::string(version()));
  CHECK(report["config"]["combiner"] == "tcct");
  CHECK(!report["config"].contains("jobs"));
  const auto pv = report["pointwise"]["p_values"].get<std::vector<double>>();
  CHECK(pv == potc_pointwise(sample).p_values);
}

TEST_CASE("input errors exit with code 1") {
  TempDir dir("errors");
  const auto out = (dir.path / "out").string();
  auto r = run_cli({"test", dir.write("empty.txt", "").string(), "--out", out});
  CHECK(r.code == 1);
  CHECK(r.err.find("EmptySample") != std::string::npos);

  r = run_cli({"test", dir.write("big.txt", "1.2\n").string(), "--out", out});
  CHECK(r.code == 1);
  CHECK(r.err.find("DomainError") != std::string::npos);

  r = run_cli({"test", dir.write("bad.txt", "0.1\nabc\n0.3\n").string(), "--out", out});
  CHECK(r.code == 1);
  CHECK(r.err.find("ParseError: line 2") != std::string::npos);

  r = run_cli({"test", (dir.path / "missing.txt").string(), "--out", out});
  CHECK(r.code == 1);
  CHECK(r.err.find("ConfigError") != std::string::npos);

  r = run_cli({"test", dir.write("ok.txt", "0.2\n0.4\n").string(), "--method", "nope"});
  CHECK(r.code == 1);
  r = run_cli({"test", dir.write("ok2.txt", "0.2\n0.4\n").string(), "--alpha", "1.5"});
  CHECK(r.code == 1);
}

TEST_CASE("exit code 2 signals a rejection") {
  TempDir dir("reject");
  std::string text;
  for (int i = 1; i <= 50; ++i) text += std::to_string(0.001 * i) + "\n";
  const auto input = dir.write("low.txt", text);
  const auto r = run_cli({"test", input.string(), "--method", "potc", "--method", "ks", "--out",
                          (dir.path / "out").string()});
  CHECK(r.code == 2);
  CHECK(fs::exists(dir.path / "out" / "report_potc.json"));
  CHECK(fs::exists(dir.path / "out" / "report_ks.json"));
}

TEST_CASE("input formats") {
  CHECK(detect_format("a.csv") == InputFormat::Csv);
  CHECK(detect_format("a.json") == InputFormat::Json);
  CHECK(detect_format("a.txt") == InputFormat::Text);

  auto s = parse_pit_text("id,pit\n1,0.25\n2,0.75\n", InputFormat::Csv, "pit");
  CHECK(s.values == std::vector<double>{0.25, 0.75});
  s = parse_pit_text("0.1,9\n0.2,9\n", InputFormat::Csv, "0");
  CHECK(s.values == std::vector<double>{0.1, 0.2});
  s = parse_pit_text("u\n0.3\n", InputFormat::Csv);
  CHECK(s.values == std::vector<double>{0.3});
  CHECK_THROWS_AS(parse_pit_text("a,b\n0.1,0.2\n", InputFormat::Csv, "c"), Error);
  CHECK_THROWS_AS(parse_pit_text("0.1\n0.2,x\n", InputFormat::Csv, "1"), Error);

  s = parse_pit_text("[0.1, 0.5]", InputFormat::Json);
  CHECK(s.kind == PitKind::Continuous);
  s = parse_pit_text("{\"values\": [0.25, 0.5], \"draws\": 4}", InputFormat::Json);
  CHECK(s.kind == PitKind::RankBased);
  CHECK(s.draws == 4);
  try {
    parse_pit_text("[0.1,\n 0.2,\n oops]", InputFormat::Json);
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Parse);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  s = parse_pit_text("0.25\n\n0.5\n", InputFormat::Text, {}, 4);
  CHECK(s.kind == PitKind::RankBased);
  CHECK_THROWS_AS(parse_pit_text("0.3\n", InputFormat::Text, {}, 4), Error);
}

TEST_CASE("csv reports keep 17 significant digits") {
  TempDir dir("csv");
  const auto input = dir.write("u.txt", "0.13\n0.52\n0.77\n0.91\n");
  const auto out = dir.path / "out";
  const auto r = run_cli({"test", input.string(), "--method", "pietc", "--format", "csv", "--out",
                          out.string()});
  CHECK(r.code == 0);
  const std::string csv = slurp(out / "reports.csv");
  CHECK(csv.rfind("# pitdep ", 0) == 0);
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  std::getline(lines, line);
  CHECK(line == "method,combiner,n,statistic,global_p,alpha,reject,notes");
  std::getline(lines, line);
  const auto sample = PitSample::continuous({0.13, 0.52, 0.77, 0.91});
  const auto expected = combine(pietc_pointwise(sample, ExpReference{1.0}).p_values, Combiner::TCCT);
  std::vector<std::string> fields;
  std::istringstream row(line);
  for (std::string f; std::getline(row, f, ',');) fields.push_back(f);
  REQUIRE(fields.size() >= 5);
  CHECK(std::stod(fields[4]) == expected.p_star);
  CHECK(std::stod(fields[3]) == expected.statistic);
}

TEST_CASE("plot writes round-tripping data and a matching SVG") {
  TempDir dir("plot");
  std::string text;
  for (int i = 1; i <= 40; ++i) text += std::to_string(i < 8 ? 0.002 * i : 0.4 + 0.012 * i) + "\n";
  const auto input = dir.write("skew.txt", text);
  const auto out = dir.path / "out";
  auto r = run_cli({"plot", input.string(), "--method", "potc", "--out", out.string()});
  REQUIRE(r.code == 0);

  const auto data = nlohmann::json::parse(slurp(out / "ecdf_potc.json"));
  const auto points = ecdf_points_from_json(data);
  CHECK(to_json(points) == data);
  const auto influence = nlohmann::json::parse(slurp(out / "influence_potc.json"));
  const auto ir = influence["influential"].get<std::vector<std::size_t>>();
  CHECK(!ir.empty());

  // Same numbers as a direct library call.
  const PitSample sample = read_pit_file(input, InputFormat::Auto);
  const auto pw = potc_pointwise(sample);
  const auto lib = analyze_influence(sample, pw, Combiner::TCCT, 0.05);
  CHECK(std::vector<std::size_t>(lib.influential.begin(), lib.influential.end()) == ir);
  REQUIRE(points.size() == lib.ecdf_points.size());
  for (std::size_t k = 0; k < points.size(); ++k) {
    CHECK(points[k].x == lib.ecdf_points[k].x);
    CHECK(points[k].tilted == lib.ecdf_points[k].tilted);
    CHECK(points[k].highlighted == lib.ecdf_points[k].highlighted);
  }

  const std::string svg = slurp(out / "ecdf_potc.svg");
  CHECK(well_formed_xml(svg));
  CHECK(count_of(svg, "class=\"influential\"") == ir.size());
  CHECK(count_of(svg, "class=\"diagonal\"") == 1);

  for (const char* method : {"pritc", "pietc"}) {
    r = run_cli({"plot", input.string(), "--method", method, "--out", out.string()});
    REQUIRE(r.code == 0);
    const auto inf = nlohmann::json::parse(slurp(out / (std::string("influence_") + method + ".json")));
    const auto svg2 = slurp(out / (std::string("ecdf_") + method + ".svg"));
    CHECK(well_formed_xml(svg2));
    CHECK(count_of(svg2, "class=\"influential\"") == inf["influential"].size());
  }
}

TEST_CASE("plot threshold above every Shapley value highlights nothing") {
  TempDir dir("grid");
  std::string text;
  for (int i = 1; i <= 30; ++i) text += std::to_string(i / 31.0) + "\n";
  const auto input = dir.write("grid.txt", text);
  const PitSample sample = read_pit_file(input, InputFormat::Auto);
  const auto phi = shapley_values(potc_pointwise(sample).cauchy_t);
  const double top = *std::max_element(phi.begin(), phi.end());
  REQUIRE(top > 0.0);
  const auto out = dir.path / "out";
  for (double gamma : {top, top / 2}) {
    const auto r = run_cli({"plot", input.string(), "--method", "potc", "--combiner", "cct",
                            "--gamma", fmt::format("{:.17g}", gamma), "--out", out.string()});
    REQUIRE(r.code == 0);
    const auto points = ecdf_points_from_json(nlohmann::json::parse(slurp(out / "ecdf_potc.json")));
    const auto above = static_cast<std::size_t>(
        std::count_if(phi.begin(), phi.end(), [&](double v) { return v > gamma; }));
    std::size_t highlighted = 0;
    for (const auto& p : points) highlighted += p.highlighted;
    CHECK(highlighted == above);
    CHECK(count_of(slurp(out / "ecdf_potc.svg"), "class=\"influential\"") == above);
    if (gamma == top) CHECK(above == 0);
  }

  // Every grid p-value is at least 1/2, so all truncated terms vanish.
  const auto r = run_cli({"plot", input.string(), "--method", "potc", "--out", out.string()});
  REQUIRE(r.code == 0);
  const auto inf = nlohmann::json::parse(slurp(out / "influence_potc.json"));
  CHECK(inf["gamma"] == 0.0);
  CHECK(inf["influential"].empty());

  const auto bad = run_cli({"plot", input.string(), "--method", "potc", "--gamma", "1e9", "--out",
                            out.string()});
  CHECK(bad.code == 1);
  CHECK(bad.err.find("GammaOutOfRange") != std::string::npos);
  CHECK(run_cli({"plot", input.string(), "--method", "ks", "--out", out.string()}).code == 1);
}

TEST_CASE("simulate writes deterministic outcome files") {
  TempDir dir("simulate");
  const auto spec = dir.write("spec.txt",
                              "# small null run\n"
                              "model = hier\nG = 6\nm = 4\nreplicates = 1\n"
                              "methods = pietc+tcct, potc+tcct, ks, pitos\nalphas = 0.05\n");
  const auto a = dir.path / "a";
  auto r = run_cli({"simulate", "--config", spec.string(), "--seed", "3", "--out", a.string()});
  REQUIRE(r.code == 0);
  const auto outcome = nlohmann::json::parse(slurp(a / "sim_outcome.json"));
  for (const auto& label : outcome["outcome"]["methods"]) {
    CHECK(outcome["outcome"]["p_values"][label.get<std::string>()].size() == 1);
  }
  CHECK(outcome["simspec"]["seed"] == 3);
  CHECK(slurp(a / "rejection_rates.csv").find("method,alpha,rejections,replicates,rate,se") !=
        std::string::npos);

  const auto bigger = dir.write("spec2.txt", "G = 5\nm = 3\nreplicates = 25\nmethods = potc+tcct, ad\n");
  const auto b1 = dir.path / "b1";
  const auto b2 = dir.path / "b2";
  REQUIRE(run_cli({"simulate", "--config", bigger.string(), "--jobs", "1", "--out", b1.string()}).code == 0);
  REQUIRE(run_cli({"simulate", "--config", bigger.string(), "--jobs", "3", "--out", b2.string()}).code == 0);
  CHECK(slurp(b1 / "sim_outcome.json") == slurp(b2 / "sim_outcome.json"));
  CHECK(slurp(b1 / "rejection_rates.csv") == slurp(b2 / "rejection_rates.csv"));
}

TEST_CASE("SimSpec parsing") {
  const auto c = parse_simspec(
      "model = copula\nn = 40\np = 2\nloading_scale = 0.3\nstructure = residual\nseed = 9\n"
      "methods = ks, pitos, pritc+cct\nreplicates = 7\nalphas = 0.01, 0.1\n");
  const auto& spec = std::get<LowRankCopulaSpec>(c.model);
  CHECK(spec.n == 40);
  CHECK(spec.structure == CopulaStructure::Residual);
  CHECK(spec.seed == 9);
  CHECK(c.methods.size() == 3);
  CHECK(c.methods[2].combiner == Combiner::CCT);
  CHECK(c.alphas == std::vector<double>{0.01, 0.1});

  const auto h = parse_simspec("dgp = student_t\nnu = 4\ntau = inf\nfit = plugin\n");
  const auto& hs = std::get<ConjugateHierSpec>(h.model);
  CHECK(std::get<StudentTDgp>(hs.dgp).nu == 4.0);
  CHECK(std::isinf(hs.tau));
  CHECK(to_json(h)["tau"] == "inf");

  for (const char* bad : {"colour = red\n", "n = 10\n", "nu = 3\n", "G = 5\nG = 6\n",
                          "G = five\n", "replicates = 0\n", "alpha = 0.05\n", "just text\n",
                          "methods = potc+none\n"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(parse_simspec(bad), Error);
  }

  TempDir dir("badspec");
  const auto r = run_cli({"simulate", "--config", dir.write("s.txt", "sigmaa = 1\n").string(),
                          "--out", (dir.path / "o").string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("unknown key 'sigmaa'") != std::string::npos);
  CHECK(!fs::exists(dir.path / "o"));
}

TEST_CASE("argument parsing") {
  std::ostringstream sink;
  const char* argv[] = {"pitdep", "test",     "in.txt",  "--method", "potc",   "--method",
                        "ks,ad",  "--gamma",  "0.25",    "--alpha",  "0.1",    "--reference",
                        "normal", "--ranks",  "100",     "--combiner", "tippett"};
  const auto c = parse_args(17, argv, sink);
  REQUIRE(c);
  CHECK(c->methods == std::vector<Method>{Method::PotC, Method::KS, Method::AD});
  CHECK(c->gamma == 0.25);
  CHECK(c->alpha == 0.1);
  CHECK(c->ranks == 100);
  CHECK(c->combiner == Combiner::Tippett);
  CHECK(std::holds_alternative<NormalReference>(parse_reference(c->reference)));
  CHECK(std::get<ExpReference>(parse_reference("exp:2.5")).rate == 2.5);
  CHECK_THROWS_AS(parse_reference("gamma:2"), Error);

  const char* help[] = {"pitdep", "--help"};
  CHECK(!parse_args(2, help, sink));
  CHECK(sink.str().find("simulate") != std::string::npos);
  const char* none[] = {"pitdep"};
  CHECK_THROWS_AS(parse_args(1, none, sink), Error);
}

TEST_CASE("output directory falls back to the environment") {
  RunConfig c;
  ::unsetenv(kOutDirEnv);
  CHECK(resolve_out_dir(c) == fs::path("."));
  ::setenv(kOutDirEnv, "/tmp/pitdep_env_dir", 1);
  CHECK(resolve_out_dir(c) == fs::path("/tmp/pitdep_env_dir"));
  c.out_dir = "explicit";
  CHECK(resolve_out_dir(c) == fs::path("explicit"));
  ::unsetenv(kOutDirEnv);
}
