#include "pitdep/combine.hpp"

#include <algorithm>
#include <cmath>

#include "pitdep/error.hpp"
#include "pitdep/specfun.hpp"

namespace pitdep {
namespace {

void require_nonempty(const std::vector<double>& p_values) {
  if (p_values.empty()) throw Error(ErrorCode::EmptySample, "no p-values to combine");
}

void require_probability(double p, std::size_t i) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorCode::Domain, "p-value " + std::to_string(p) + " at index " +
                                       std::to_string(i) + " outside [0, 1]");
  }
}

[[noreturn]] void degenerate(double p, std::size_t i) {
  throw Error(ErrorCode::DegenerateP, "p-value " + std::to_string(p) + " at index " +
                                          std::to_string(i) +
                                          " has an infinite Cauchy transform" +
                                          (p >= 1.0 ? "; tcct skips p-values >= 0.5" : ""));
}

}  // namespace

std::string_view to_string(Combiner combiner) {
  switch (combiner) {
    case Combiner::CCT: return "cct";
    case Combiner::TCCT: return "tcct";
    case Combiner::Tippett: return "tippett";
    case Combiner::None: return "none";
  }
  return "unknown";
}

Combined cct(const std::vector<double>& p_values) {
  require_nonempty(p_values);
  double sum = 0.0;
  for (std::size_t i = 0; i < p_values.size(); ++i) {
    const double p = p_values[i];
    require_probability(p, i);
    if (p == 0.0 || p == 1.0) degenerate(p, i);
    sum += cauchy_transform(p);
  }
  const double t = sum / static_cast<double>(p_values.size());
  return {t, specfun::cauchy_sf(t)};
}

Combined tcct(const std::vector<double>& p_values) {
  require_nonempty(p_values);
  double sum = 0.0;
  for (std::size_t i = 0; i < p_values.size(); ++i) {
    const double p = p_values[i];
    require_probability(p, i);
    if (p == 0.0) degenerate(p, i);
    if (p < 0.5) sum += cauchy_transform(p);
  }
  const double t = sum / static_cast<double>(p_values.size());
  return {t, specfun::cauchy_sf(t)};
}

Combined tippett_min_p(const std::vector<double>& p_values) {
  require_nonempty(p_values);
  for (std::size_t i = 0; i < p_values.size(); ++i) require_probability(p_values[i], i);
  const double p_min = *std::min_element(p_values.begin(), p_values.end());
  const double n = static_cast<double>(p_values.size());
  const double p_star = p_min >= 1.0 ? 1.0 : -std::expm1(n * std::log1p(-p_min));
  return {p_min, Probability(p_star)};
}

Combined combine(const std::vector<double>& p_values, Combiner combiner) {
  switch (combiner) {
    case Combiner::CCT: return cct(p_values);
    case Combiner::TCCT: return tcct(p_values);
    case Combiner::Tippett: return tippett_min_p(p_values);
    case Combiner::None: break;
  }
  throw Error(ErrorCode::Domain, "pointwise p-values need a combiner");
}

std::vector<double> combination_terms(const std::vector<double>& p_values, Combiner combiner) {
  std::vector<double> t(p_values.size());
  for (std::size_t i = 0; i < p_values.size(); ++i) {
    const double p = p_values[i];
    t[i] = combiner == Combiner::TCCT && !(p < 0.5) ? 0.0 : cauchy_transform(p);
  }
  return t;
}

TestReport make_report(Method method, Combiner combiner, const Combined& combined,
                       double alpha, std::size_t n) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorCode::Domain, "alpha must lie in (0, 1)");
  }
  TestReport report;
  report.method = method;
  report.combiner = combiner;
  report.statistic = combined.statistic;
  report.global_p = combined.p_star;
  report.raw_p = combined.p_star;
  report.alpha = alpha;
  report.reject = combined.p_star <= alpha;
  report.n = n;
  if (combiner == Combiner::Tippett) report.notes.emplace_back("independence-assuming");
  return report;
}

TestReport combine_pointwise(const PointwiseResult& pointwise, Combiner combiner, double alpha) {
  TestReport report = make_report(pointwise.method, combiner,
                                  combine(pointwise.p_values, combiner), alpha,
                                  pointwise.index_map.size());
  report.notes.insert(report.notes.end(), pointwise.warnings.begin(), pointwise.warnings.end());
  return report;
}

}  // namespace pitdep
