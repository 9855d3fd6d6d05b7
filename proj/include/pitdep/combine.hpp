#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "pitdep/pointwise.hpp"

namespace pitdep {

enum class Combiner { CCT, TCCT, Tippett, None };

std::string_view to_string(Combiner combiner);

struct Combined {
  double statistic = 0.0;
  double p_star = 1.0;
};

// Equal-weight Cauchy combination. Every p must lie strictly inside (0, 1).
Combined cct(const std::vector<double>& p_values);
// Only terms with p < 0.5 contribute; the mean is still over all n.
Combined tcct(const std::vector<double>& p_values);
// Min-p with the independence formula 1 - (1 - p_min)^n.
Combined tippett_min_p(const std::vector<double>& p_values);

Combined combine(const std::vector<double>& p_values, Combiner combiner);

// The per-test terms whose mean is the combined statistic. Tippett and None
// fall back to the untruncated Cauchy terms.
std::vector<double> combination_terms(const std::vector<double>& p_values, Combiner combiner);

struct TestReport {
  Method method = Method::PotC;
  Combiner combiner = Combiner::None;
  double statistic = 0.0;
  double global_p = 1.0;
  double alpha = 0.05;
  bool reject = false;
  std::size_t n = 0;
  // PITOS only: p* before the 1.15 correction, and pairs dropped.
  double raw_p = 1.0;
  std::size_t pairs_used = 0;
  std::size_t pairs_dropped = 0;
  std::vector<std::string> notes;
};

TestReport make_report(Method method, Combiner combiner, const Combined& combined,
                       double alpha, std::size_t n);

TestReport combine_pointwise(const PointwiseResult& pointwise, Combiner combiner, double alpha);

}  // namespace pitdep
