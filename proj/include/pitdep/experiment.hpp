#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "pitdep/combine.hpp"
#include "pitdep/copula.hpp"
#include "pitdep/pitlab.hpp"
#include "pitdep/pointwise.hpp"

namespace pitdep {

enum class PitVariant { Loo, Posterior, Spp };

std::string_view to_string(PitVariant variant);

// A test to run on every replicate. The combiner applies to POT-C, PRIT-C and
// PIET-C only.
struct MethodSpec {
  Method method = Method::PietC;
  Combiner combiner = Combiner::TCCT;

  std::string label() const;
};

struct ExperimentConfig {
  std::variant<ConjugateHierSpec, LowRankCopulaSpec> model = ConjugateHierSpec{};
  PitVariant pit = PitVariant::Loo;
  std::vector<MethodSpec> methods;
  std::size_t replicates = 100;
  std::vector<double> alphas{0.05};
  unsigned parallelism = 1;
  Reference reference = ExpReference{1.0};
  std::size_t pitos_budget = 0;
  // Replicate failures tolerated before the run aborts.
  std::size_t error_budget = 0;
  // Keep every replicate's PIT values in the outcome.
  bool keep_pits = false;
};

struct ReplicateFailure {
  std::size_t replicate = 0;
  std::string method;
  std::string message;
};

struct SimOutcome {
  std::vector<std::string> labels;
  // p_values[method][replicate]; NaN where the replicate failed.
  std::vector<std::vector<double>> p_values;
  // rejection_rate[method][alpha] = #{p* <= alpha} / S.
  std::vector<std::vector<double>> rejection_rate;
  std::vector<double> alphas;
  std::size_t replicates = 0;
  std::size_t n = 0;
  double mean_pairwise_correlation = 0.0;
  std::size_t clamped_pits = 0;
  std::vector<ReplicateFailure> failures;
  // PIT values of every replicate whose data step succeeded, when keep_pits is set.
  std::vector<std::vector<double>> pits;
};

void validate(const ExperimentConfig& config);

// Seeds the generator of one replicate from (master seed, replicate index).
std::mt19937_64 replicate_stream(std::uint64_t master_seed, std::size_t replicate);

SimOutcome run_experiment(const ExperimentConfig& config);

// p-value of one method on one PIT sample.
double run_method(const MethodSpec& method, const PitSample& sample, const ExperimentConfig& config);

}  // namespace pitdep
