#include "pitdep/experiment.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <thread>

#include "pitdep/baselines.hpp"
#include "pitdep/error.hpp"
#include "pitdep/pitos.hpp"

namespace pitdep {
namespace {

bool is_pointwise(Method m) {
  return m == Method::PotC || m == Method::PritC || m == Method::PietC;
}

std::uint64_t master_seed(const ExperimentConfig& config) {
  return std::visit([](const auto& spec) { return spec.seed; }, config.model);
}

double mean_pairwise_correlation(const std::vector<std::vector<double>>& pits) {
  const std::size_t S = pits.size();
  if (S < 2) return 0.0;
  const std::size_t n = pits.front().size();
  if (n < 2) return 0.0;
  std::vector<double> mean(n, 0.0), sd(n, 0.0);
  for (const auto& row : pits) {
    for (std::size_t i = 0; i < n; ++i) mean[i] += row[i];
  }
  for (double& m : mean) m /= static_cast<double>(S);
  for (const auto& row : pits) {
    for (std::size_t i = 0; i < n; ++i) sd[i] += (row[i] - mean[i]) * (row[i] - mean[i]);
  }
  for (double& s : sd) s = std::sqrt(s / static_cast<double>(S - 1));
  // With standardized columns, Var(sum z) = n + sum over i != j of Corr(i, j).
  double sum_sq = 0.0;
  for (const auto& row : pits) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (sd[i] > 0.0) total += (row[i] - mean[i]) / sd[i];
    }
    sum_sq += total * total;
  }
  const double var_total = sum_sq / static_cast<double>(S - 1);
  const double nd = static_cast<double>(n);
  return (var_total - nd) / (nd * (nd - 1.0));
}

}  // namespace

std::string_view to_string(PitVariant variant) {
  switch (variant) {
    case PitVariant::Loo: return "loo";
    case PitVariant::Posterior: return "posterior";
    case PitVariant::Spp: return "spp";
  }
  return "unknown";
}

std::string MethodSpec::label() const {
  std::string s(to_string(method));
  if (is_pointwise(method)) {
    s += "+";
    s += to_string(combiner);
  }
  return s;
}

void validate(const ExperimentConfig& config) {
  if (config.replicates < 1) throw Error(ErrorCode::Config, "replicates must be >= 1");
  if (config.parallelism < 1) throw Error(ErrorCode::Config, "parallelism must be >= 1");
  if (config.methods.empty()) throw Error(ErrorCode::Config, "no methods selected");
  for (double a : config.alphas) {
    if (!(a > 0.0 && a < 1.0)) throw Error(ErrorCode::Config, "alpha must lie in (0, 1)");
  }
  for (const auto& m : config.methods) {
    if (is_pointwise(m.method) && m.combiner == Combiner::None) {
      throw Error(ErrorCode::Config, std::string(to_string(m.method)) + " needs a combiner");
    }
  }
  std::visit([](const auto& spec) { validate(spec); }, config.model);
  if (std::holds_alternative<LowRankCopulaSpec>(config.model) && config.pit != PitVariant::Loo) {
    throw Error(ErrorCode::Config, "copula models only produce one PIT variant");
  }
}

std::mt19937_64 replicate_stream(std::uint64_t master_seed, std::size_t replicate) {
  const auto r = static_cast<std::uint64_t>(replicate);
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                    static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(r >> 32)};
  return std::mt19937_64(seq);
}

double run_method(const MethodSpec& method, const PitSample& sample,
                  const ExperimentConfig& config) {
  switch (method.method) {
    case Method::PotC:
      return combine(potc_pointwise(sample).p_values, method.combiner).p_star;
    case Method::PritC: {
      const auto partition = sample.kind == PitKind::RankBased
                                 ? std::vector<double>{}
                                 : even_partition(sample.size());
      return combine(pritc_pointwise(sample, partition).p_values, method.combiner).p_star;
    }
    case Method::PietC:
      return combine(pietc_pointwise(sample, config.reference).p_values, method.combiner).p_star;
    case Method::KS: return ks_test(sample).global_p;
    case Method::AD: return ad_test(sample).global_p;
    case Method::PITOS: return pitos_test(sample, config.pitos_budget).global_p;
  }
  throw Error(ErrorCode::Config, "unknown method");
}

SimOutcome run_experiment(const ExperimentConfig& config) {
  validate(config);
  const std::size_t S = config.replicates;
  const std::size_t M = config.methods.size();
  const std::uint64_t seed = master_seed(config);

  std::optional<CopulaGenerator> copula;
  if (const auto* spec = std::get_if<LowRankCopulaSpec>(&config.model)) copula.emplace(*spec);

  SimOutcome out;
  out.replicates = S;
  out.alphas = config.alphas;
  for (const auto& m : config.methods) out.labels.push_back(m.label());
  out.p_values.assign(M, std::vector<double>(S, std::numeric_limits<double>::quiet_NaN()));
  std::vector<std::vector<double>> pits(S);
  std::vector<std::vector<ReplicateFailure>> failures(S);

  auto run_one = [&](std::size_t r) {
    std::mt19937_64 rng = replicate_stream(seed, r);
    PitSample sample;
    try {
      if (copula) {
        sample = copula->draw(rng);
      } else {
        const auto& spec = std::get<ConjugateHierSpec>(config.model);
        const Eigen::MatrixXd data = simulate_data(spec, rng);
        switch (config.pit) {
          case PitVariant::Loo: sample = exact_loo_pit(spec, data, &rng); break;
          case PitVariant::Posterior: sample = exact_posterior_pit(spec, data, &rng); break;
          case PitVariant::Spp: sample = spp_pit(spec, data, rng()); break;
        }
      }
    } catch (const Error& e) {
      failures[r].push_back({r, "data", e.what()});
      return;
    }
    for (std::size_t k = 0; k < M; ++k) {
      try {
        out.p_values[k][r] = run_method(config.methods[k], sample, config);
      } catch (const Error& e) {
        failures[r].push_back({r, out.labels[k], e.what()});
      }
    }
    pits[r] = std::move(sample.values);
  };

  std::atomic<std::size_t> next{0};
  std::exception_ptr fatal;
  std::mutex fatal_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t r = next.fetch_add(1);
      if (r >= S) return;
      try {
        run_one(r);
      } catch (...) {
        std::lock_guard<std::mutex> lock(fatal_mutex);
        if (!fatal) fatal = std::current_exception();
        next.store(S);
        return;
      }
    }
  };
  const unsigned threads = static_cast<unsigned>(std::min<std::size_t>(config.parallelism, S));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (fatal) std::rethrow_exception(fatal);

  for (auto& f : failures) {
    out.failures.insert(out.failures.end(), f.begin(), f.end());
  }
  if (out.failures.size() > config.error_budget) {
    const auto& first = out.failures.front();
    throw Error(ErrorCode::Replicate,
                "replicate " + std::to_string(first.replicate) + " (" + first.method +
                    "): " + first.message + " [" + std::to_string(out.failures.size()) +
                    " failures, budget " + std::to_string(config.error_budget) + "]");
  }

  out.rejection_rate.assign(M, std::vector<double>(config.alphas.size(), 0.0));
  for (std::size_t k = 0; k < M; ++k) {
    for (std::size_t a = 0; a < config.alphas.size(); ++a) {
      std::size_t count = 0;
      for (double p : out.p_values[k]) count += p <= config.alphas[a];
      out.rejection_rate[k][a] = static_cast<double>(count) / static_cast<double>(S);
    }
  }

  std::vector<std::vector<double>> complete;
  complete.reserve(S);
  for (auto& row : pits) {
    if (row.empty()) continue;
    out.n = row.size();
    for (double u : row) out.clamped_pits += is_clamped(u);
    complete.push_back(std::move(row));
  }
  out.mean_pairwise_correlation = mean_pairwise_correlation(complete);
  if (config.keep_pits) out.pits = std::move(complete);
  return out;
}

}  // namespace pitdep
