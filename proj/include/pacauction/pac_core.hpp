#pragma once

// Closed-form PAC quantities for learning from several annotators with
// classification noise: the per-example information rate psi, the
// feasibility test for an annotation plan, the analytic bounds behind it,
// and Monte Carlo estimators of the probabilities those bounds dominate.

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pacauction/errors.hpp"
#include "pacauction/parallel.hpp"
#include "pacauction/rng.hpp"
#include "pacauction/stats.hpp"

namespace pacauction {

inline constexpr double kOneThird = 1.0 / 3.0;

// Per-annotator example counts (m_1, ..., m_n).
using AnnotationPlan = std::vector<std::uint64_t>;

/// Learning target: error tolerance, failure probability and the size of a
/// finite concept class.
class PacParams {
 public:
  PacParams(double epsilon, double delta, std::uint64_t concept_count)
      : epsilon_(epsilon), delta_(delta), concept_count_(concept_count) {
    detail::require_domain(epsilon > 0.0 && epsilon < 1.0,
                           "PacParams: epsilon must lie in (0, 1)");
    detail::require_domain(delta > 0.0 && delta < 1.0,
                           "PacParams: delta must lie in (0, 1)");
    detail::require_domain(concept_count >= 2, "PacParams: concept_count must be >= 2");
  }

  double epsilon() const noexcept { return epsilon_; }
  double delta() const noexcept { return delta_; }
  std::uint64_t concept_count() const noexcept { return concept_count_; }

 private:
  double epsilon_;
  double delta_;
  std::uint64_t concept_count_;
};

// ln(N / delta): the amount of "information" a feasible plan must supply.
struct LogBudget {
  double value;
};

inline LogBudget log_budget(const PacParams& params) {
  return {std::log(static_cast<double>(params.concept_count()) / params.delta())};
}

namespace detail {

inline void require_epsilon(double epsilon) {
  require_domain(epsilon > 0.0 && epsilon < 1.0, "epsilon must lie in (0, 1)");
}

inline void require_feasibility_eta(double eta) {
  require_domain(eta >= 0.0 && eta <= kOneThird,
                 "noise rate " + std::to_string(eta) + " outside [0, 1/3]");
}

inline void require_simulation_eta(double eta) {
  require_domain(eta >= 0.0 && eta < 0.5,
                 "noise rate " + std::to_string(eta) + " outside [0, 1/2)");
}

}  // namespace detail

/// The interior information-rate formula
///   -ln(1 - eps * (1 - exp(-(1 - 3 eta) / 8)))
/// without the special boundary values. Continuous in eta; used wherever a
/// smooth rate is needed (bounds, auction scoring).
inline double psi_interior(double eta, double epsilon) {
  detail::require_epsilon(epsilon);
  const double shrink = -std::expm1(-(1.0 - 3.0 * eta) / 8.0);
  return -std::log1p(-epsilon * shrink);
}

/// Information rate of one example from an annotator with noise rate eta.
///
/// At eta == 0 this is the noiseless rate -ln(1 - eps); at eta == 1/3 it is
/// -ln(1 - eps (1 - e^{-1/18})). Both boundary values are deliberately
/// discontinuous with psi_interior; everything strictly inside uses the
/// interior formula.
inline double psi(double eta, double epsilon) {
  detail::require_epsilon(epsilon);
  detail::require_feasibility_eta(eta);
  if (eta == 0.0) return -std::log1p(-epsilon);
  if (eta == kOneThird) return -std::log1p(-epsilon * -std::expm1(-1.0 / 18.0));
  return psi_interior(eta, epsilon);
}

// Sum of counts_i * psi(etas_i) accumulated in index order.
inline double plan_information(std::span<const std::uint64_t> counts,
                               std::span<const double> etas, double epsilon) {
  detail::require_same_size(counts.size(), etas.size(), "plan_information");
  double total = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    total += static_cast<double>(counts[i]) * psi(etas[i], epsilon);
  }
  return total;
}

/// True iff the plan guarantees the PAC bound for the minimum disagreement
/// learner: ln(N/delta) <= sum_i m_i psi(eta_i). Exact double comparison.
inline bool is_feasible(std::span<const std::uint64_t> plan, std::span<const double> etas,
                        const PacParams& params) {
  return log_budget(params).value <= plan_information(plan, etas, params.epsilon());
}

/// Fewest examples a single annotator must supply for a feasible plan.
inline std::uint64_t min_samples_single(double eta, const PacParams& params) {
  const double rate = psi(eta, params.epsilon());
  return static_cast<std::uint64_t>(std::ceil(log_budget(params).value / rate));
}

/// Chernoff bound exp(-sum_i k_i (1 - 3 eta_i) / 8) on the probability that
/// a hypothesis disagreeing with the target on the k_i region samples has no
/// larger empirical loss than the target.
inline double disagreement_chernoff_bound(std::span<const std::uint64_t> ks,
                                          std::span<const double> etas) {
  detail::require_same_size(ks.size(), etas.size(), "disagreement_chernoff_bound");
  double exponent = 0.0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    detail::require_feasibility_eta(etas[i]);
    exponent += static_cast<double>(ks[i]) * (1.0 - 3.0 * etas[i]);
  }
  return std::exp(-exponent / 8.0);
}

/// prod_i [1 - eps (1 - exp(-(1 - 3 eta_i)/8))]^{m_i}, the bound on the
/// probability that an eps-bad hypothesis looks at least as good as the
/// target. Evaluated in log space.
inline double e1_upper_bound(std::span<const std::uint64_t> plan, std::span<const double> etas,
                             double epsilon) {
  detail::require_same_size(plan.size(), etas.size(), "e1_upper_bound");
  double log_bound = 0.0;
  for (std::size_t i = 0; i < plan.size(); ++i) {
    detail::require_feasibility_eta(etas[i]);
    if (plan[i] == 0) continue;
    log_bound -= static_cast<double>(plan[i]) * psi_interior(etas[i], epsilon);
  }
  return std::exp(log_bound);
}

/// Monte Carlo estimate of P(L_e(h) <= L_e(c_t)) for a hypothesis h whose
/// disagreement region with the target has mass epsilon.
///
/// Each sample from annotator i lands in the region with probability
/// epsilon; a region sample is labelled correctly (counts against h) with
/// probability 1 - eta_i, else it counts against the target. The trial is an
/// event when h's count does not exceed the target's (ties included).
inline Estimate mc_e1_probability(std::span<const std::uint64_t> plan,
                                  std::span<const double> etas, double epsilon,
                                  std::uint64_t trials, std::uint64_t seed) {
  detail::require_same_size(plan.size(), etas.size(), "mc_e1_probability");
  if (trials == 0) throw std::invalid_argument("mc_e1_probability: trials must be >= 1");
  detail::require_domain(epsilon >= 0.0 && epsilon <= 1.0,
                         "mc_e1_probability: epsilon must lie in [0, 1]");
  for (double eta : etas) detail::require_simulation_eta(eta);

  const std::uint64_t events = parallel_count(trials, [&](std::uint64_t trial) {
    Rng rng = Rng::stream(seed, trial);
    std::int64_t against_h = 0;       // leaf B
    std::int64_t against_target = 0;  // leaf A
    for (std::size_t i = 0; i < plan.size(); ++i) {
      for (std::uint64_t j = 0; j < plan[i]; ++j) {
        if (!rng.bernoulli(epsilon)) continue;
        if (rng.bernoulli(1.0 - etas[i])) {
          ++against_h;
        } else {
          ++against_target;
        }
      }
    }
    return against_h <= against_target;
  });
  return binomial_estimate(events, trials);
}

/// Monte Carlo estimate of P(Z <= sum_i k_i / 2) where Z sums k_i
/// Bernoulli(1 - eta_i) draws per annotator.
inline Estimate mc_disagreement_probability(std::span<const std::uint64_t> ks,
                                            std::span<const double> etas,
                                            std::uint64_t trials, std::uint64_t seed) {
  detail::require_same_size(ks.size(), etas.size(), "mc_disagreement_probability");
  if (trials == 0) throw std::invalid_argument("mc_disagreement_probability: trials must be >= 1");
  for (double eta : etas) detail::require_simulation_eta(eta);
  std::uint64_t total = 0;
  for (auto k : ks) total += k;

  const std::uint64_t events = parallel_count(trials, [&](std::uint64_t trial) {
    Rng rng = Rng::stream(seed, trial);
    std::uint64_t z = 0;
    for (std::size_t i = 0; i < ks.size(); ++i) {
      for (std::uint64_t j = 0; j < ks[i]; ++j) z += rng.bernoulli(1.0 - etas[i]) ? 1 : 0;
    }
    return 2 * z <= total;
  });
  return binomial_estimate(events, trials);
}

}  // namespace pacauction
