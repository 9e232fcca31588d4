#pragma once

// Desk-scale PAC experiments: threshold concepts on a finite line, noisy
// multi-annotator data, the minimum disagreement learner and an empirical
// failure-rate estimator.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "pacauction/errors.hpp"
#include "pacauction/pac_core.hpp"
#include "pacauction/parallel.hpp"
#include "pacauction/rng.hpp"
#include "pacauction/stats.hpp"

namespace pacauction {

// Index of a threshold concept: concept t labels x positive iff x < t.
using ConceptIndex = std::size_t;

/// Threshold concepts on the instance space {0, ..., K-1}; there are K + 1
/// distinct concepts t = 0..K.
class ThresholdConceptClass {
 public:
  explicit ThresholdConceptClass(std::size_t domain_size) : domain_size_(domain_size) {
    detail::require_domain(domain_size >= 1, "ThresholdConceptClass: domain_size must be >= 1");
  }

  std::size_t domain_size() const noexcept { return domain_size_; }
  std::size_t concept_count() const noexcept { return domain_size_ + 1; }

  static constexpr bool label(ConceptIndex t, std::size_t x) noexcept { return x < t; }

 private:
  std::size_t domain_size_;
};

/// Probability vector over the instance space.
class SamplingDistribution {
 public:
  explicit SamplingDistribution(std::vector<double> weights) : weights_(std::move(weights)) {
    detail::require_domain(!weights_.empty(), "SamplingDistribution: empty weight vector");
    cumulative_.reserve(weights_.size() + 1);
    cumulative_.push_back(0.0);
    for (double w : weights_) {
      detail::require_domain(w >= 0.0 && std::isfinite(w),
                             "SamplingDistribution: weights must be finite and non-negative");
      cumulative_.push_back(cumulative_.back() + w);
    }
    detail::require_domain(std::abs(cumulative_.back() - 1.0) <= 1e-12,
                           "SamplingDistribution: weights must sum to 1");
  }

  static SamplingDistribution uniform(std::size_t domain_size) {
    detail::require_domain(domain_size >= 1, "SamplingDistribution: domain_size must be >= 1");
    return SamplingDistribution(
        std::vector<double>(domain_size, 1.0 / static_cast<double>(domain_size)));
  }

  std::size_t size() const noexcept { return weights_.size(); }
  std::span<const double> weights() const noexcept { return weights_; }

  // Mass of {x : lo <= x < hi}.
  double mass(std::size_t lo, std::size_t hi) const {
    if (hi <= lo) return 0.0;
    hi = std::min(hi, weights_.size());
    double total = 0.0;
    for (std::size_t x = lo; x < hi; ++x) total += weights_[x];
    return total;
  }

  // Inverse-cdf draw; zero-weight points are never returned.
  std::size_t sample(Rng& rng) const {
    const double u = rng.uniform() * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin() + 1, cumulative_.end(), u);
    std::size_t x = static_cast<std::size_t>(it - cumulative_.begin()) - 1;
    x = std::min(x, weights_.size() - 1);
    while (weights_[x] == 0.0 && x > 0) --x;
    return x;
  }

 private:
  std::vector<double> weights_;
  std::vector<double> cumulative_;
};

struct LabeledExample {
  std::size_t x;
  bool y;
  std::size_t annotator;
};

struct TrialReport {
  ConceptIndex chosen_hypothesis;
  double true_error;
  bool is_eps_bad;
};

/// Draws m_i examples from each annotator i: x ~ dist, label = target(x)
/// flipped independently with probability eta_i. Annotator i uses its own
/// stream keyed by (seed, i).
inline std::vector<LabeledExample> sample_dataset(std::span<const std::uint64_t> plan,
                                                  std::span<const double> etas,
                                                  ConceptIndex target,
                                                  const SamplingDistribution& dist,
                                                  std::uint64_t seed) {
  detail::require_same_size(plan.size(), etas.size(), "sample_dataset");
  for (double eta : etas) detail::require_simulation_eta(eta);
  detail::require_domain(target <= dist.size(), "sample_dataset: target outside concept class");

  std::uint64_t total = 0;
  for (auto m : plan) total += m;
  std::vector<LabeledExample> data;
  data.reserve(total);
  for (std::size_t i = 0; i < plan.size(); ++i) {
    Rng rng = Rng::stream(seed, i);
    for (std::uint64_t j = 0; j < plan[i]; ++j) {
      const std::size_t x = dist.sample(rng);
      const bool clean = ThresholdConceptClass::label(target, x);
      const bool flip = rng.bernoulli(etas[i]);
      data.push_back({x, clean != flip, i});
    }
  }
  return data;
}

// Number of examples on which concept h disagrees with the given label.
inline std::uint64_t empirical_loss(std::span<const LabeledExample> data, ConceptIndex h) {
  std::uint64_t loss = 0;
  for (const auto& ex : data) loss += (ThresholdConceptClass::label(h, ex.x) != ex.y) ? 1 : 0;
  return loss;
}

/// Minimum disagreement learner over all K + 1 thresholds, smallest index on
/// ties. Runs in O(K + |data|) via a running loss:
///   loss(t + 1) = loss(t) + #{x = t, y = 0} - #{x = t, y = 1}.
inline ConceptIndex mda(std::span<const LabeledExample> data, const ThresholdConceptClass& cls) {
  const std::size_t k = cls.domain_size();
  std::vector<std::int64_t> delta(k, 0);
  std::int64_t loss = 0;  // loss of threshold 0: every positive label is an error
  for (const auto& ex : data) {
    detail::require_domain(ex.x < k, "mda: instance outside the domain");
    if (ex.y) {
      ++loss;
      --delta[ex.x];
    } else {
      ++delta[ex.x];
    }
  }
  ConceptIndex best = 0;
  std::int64_t best_loss = loss;
  for (std::size_t t = 0; t < k; ++t) {
    loss += delta[t];
    if (loss < best_loss) {
      best_loss = loss;
      best = t + 1;
    }
  }
  return best;
}

/// Exact D-mass of the symmetric difference between thresholds h and target.
inline double true_error(ConceptIndex h, ConceptIndex target, const SamplingDistribution& dist) {
  detail::require_domain(h <= dist.size() && target <= dist.size(),
                         "true_error: concept index outside the class");
  return dist.mass(std::min(h, target), std::max(h, target));
}

inline TrialReport run_trial(std::span<const std::uint64_t> plan, std::span<const double> etas,
                             double epsilon, ConceptIndex target,
                             const SamplingDistribution& dist, std::uint64_t seed) {
  const ThresholdConceptClass cls(dist.size());
  const auto data = sample_dataset(plan, etas, target, dist, seed);
  const ConceptIndex h = mda(data, cls);
  const double err = true_error(h, target, dist);
  return {h, err, err > epsilon};
}

/// Fraction of independent sample -> learn -> evaluate pipelines that end
/// with an eps-bad hypothesis. Trial k draws its data with seed
/// Rng::stream(seed, k)().
inline Estimate estimate_failure_rate(std::span<const std::uint64_t> plan,
                                      std::span<const double> etas, const PacParams& params,
                                      ConceptIndex target, const SamplingDistribution& dist,
                                      std::uint64_t trials, std::uint64_t seed) {
  if (trials == 0) throw std::invalid_argument("estimate_failure_rate: trials must be >= 1");
  if (params.concept_count() != dist.size() + 1) {
    throw DimensionMismatch("estimate_failure_rate: concept_count " +
                            std::to_string(params.concept_count()) +
                            " does not match domain size " + std::to_string(dist.size()) +
                            " + 1");
  }
  detail::require_same_size(plan.size(), etas.size(), "estimate_failure_rate");
  for (double eta : etas) detail::require_simulation_eta(eta);
  detail::require_domain(target <= dist.size(), "estimate_failure_rate: target outside class");

  const std::uint64_t bad = parallel_count(trials, [&](std::uint64_t trial) {
    const std::uint64_t trial_seed = Rng::stream(seed, trial)();
    return run_trial(plan, etas, params.epsilon(), target, dist, trial_seed).is_eps_bad;
  });
  return binomial_estimate(bad, trials);
}

}  // namespace pacauction
