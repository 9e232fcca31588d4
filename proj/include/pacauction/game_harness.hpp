#pragma once

// Strategic-behaviour checks for the procurement auction: ex-post
// utilities, best-response sweeps, Monte Carlo interim rules and audits.

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "pacauction/mechanism.hpp"
#include "pacauction/parallel.hpp"
#include "pacauction/rng.hpp"
#include "pacauction/stats.hpp"

namespace pacauction {

struct UtilityRecord {
  double reported;
  double truth;
  double utility;  // payment - allocation * c(truth)
  std::uint64_t allocation;
  double payment;
};

struct IncentiveReport {
  std::size_t agent;
  double truth;
  double best_report;
  double regret;  // max over the sweep (truth included) of u(report) - u(truth)
  std::size_t grid_size;
};

/// Annotator i's ex-post utility when the profile `bids` is submitted and
/// its true noise rate is `truth`.
inline UtilityRecord utility(const RegularMechanism& mech, std::span<const double> bids,
                             std::size_t i, double truth, PaymentVariant variant) {
  if (i >= bids.size()) throw DimensionMismatch("utility: annotator out of range");
  const auto out = run_auction(mech, bids, variant);
  const double pay = out.payments[i];
  const std::uint64_t alloc = out.allocation[i];
  return {bids[i], truth, pay - static_cast<double>(alloc) * mech.cost().value(truth), alloc, pay};
}

/// Best-response sweep for annotator i with truth fixed and the others'
/// bids held at `profile` (entry i is overwritten by each report).
inline IncentiveReport dsic_sweep(const RegularMechanism& mech, std::size_t i, double truth,
                                  std::span<const double> profile, std::span<const double> grid,
                                  PaymentVariant variant) {
  std::vector<double> bids(profile.begin(), profile.end());
  if (i >= bids.size()) throw DimensionMismatch("dsic_sweep: annotator out of range");
  bids[i] = truth;
  const double honest = utility(mech, bids, i, truth, variant).utility;

  IncentiveReport report{i, truth, truth, 0.0, grid.size()};
  for (double r : grid) {
    bids[i] = r;
    const double gain = utility(mech, bids, i, truth, variant).utility - honest;
    if (gain > report.regret) {
      report.regret = gain;
      report.best_report = r;
    }
  }
  return report;
}

/// Opponent types for Monte Carlo sample s: every j != i draws from its
/// prior conditioned on the bid interval; entry i is left at lo().
inline std::vector<double> draw_opponent_profile(const RegularMechanism& mech, std::size_t i,
                                                 std::size_t n, std::uint64_t seed,
                                                 std::uint64_t sample) {
  const auto& iv = mech.interval();
  Rng rng = Rng::stream(seed, sample);
  std::vector<double> bids(n, iv.lo());
  for (std::size_t j = 0; j < n; ++j) {
    if (j == i) continue;
    const auto& prior = mech.prior_for(j);
    const double f_lo = prior.cdf(iv.lo());
    const double f_hi = prior.cdf(iv.hi());
    const double eta = prior.quantile(f_lo + (f_hi - f_lo) * rng.uniform());
    bids[j] = std::clamp(eta, iv.lo(), iv.hi());
  }
  return bids;
}

struct ExpectedRules {
  Estimate alpha;  // expected allocation
  Estimate pi;     // expected payment
};

/// Interim allocation and payment of annotator i (one of n) reporting
/// `report`, averaging over opponents drawn by draw_opponent_profile.
inline ExpectedRules expected_rules(const RegularMechanism& mech, std::size_t i, double report,
                                    std::size_t n, PaymentVariant variant, std::uint64_t samples,
                                    std::uint64_t seed) {
  if (samples == 0) throw std::invalid_argument("expected_rules: samples must be >= 1");
  if (i >= n) throw DimensionMismatch("expected_rules: annotator out of range");
  std::vector<double> alloc(samples), pay(samples);
  parallel_for_index(samples, [&](std::uint64_t s) {
    auto bids = draw_opponent_profile(mech, i, n, seed, s);
    bids[i] = report;
    const auto out = run_auction(mech, bids, variant);
    alloc[s] = static_cast<double>(out.allocation[i]);
    pay[s] = out.payments[i];
  });
  return {mean_estimate(alloc), mean_estimate(pay)};
}

struct BicReport {
  double truth;
  double best_report;
  Estimate regret;  // expected utility gain of best_report over truth
};

/// Bayesian best-response sweep on interim utility
///   U(r; truth) = pi(r) - alpha(r) c(truth),
/// using common opponent samples for every report. The regret estimate
/// carries the standard error of the paired difference.
inline BicReport bic_sweep(const RegularMechanism& mech, std::size_t i, double truth,
                           std::size_t n, std::span<const double> grid, PaymentVariant variant,
                           std::uint64_t samples, std::uint64_t seed) {
  if (samples == 0) throw std::invalid_argument("bic_sweep: samples must be >= 1");
  const double c_truth = mech.cost().value(truth);
  auto utilities = [&](double report) {
    std::vector<double> u(samples);
    parallel_for_index(samples, [&](std::uint64_t s) {
      auto bids = draw_opponent_profile(mech, i, n, seed, s);
      bids[i] = report;
      const auto out = run_auction(mech, bids, variant);
      u[s] = out.payments[i] - static_cast<double>(out.allocation[i]) * c_truth;
    });
    return u;
  };
  const auto honest = utilities(truth);
  BicReport report{truth, truth, {0.0, 0.0}};
  std::vector<double> diff(samples);
  for (double r : grid) {
    const auto u = utilities(r);
    for (std::uint64_t s = 0; s < samples; ++s) diff[s] = u[s] - honest[s];
    const auto gain = mean_estimate(diff);
    if (gain.value > report.regret.value) {
      report.regret = gain;
      report.best_report = r;
    }
  }
  return report;
}

struct OutcomeAudit {
  bool ir_ok;
  bool pac_ok;
};

/// Ex-post individual rationality (every truthful annotator's utility is
/// >= -1e-12) and PAC compatibility (the allocation is feasible at the
/// reported rates) of an auction outcome.
inline OutcomeAudit audit_outcome(const RegularMechanism& mech, const AuctionOutcome& outcome,
                                  std::span<const double> bids) {
  detail::require_same_size(outcome.allocation.size(), bids.size(), "audit_outcome allocation");
  detail::require_same_size(outcome.payments.size(), bids.size(), "audit_outcome payments");
  OutcomeAudit audit{true, true};
  for (std::size_t i = 0; i < bids.size(); ++i) {
    const double u = outcome.payments[i] -
                     static_cast<double>(outcome.allocation[i]) * mech.cost().value(bids[i]);
    if (u < -1e-12) audit.ir_ok = false;
  }
  audit.pac_ok = is_feasible(outcome.allocation, bids, mech.params());
  return audit;
}

}  // namespace pacauction
