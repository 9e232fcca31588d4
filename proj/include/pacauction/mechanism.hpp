#pragma once

// Procurement auction for a feasible annotation plan when noise rates are
// private. Annotators bid noise rates; the single annotator with the lowest
// score v(eta)/psi(eta) supplies ceil(L / psi(bid)) examples, where v is the
// virtual cost
//   v(eta) = c(eta) - (1 - Phi(eta)) / phi(eta) * c'(eta).
// The winner is paid either by the integral rule
//   p = a(bid) c(bid) - int_{lo}^{bid} a(t) c'(t) dt
// or by the critical-price rule p = a(bid) c(q), q being the lowest winning bid.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pacauction/errors.hpp"
#include "pacauction/models.hpp"
#include "pacauction/pac_core.hpp"

namespace pacauction {

/// Closed interval of admissible bids, strictly inside (0, 1/3).
class BidInterval {
 public:
  BidInterval(double lo, double hi) : lo_(lo), hi_(hi) {
    detail::require_domain(lo > 0.0 && lo < hi && hi < kOneThird,
                           "bid interval must satisfy 0 < lo < hi < 1/3");
  }

  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  bool contains(double eta) const noexcept { return eta >= lo_ && eta <= hi_; }

  // Uniform grid of `points` values including both endpoints.
  std::vector<double> grid(std::size_t points) const {
    if (points == 0) return {};
    if (points == 1) return {lo_};
    std::vector<double> g(points);
    for (std::size_t j = 0; j < points; ++j) {
      g[j] = lo_ + (hi_ - lo_) * static_cast<double>(j) / static_cast<double>(points - 1);
    }
    g.back() = hi_;
    return g;
  }

 private:
  double lo_;
  double hi_;
};

inline double virtual_cost(double eta, const CostModel& cost, const PriorModel& prior) {
  const double density = prior.density(eta);
  if (!(density > 0.0)) {
    throw DomainError("virtual_cost: prior density vanishes at eta = " + std::to_string(eta));
  }
  return cost.value(eta) - (1.0 - prior.cdf(eta)) / density * cost.derivative(eta);
}

/// Virtual cost per unit of information, v(eta) / psi_interior(eta).
inline double score(double eta, const CostModel& cost, const PriorModel& prior, double epsilon) {
  detail::require_domain(eta > 0.0 && eta < kOneThird, "score: eta must lie in (0, 1/3)");
  return virtual_cost(eta, cost, prior) / psi_interior(eta, epsilon);
}

/// Inverse of psi_interior in eta:
///   eta = (1 + 8 ln(1 - (1 - e^{-s}) / eps)) / 3.
inline double psi_inverse(double s, double epsilon) {
  detail::require_epsilon(epsilon);
  detail::require_domain(s > 0.0, "psi_inverse: rate must be positive");
  const double inner = -std::expm1(-s) / epsilon;
  detail::require_domain(inner < 1.0, "psi_inverse: rate above the noiseless limit");
  const double eta = (1.0 + 8.0 * std::log1p(-inner)) / 3.0;
  detail::require_domain(eta >= 0.0 && eta < kOneThird,
                         "psi_inverse: rate outside the attainable range");
  return eta;
}

struct RegularityReport {
  bool is_regular = true;
  double max_violation = 0.0;
  std::optional<double> violating_eta;
};

/// Checks that the score is non-increasing along a uniform grid of the bid
/// interval (1e-9 absolute slack between neighbours). Reports the largest
/// increase and the grid point where it ends.
inline RegularityReport check_regularity(const CostModel& cost, const PriorModel& prior,
                                         double epsilon, const BidInterval& interval,
                                         std::size_t grid_points) {
  RegularityReport report;
  const auto grid = interval.grid(grid_points);
  if (grid.size() < 2) return report;
  double previous = score(grid[0], cost, prior, epsilon);
  for (std::size_t j = 1; j < grid.size(); ++j) {
    const double current = score(grid[j], cost, prior, epsilon);
    const double increase = current - previous;
    if (increase > 1e-9) {
      report.is_regular = false;
      if (increase > report.max_violation) {
        report.max_violation = increase;
        report.violating_eta = grid[j];
      }
    }
    previous = current;
  }
  return report;
}

enum class PaymentVariant { integral, critical_price };

inline const char* to_string(PaymentVariant v) {
  return v == PaymentVariant::integral ? "integral" : "critical_price";
}

struct MechanismConfig {
  PacParams params;
  CostModel cost;
  // One shared prior, or one per annotator.
  std::vector<PriorModel> priors;
  BidInterval interval;
};

/// A mechanism configuration whose score is known (or declared) to be
/// non-increasing on the bid interval. Every allocation and payment routine
/// requires one.
class RegularMechanism {
 public:
  static constexpr std::size_t kDefaultGrid = 1000;

  // Runs check_regularity for every prior; throws RegularityError on failure.
  static RegularMechanism certify(MechanismConfig config, std::size_t grid_points = kDefaultGrid) {
    RegularMechanism m(std::move(config));
    for (const auto& prior : m.config_.priors) {
      auto report = check_regularity(m.config_.cost, prior, m.config_.params.epsilon(),
                                     m.config_.interval, grid_points);
      if (!report.is_regular) {
        throw RegularityError("score is not non-increasing on the bid interval (violation " +
                              std::to_string(report.max_violation) + " at eta = " +
                              std::to_string(*report.violating_eta) + ")");
      }
    }
    m.certified_ = true;
    return m;
  }

  // Skips the check. Allocation may then fail to be monotone.
  static RegularMechanism assume_regular(MechanismConfig config) {
    return RegularMechanism(std::move(config));
  }

  const MechanismConfig& config() const noexcept { return config_; }
  const PacParams& params() const noexcept { return config_.params; }
  const CostModel& cost() const noexcept { return config_.cost; }
  const BidInterval& interval() const noexcept { return config_.interval; }
  double epsilon() const noexcept { return config_.params.epsilon(); }
  bool certified() const noexcept { return certified_; }

  const PriorModel& prior_for(std::size_t annotator) const {
    if (config_.priors.size() == 1) return config_.priors.front();
    if (annotator >= config_.priors.size()) {
      throw DimensionMismatch("no prior configured for annotator " + std::to_string(annotator));
    }
    return config_.priors[annotator];
  }

  double score_of(std::size_t annotator, double bid) const {
    return score(bid, config_.cost, prior_for(annotator), epsilon());
  }

  // ceil(L / psi(eta)), the contract size for a winner bidding eta.
  std::uint64_t allocation_for(double eta) const {
    const double budget = log_budget(config_.params).value;
    const double rate = psi(eta, epsilon());
    auto a = static_cast<std::uint64_t>(std::ceil(budget / rate));
    while (static_cast<double>(a) * rate < budget) ++a;
    return a;
  }

  // Sum of c(t_k) over the edges t_k where the allocation steps from k to
  // k + 1, for from <= k < to. Both levels must be reachable on the interval.
  double edge_cost_sum(std::uint64_t from, std::uint64_t to) const {
    if (to <= from) return 0.0;
    detail::require_domain(from >= level_base_ && to - level_base_ < edge_cost_prefix_.size(),
                           "edge_cost_sum: level outside the bid interval");
    return edge_cost_prefix_[to - level_base_] - edge_cost_prefix_[from - level_base_];
  }

  void check_profile(std::span<const double> bids) const {
    if (bids.empty()) throw std::invalid_argument("bid profile is empty");
    if (config_.priors.size() != 1 && config_.priors.size() != bids.size()) {
      throw DimensionMismatch("bid profile has " + std::to_string(bids.size()) +
                              " entries but " + std::to_string(config_.priors.size()) +
                              " priors are configured");
    }
    for (double b : bids) {
      detail::require_domain(config_.interval.contains(b),
                             "bid " + std::to_string(b) + " outside the bid interval");
    }
  }

 private:
  explicit RegularMechanism(MechanismConfig config) : config_(std::move(config)) {
    if (config_.priors.empty()) throw std::invalid_argument("mechanism needs at least one prior");
    // virtual costs are only evaluated on the bid interval
    for (const auto& prior : config_.priors) {
      for (double eta : config_.interval.grid(64)) {
        detail::require_domain(prior.density(eta) > 0.0,
                               "prior density must be positive on the bid interval");
      }
    }
    // c at every staircase edge the interval can reach, as prefix sums
    level_base_ = allocation_for(config_.interval.lo());
    const std::uint64_t top = allocation_for(config_.interval.hi());
    edge_cost_prefix_.assign(1, 0.0);
    edge_cost_prefix_.reserve(top - level_base_ + 1);
    for (std::uint64_t level = level_base_; level < top; ++level) {
      edge_cost_prefix_.push_back(edge_cost_prefix_.back() + edge_cost(level));
    }
  }

  double edge_cost(std::uint64_t level) const {
    const double budget = log_budget(config_.params).value;
    const double edge = psi_inverse(budget / static_cast<double>(level), epsilon());
    return config_.cost.value(std::clamp(edge, config_.interval.lo(), config_.interval.hi()));
  }

  MechanismConfig config_;
  bool certified_ = false;
  std::uint64_t level_base_ = 0;
  std::vector<double> edge_cost_prefix_;
};

/// Lowest bid in the interval with which `annotator` still matches the best
/// competing score, found by bisection down to adjacent doubles. Empty when
/// the annotator loses even at the top of the interval.
inline std::optional<double> critical_bid_against(const RegularMechanism& mech,
                                                  std::size_t annotator, double best_other) {
  const auto& iv = mech.interval();
  auto wins = [&](double eta) { return mech.score_of(annotator, eta) <= best_other; };
  if (wins(iv.lo())) return iv.lo();
  if (!wins(iv.hi())) return std::nullopt;
  double losing = iv.lo();
  double winning = iv.hi();
  while (true) {
    const double mid = 0.5 * (losing + winning);
    if (mid <= losing || mid >= winning) break;
    if (wins(mid)) winning = mid; else losing = mid;
  }
  return winning;
}

/// Critical bid of `annotator` given the other entries of `bids` (its own
/// entry is ignored). Equals lo() when there are no competitors.
inline std::optional<double> critical_bid(const RegularMechanism& mech, std::size_t annotator,
                                          std::span<const double> bids) {
  if (annotator >= bids.size()) throw DimensionMismatch("critical_bid: annotator out of range");
  double best_other = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < bids.size(); ++j) {
    if (j == annotator) continue;
    best_other = std::min(best_other, mech.score_of(j, bids[j]));
  }
  return critical_bid_against(mech, annotator, best_other);
}

/// Integral payment of a winner with critical bid q and report `bid`,
///   a(bid) c(bid) - int_q^bid a(t) c'(t) dt,
/// for the staircase a(t) = ceil(L / psi(t)). Summing by parts leaves
///   a(q) c(q) + sum of c(t_k) over the edges t_k in (q, bid],
/// where t_k solves L / psi(t) = k.
inline double staircase_payment(const RegularMechanism& mech, double q, double bid) {
  const auto& iv = mech.interval();
  detail::require_domain(iv.contains(q) && iv.contains(bid),
                         "staircase_payment: arguments outside the bid interval");
  if (bid <= q) return static_cast<double>(mech.allocation_for(bid)) * mech.cost().value(bid);
  const std::uint64_t base = mech.allocation_for(q);
  return static_cast<double>(base) * mech.cost().value(q) +
         mech.edge_cost_sum(base, mech.allocation_for(bid));
}

struct AuctionOutcome {
  std::optional<std::size_t> winner;
  AnnotationPlan allocation;
  std::vector<double> payments;
  std::optional<double> critical_bid;
  PaymentVariant payment_variant;
};

inline std::optional<std::size_t> select_winner(const RegularMechanism& mech,
                                                std::span<const double> bids) {
  std::optional<std::size_t> best;
  double best_score = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < bids.size(); ++i) {
    const double s = mech.score_of(i, bids[i]);
    if (!best || s < best_score) {
      best = i;
      best_score = s;
    }
  }
  return best;
}

/// Payment vector for a decided outcome under the critical-price rule.
inline std::vector<double> critical_price_payment(const RegularMechanism& mech,
                                                  const AuctionOutcome& outcome) {
  std::vector<double> pay(outcome.allocation.size(), 0.0);
  if (!outcome.winner) return pay;
  if (!outcome.critical_bid) {
    throw std::logic_error("critical_price_payment: winner without a critical bid");
  }
  const std::size_t w = *outcome.winner;
  pay[w] = static_cast<double>(outcome.allocation[w]) * mech.cost().value(*outcome.critical_bid);
  return pay;
}

/// Integral payment to annotator i under profile `bids`; zero for losers.
inline double integral_payment(const RegularMechanism& mech, std::size_t i,
                               std::span<const double> bids) {
  mech.check_profile(bids);
  if (select_winner(mech, bids) != i) return 0.0;
  const auto q = critical_bid(mech, i, bids);
  if (!q) throw std::logic_error("integral_payment: winner without a critical bid");
  return staircase_payment(mech, std::min(*q, bids[i]), bids[i]);
}

/// Minimum allocation rule: the lowest-score annotator (smallest index on
/// ties) supplies ceil(L / psi(bid)) examples; everyone else gets nothing.
inline AuctionOutcome run_auction(const RegularMechanism& mech, std::span<const double> bids,
                                  PaymentVariant variant) {
  mech.check_profile(bids);
  AuctionOutcome out;
  out.payment_variant = variant;
  out.allocation.assign(bids.size(), 0);
  out.payments.assign(bids.size(), 0.0);
  out.winner = select_winner(mech, bids);
  const std::size_t w = *out.winner;
  out.allocation[w] = mech.allocation_for(bids[w]);
  const auto q = critical_bid(mech, w, bids);
  if (!q) throw std::logic_error("run_auction: winner cannot win at the top of the interval");
  out.critical_bid = std::min(*q, bids[w]);
  if (variant == PaymentVariant::critical_price) {
    out.payments = critical_price_payment(mech, out);
  } else {
    out.payments[w] = staircase_payment(mech, *out.critical_bid, bids[w]);
  }
  return out;
}

}  // namespace pacauction
