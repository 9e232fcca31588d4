#pragma once

// Cost-optimal annotation plans with known noise rates:
//   minimise sum_i w_i m_i  subject to  sum_i m_i r_i >= L,  m_i in N_0
// where r_i = psi(eta_i) and w_i is a per-example cost (true or virtual).

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "pacauction/errors.hpp"
#include "pacauction/pac_core.hpp"

namespace pacauction {

class PlanProblem {
 public:
  PlanProblem(std::vector<double> weights, std::vector<double> rates, LogBudget budget)
      : weights_(std::move(weights)), rates_(std::move(rates)), budget_(budget) {
    detail::require_same_size(weights_.size(), rates_.size(), "PlanProblem");
    if (weights_.empty()) throw std::invalid_argument("PlanProblem: no annotators");
    for (std::size_t i = 0; i < weights_.size(); ++i) {
      detail::require_domain(weights_[i] > 0.0 && std::isfinite(weights_[i]),
                             "PlanProblem: weights must be positive");
      detail::require_domain(rates_[i] > 0.0 && std::isfinite(rates_[i]),
                             "PlanProblem: rates must be positive");
    }
    detail::require_domain(budget_.value > 0.0, "PlanProblem: budget must be positive");
  }

  std::size_t size() const noexcept { return weights_.size(); }
  const std::vector<double>& weights() const noexcept { return weights_; }
  const std::vector<double>& rates() const noexcept { return rates_; }
  LogBudget budget() const noexcept { return budget_; }

  // Sum of plan_i * rate_i in index order; the feasibility test everywhere.
  double information(const AnnotationPlan& plan) const {
    detail::require_same_size(plan.size(), size(), "PlanProblem::information");
    double total = 0.0;
    for (std::size_t i = 0; i < plan.size(); ++i) total += static_cast<double>(plan[i]) * rates_[i];
    return total;
  }

  bool feasible(const AnnotationPlan& plan) const { return information(plan) >= budget_.value; }

  double objective(const AnnotationPlan& plan) const {
    detail::require_same_size(plan.size(), size(), "PlanProblem::objective");
    double total = 0.0;
    for (std::size_t i = 0; i < plan.size(); ++i) total += static_cast<double>(plan[i]) * weights_[i];
    return total;
  }

  // Fewest examples from annotator i alone that make the plan feasible.
  std::uint64_t single_cap(std::size_t i) const {
    auto m = static_cast<std::uint64_t>(std::ceil(budget_.value / rates_[i]));
    while (static_cast<double>(m) * rates_[i] < budget_.value) ++m;
    return m;
  }

 private:
  std::vector<double> weights_;
  std::vector<double> rates_;
  LogBudget budget_;
};

enum class SolveMethod { lp_round, exact };

inline const char* to_string(SolveMethod m) {
  return m == SolveMethod::lp_round ? "lp-round" : "exact";
}

struct PlanSolution {
  AnnotationPlan plan;
  double objective;
  SolveMethod method;
};

// Annotator with the smallest weight/rate ratio; smallest index on ties.
inline std::size_t min_ratio_annotator(const PlanProblem& problem) {
  std::size_t best = 0;
  double best_ratio = problem.weights()[0] / problem.rates()[0];
  for (std::size_t i = 1; i < problem.size(); ++i) {
    const double ratio = problem.weights()[i] / problem.rates()[i];
    if (ratio < best_ratio) {
      best_ratio = ratio;
      best = i;
    }
  }
  return best;
}

/// The LP relaxation puts all mass on the min-ratio annotator; round its
/// count up so the plan stays feasible.
inline PlanSolution solve_lp_round(const PlanProblem& problem) {
  const std::size_t winner = min_ratio_annotator(problem);
  AnnotationPlan plan(problem.size(), 0);
  plan[winner] = problem.single_cap(winner);
  return {plan, problem.objective(plan), SolveMethod::lp_round};
}

inline constexpr double kExactEnumerationBudget = 1e7;

namespace detail {

class ExactSearch {
 public:
  ExactSearch(const PlanProblem& problem, const std::vector<std::uint64_t>& caps)
      : problem_(problem), caps_(caps), current_(problem.size(), 0) {
    // best remaining cost per unit information over suffixes, for the LP bound
    suffix_ratio_.assign(problem.size() + 1, std::numeric_limits<double>::infinity());
    for (std::size_t i = problem.size(); i-- > 0;) {
      suffix_ratio_[i] =
          std::min(suffix_ratio_[i + 1], problem.weights()[i] / problem.rates()[i]);
    }
  }

  std::optional<PlanSolution> run() {
    descend(0, 0.0, 0.0);
    if (!best_plan_) return std::nullopt;
    return PlanSolution{*best_plan_, best_objective_, SolveMethod::exact};
  }

 private:
  // Plans are visited in lexicographic order and the incumbent is replaced
  // only on strict improvement, so ties resolve to the lexicographically
  // smallest plan.
  void descend(std::size_t index, double info, double cost) {
    const double budget = problem_.budget().value;
    if (info >= budget) {
      consider();
      return;
    }
    if (index == problem_.size()) return;
    const double lower = cost + (budget - info) * suffix_ratio_[index];
    if (best_plan_ && lower > best_objective_ * (1.0 + 1e-12)) return;

    const double rate = problem_.rates()[index];
    const double weight = problem_.weights()[index];
    for (std::uint64_t m = 0; m <= caps_[index]; ++m) {
      const double next_info = info + static_cast<double>(m) * rate;
      const double next_cost = cost + static_cast<double>(m) * weight;
      if (best_plan_ && next_cost > best_objective_) break;
      current_[index] = m;
      descend(index + 1, next_info, next_cost);
      // more of this annotator only adds cost once the plan is feasible
      if (next_info >= budget) break;
    }
    current_[index] = 0;
  }

  void consider() {
    // recompute from scratch so the stored objective matches PlanProblem
    const double objective = problem_.objective(current_);
    if (!problem_.feasible(current_)) return;
    if (!best_plan_ || objective < best_objective_) {
      best_plan_ = current_;
      best_objective_ = objective;
    }
  }

  const PlanProblem& problem_;
  const std::vector<std::uint64_t>& caps_;
  std::vector<double> suffix_ratio_;
  AnnotationPlan current_;
  std::optional<AnnotationPlan> best_plan_;
  double best_objective_ = std::numeric_limits<double>::infinity();
};

}  // namespace detail

/// Exact integer optimum by bounded enumeration with branch-and-bound.
/// Default caps are the single-annotator counts, so at least one plan is
/// always feasible. Throws BudgetExceeded when prod(cap_i + 1) > 1e7.
inline PlanSolution solve_exact(const PlanProblem& problem,
                                std::optional<std::vector<std::uint64_t>> caps = std::nullopt) {
  std::vector<std::uint64_t> bounds;
  if (caps) {
    detail::require_same_size(caps->size(), problem.size(), "solve_exact caps");
    bounds = *caps;
  } else {
    bounds.reserve(problem.size());
    for (std::size_t i = 0; i < problem.size(); ++i) bounds.push_back(problem.single_cap(i));
  }
  double volume = 1.0;
  for (auto c : bounds) volume *= static_cast<double>(c) + 1.0;
  if (volume > kExactEnumerationBudget) {
    throw BudgetExceeded("solve_exact: enumeration volume " + std::to_string(volume) +
                         " exceeds budget");
  }
  auto solution = detail::ExactSearch(problem, bounds).run();
  if (!solution) throw DomainError("solve_exact: no feasible plan within caps");
  return *solution;
}

struct RoundingBoundReport {
  double alg;
  double opt;
  std::size_t winner;
  double winner_weight;
  bool additive_ok;
  // Whether L / r_{winner} >= m0 (m0 >= 1), the premise under which the
  // multiplicative bound is claimed.
  bool multiplicative_premise;
  // alg <= opt (1 + 1/m0); only meaningful when the premise holds.
  bool multiplicative_ok;
};

/// Compares the min-ratio rounding heuristic with the exact optimum:
///   alg <= opt + w_winner,  and  alg <= opt (1 + 1/m0)  under the premise.
/// m0 is the noiseless sample complexity ln(N/delta) / -ln(1 - eps), which
/// may be passed unrounded.
inline RoundingBoundReport verify_rounding_bounds(const PlanProblem& problem, double m0) {
  const auto heuristic = solve_lp_round(problem);
  const auto exact = solve_exact(problem);
  const std::size_t winner = min_ratio_annotator(problem);
  const double w = problem.weights()[winner];

  RoundingBoundReport report{};
  report.alg = heuristic.objective;
  report.opt = exact.objective;
  report.winner = winner;
  report.winner_weight = w;
  report.additive_ok = report.alg <= report.opt + w;
  report.multiplicative_premise =
      m0 >= 1.0 && problem.budget().value / problem.rates()[winner] >= m0;
  report.multiplicative_ok = report.alg <= report.opt * (1.0 + 1.0 / m0);
  return report;
}

}  // namespace pacauction
