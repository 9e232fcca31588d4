#pragma once

// Property suites shared by `pacauction verify` and the acceptance runner:
// random plan instances for the rounding bounds, best-response matrices,
// and the Monte Carlo interim-rule checks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "pacauction/pacauction.hpp"

namespace pacauction::cli {

struct RoundingInstance {
  PlanProblem problem;
  double m0;  // noiseless sample complexity L / psi(0)
};

/// Random small plan instance: eps in [0.6, 0.99], N in [2, 20],
/// delta in [0.05, 0.5], 1..4 annotators with eta in [0, 0.3] (a quarter
/// exactly noiseless). Weights are a cost curve, its virtual cost under the
/// uniform prior, or arbitrary. Redrawn until every single-annotator cap is
/// at most max_cap so the exact oracle stays cheap.
inline RoundingInstance random_rounding_instance(Rng& rng, std::uint64_t max_cap = 50) {
  while (true) {
    const double eps = rng.uniform(0.6, 0.99);
    const auto concepts = static_cast<std::uint64_t>(2 + rng.uniform(0.0, 19.0));
    const double delta = rng.uniform(0.05, 0.5);
    const PacParams params(eps, delta, concepts);
    const auto n = static_cast<std::size_t>(1 + rng.uniform(0.0, 4.0));
    const CostModel cost = CostModel::exponential(rng.uniform(0.5, 3.0), rng.uniform(1.0, 40.0));
    const int flavour = static_cast<int>(rng.uniform(0.0, 3.0));

    std::vector<double> weights(n), rates(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double eta = rng.bernoulli(0.25) ? 0.0 : rng.uniform(0.0, 0.3);
      rates[i] = psi(eta, eps);
      switch (flavour) {
        case 0: weights[i] = cost.value(eta); break;
        case 1: weights[i] = virtual_cost(eta, cost, PriorModel::uniform()); break;
        default: weights[i] = rng.uniform(0.1, 10.0); break;
      }
    }
    const LogBudget budget = log_budget(params);
    PlanProblem problem(weights, rates, budget);
    bool small = true;
    for (std::size_t i = 0; i < n; ++i) small = small && problem.single_cap(i) <= max_cap;
    if (small) return {std::move(problem), budget.value / psi(0.0, eps)};
  }
}

struct StrategicProfile {
  std::size_t agent;
  double truth;
  std::vector<double> bids;  // truthful profile: bids[agent] == truth
};

/// `count` profiles of n annotators with types uniform on the bid
/// interval; the deviating agent cycles through the indices.
inline std::vector<StrategicProfile> strategic_profiles(const RegularMechanism& mech,
                                                        std::size_t count, std::size_t n,
                                                        std::uint64_t seed) {
  const auto& iv = mech.interval();
  std::vector<StrategicProfile> out;
  for (std::size_t k = 0; k < count; ++k) {
    Rng rng = Rng::stream(seed, k);
    StrategicProfile p{k % n, 0.0, std::vector<double>(n)};
    for (auto& b : p.bids) b = rng.uniform(iv.lo(), iv.hi());
    p.truth = p.bids[p.agent];
    out.push_back(std::move(p));
  }
  return out;
}

struct StrategicSummary {
  double max_regret = 0.0;
  bool ir_ok = true;
  bool pac_ok = true;
  bool premium_ok = true;  // c(q) >= c(winner's bid)
  std::size_t profiles = 0;
};

/// Runs a best-response sweep and an outcome audit on every profile.
inline StrategicSummary run_strategic_matrix(const RegularMechanism& mech,
                                             const std::vector<StrategicProfile>& profiles,
                                             std::size_t sweep_points, PaymentVariant variant) {
  StrategicSummary s;
  const auto grid = mech.interval().grid(sweep_points);
  for (const auto& p : profiles) {
    const auto r = dsic_sweep(mech, p.agent, p.truth, p.bids, grid, variant);
    s.max_regret = std::max(s.max_regret, r.regret);
    const auto out = run_auction(mech, p.bids, variant);
    const auto audit = audit_outcome(mech, out, p.bids);
    s.ir_ok = s.ir_ok && audit.ir_ok;
    s.pac_ok = s.pac_ok && audit.pac_ok;
    const std::size_t w = *out.winner;
    s.premium_ok =
        s.premium_ok && mech.cost().value(*out.critical_bid) >= mech.cost().value(p.bids[w]);
    ++s.profiles;
  }
  return s;
}

struct InterimPoint {
  double report;
  Estimate alpha;
  Estimate pi;
  double identity;  // alpha(r) c(r) - int_lo^r alpha c', from the sampled alpha curve
};

struct InterimCheck {
  std::vector<InterimPoint> points;
  double worst_monotonicity_z = 0.0;  // largest drop of alpha in units of its SE
  double worst_identity_z = 0.0;      // largest |pi - identity| in units of SE(pi)
  bool wme_ok = true;
  bool identity_ok = true;
};

/// Monte Carlo interim rules of annotator 0 out of n over `points` reports
/// spanning the bid interval, integral payment. The sampled allocation curve
///   alpha(t) = ceil(L / psi(t)) * P(score(t) <= best opponent score)
/// is rebuilt from the same opponent draws on a fine midpoint grid
/// (`cells_per_step` cells between reports) and integrated against c'.
inline InterimCheck check_interim_rules(const RegularMechanism& mech, std::size_t n,
                                        std::size_t points, std::uint64_t samples,
                                        std::uint64_t seed,
                                        std::size_t cells_per_step = 40000) {
  const auto& iv = mech.interval();
  const auto reports = iv.grid(points);

  // best opponent score of every draw, sorted
  std::vector<double> best(samples, std::numeric_limits<double>::infinity());
  parallel_for_index(samples, [&](std::uint64_t s) {
    const auto bids = draw_opponent_profile(mech, 0, n, seed, s);
    for (std::size_t j = 1; j < n; ++j) best[s] = std::min(best[s], mech.score_of(j, bids[j]));
  });
  std::sort(best.begin(), best.end());
  auto alpha_curve = [&](double t) {
    const double s = mech.score_of(0, t);
    const auto winners = static_cast<double>(best.end() - std::lower_bound(best.begin(), best.end(), s));
    return static_cast<double>(mech.allocation_for(t)) * winners / static_cast<double>(samples);
  };

  InterimCheck check;
  double integral = 0.0;  // running int_lo^r alpha c'
  for (std::size_t k = 0; k < reports.size(); ++k) {
    if (k > 0) {
      const double a = reports[k - 1];
      const double h = (reports[k] - a) / static_cast<double>(cells_per_step);
      for (std::size_t c = 0; c < cells_per_step; ++c) {
        const double mid = a + (static_cast<double>(c) + 0.5) * h;
        integral += h * alpha_curve(mid) * mech.cost().derivative(mid);
      }
    }
    const double r = reports[k];
    const auto rules = expected_rules(mech, 0, r, n, PaymentVariant::integral, samples, seed);
    const double identity = alpha_curve(r) * mech.cost().value(r) - integral;
    check.points.push_back({r, rules.alpha, rules.pi, identity});

    const double gap = std::abs(rules.pi.value - identity);
    const double z_id = rules.pi.std_error > 0 ? gap / rules.pi.std_error : (gap > 0 ? HUGE_VAL : 0);
    check.worst_identity_z = std::max(check.worst_identity_z, z_id);
    if (gap > 4.0 * rules.pi.std_error) check.identity_ok = false;

    if (k > 0) {
      const auto& prev = check.points[k - 1].alpha;
      const double drop = prev.value - rules.alpha.value;
      const double se = std::hypot(prev.std_error, rules.alpha.std_error);
      if (drop > 0) {
        check.worst_monotonicity_z =
            std::max(check.worst_monotonicity_z, se > 0 ? drop / se : HUGE_VAL);
        if (drop > 4.0 * se) check.wme_ok = false;
      }
    }
  }
  return check;
}

}  // namespace pacauction::cli
