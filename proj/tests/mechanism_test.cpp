#include "pacauction/mechanism.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

namespace pacauction {
namespace {

constexpr double kScoreTenth = 47.34069932519886633732;
constexpr double kScoreFifth = 2.535035436417572402683;
constexpr double kVirtualFifth = 0.01239376088333179211523;

MechanismConfig exponential_config(double scale = 1.0) {
  return {PacParams(0.1, 0.05, 100), CostModel::exponential(scale, 30.0), {PriorModel::uniform()},
          BidInterval(0.05, 0.30)};
}

MechanismConfig linear_config() {
  return {PacParams(0.1, 0.05, 100), CostModel::linear(1.0, 1.0), {PriorModel::uniform()},
          BidInterval(0.05, 0.30)};
}

// Trapezoid rule for the integral payment, building the allocation from
// the winning condition and ceil(L / psi) directly.
double trapezoid_payment(const RegularMechanism& mech, std::size_t i,
                         const std::vector<double>& bids, int points) {
  double best_other = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < bids.size(); ++j) {
    if (j != i) best_other = std::min(best_other, mech.score_of(j, bids[j]));
  }
  const double budget = log_budget(mech.params()).value;
  auto alloc = [&](double t) {
    if (mech.score_of(i, t) > best_other) return 0.0;
    return std::ceil(budget / psi(t, mech.epsilon()));
  };
  const double lo = mech.interval().lo();
  const double bid = bids[i];
  const double h = (bid - lo) / points;
  double integral = 0.0;
  for (int j = 0; j < points; ++j) {
    const double a = lo + j * h;
    const double b = (j + 1 == points) ? bid : a + h;
    integral += 0.5 * h * (alloc(a) * mech.cost().derivative(a) + alloc(b) * mech.cost().derivative(b));
  }
  return alloc(bid) * mech.cost().value(bid) - integral;
}

TEST(VirtualCost, LinearUniformClosedForm) {
  const auto cost = CostModel::linear(1.0, 1.0);
  const auto prior = PriorModel::uniform();
  for (double eta : {0.0, 0.05, 0.1, 0.2, 0.3}) {
    EXPECT_NEAR(virtual_cost(eta, cost, prior), 4.0 / 3.0 - 2.0 * eta, 1e-14);
  }
}

TEST(VirtualCost, HazardVanishesAtTopOfSupport) {
  const auto cost = CostModel::exponential(1.0, 30.0);
  EXPECT_NEAR(virtual_cost(kOneThird, cost, PriorModel::uniform()), cost.value(kOneThird), 1e-15);
}

TEST(VirtualCost, ExponentialUniform) {
  const auto cost = CostModel::exponential(1.0, 30.0);
  EXPECT_NEAR(virtual_cost(0.2, cost, PriorModel::uniform()), kVirtualFifth, 1e-15);
}

TEST(VirtualCost, NeverBelowCost) {
  const auto cost = CostModel::exponential(1.0, 30.0);
  for (const auto& prior : {PriorModel::uniform(), PriorModel::truncated_beta(1.0, 2.0)}) {
    for (int j = 0; j <= 100; ++j) {
      const double eta = 0.05 + 0.25 * j / 100.0;
      EXPECT_GE(virtual_cost(eta, cost, prior), cost.value(eta));
    }
  }
}

TEST(VirtualCost, ZeroDensityIsAnError) {
  EXPECT_THROW(virtual_cost(0.0, CostModel::exponential(1.0, 30.0),
                            PriorModel::truncated_beta(2.0, 2.0)),
               DomainError);
}

TEST(Score, ReferenceValues) {
  const auto cost = CostModel::exponential(1.0, 30.0);
  const auto prior = PriorModel::uniform();
  EXPECT_NEAR(score(0.1, cost, prior, 0.1), kScoreTenth, 1e-12 * kScoreTenth);
  EXPECT_NEAR(score(0.2, cost, prior, 0.1), kScoreFifth, 1e-12 * kScoreFifth);
}

TEST(Score, ScalesLinearlyWithCost) {
  const auto prior = PriorModel::uniform();
  const auto cost = CostModel::exponential(1.0, 30.0);
  for (double eta : {0.07, 0.15, 0.29}) {
    EXPECT_NEAR(score(eta, cost.scaled(3.5), prior, 0.1), 3.5 * score(eta, cost, prior, 0.1),
                1e-12 * score(eta, cost, prior, 0.1) * 3.5);
  }
}

TEST(Regularity, LinearCostIsNotRegular) {
  const auto report = check_regularity(CostModel::linear(1.0, 1.0), PriorModel::uniform(), 0.1,
                                       BidInterval(0.05, 0.30), 1000);
  EXPECT_FALSE(report.is_regular);
  EXPECT_GT(report.max_violation, 0.0);
  ASSERT_TRUE(report.violating_eta.has_value());
  // spot values of the rising score
  EXPECT_NEAR(score(0.05, CostModel::linear(1.0, 1.0), PriorModel::uniform(), 0.1),
              121.7365709637209828913, 1e-9);
  EXPECT_NEAR(score(0.25, CostModel::linear(1.0, 1.0), PriorModel::uniform(), 0.1),
              270.4381537149368665590, 1e-9);
}

TEST(Regularity, ExponentialCostIsRegular) {
  const auto report = check_regularity(CostModel::exponential(1.0, 30.0), PriorModel::uniform(),
                                       0.1, BidInterval(0.05, 0.30), 1000);
  EXPECT_TRUE(report.is_regular);
  EXPECT_EQ(report.max_violation, 0.0);
}

TEST(Regularity, SinglePointGridIsVacuous) {
  EXPECT_TRUE(check_regularity(CostModel::linear(1.0, 1.0), PriorModel::uniform(), 0.1,
                               BidInterval(0.05, 0.30), 1)
                  .is_regular);
}

TEST(Regularity, CertifyRefusesIrregularConfig) {
  EXPECT_THROW(RegularMechanism::certify(linear_config()), RegularityError);
  EXPECT_NO_THROW(RegularMechanism::certify(exponential_config()));
  EXPECT_FALSE(RegularMechanism::assume_regular(linear_config()).certified());
}

TEST(BidInterval, Validation) {
  EXPECT_THROW(BidInterval(0.0, 0.3), DomainError);
  EXPECT_THROW(BidInterval(0.2, 0.1), DomainError);
  EXPECT_THROW(BidInterval(0.1, kOneThird), DomainError);
}

TEST(PsiInverse, RoundTrip) {
  for (double eps : {0.1, 0.5, 0.9}) {
    for (double eta : {0.001, 0.01, 0.1, 0.2, 0.3, 0.33}) {
      EXPECT_NEAR(psi_inverse(psi_interior(eta, eps), eps), eta, 1e-10) << eps << " " << eta;
    }
  }
  EXPECT_NEAR(psi_inverse(0.008413406489981934809571, 0.1), 0.1, 1e-6);
}

TEST(PsiInverse, SmallRateApproachesOneThird) {
  const double eta = psi_inverse(1e-12, 0.1);
  EXPECT_LT(eta, kOneThird);
  EXPECT_GT(eta, kOneThird - 1e-8);
}

TEST(PsiInverse, RejectsUnattainableRates) {
  EXPECT_THROW(psi_inverse(0.0, 0.1), DomainError);
  EXPECT_THROW(psi_inverse(0.02, 0.1), DomainError);  // above the eta = 0 interior limit
}

TEST(CriticalBid, UncontestedIsBottomOfInterval) {
  const auto mech = RegularMechanism::certify(exponential_config());
  const std::vector<double> bids{0.2};
  EXPECT_EQ(critical_bid(mech, 0, bids), 0.05);
}

TEST(CriticalBid, MatchesCompetitorScore) {
  const auto mech = RegularMechanism::certify(exponential_config());
  const std::vector<double> bids{0.1, 0.2};
  const auto q = critical_bid(mech, 0, bids);
  ASSERT_TRUE(q.has_value());
  // identical score functions: the critical bid is the competitor's bid
  EXPECT_NEAR(*q, 0.2, 1e-10);
  EXPECT_NEAR(mech.score_of(0, *q), kScoreFifth, 1e-8);
  EXPECT_GT(mech.score_of(0, *q - 1e-6), kScoreFifth);
  EXPECT_LT(mech.score_of(0, *q + 1e-6), kScoreFifth);
}

TEST(CriticalBid, AbsentWhenUnbeatable) {
  const auto mech = RegularMechanism::certify(exponential_config());
  // competitor at the top of the interval has the lowest possible score;
  // a strictly smaller target is unreachable
  EXPECT_FALSE(critical_bid_against(mech, 0, mech.score_of(1, 0.30) * 0.5).has_value());
}

TEST(RunAuction, SingleBidderIsUncontested) {
  const auto mech = RegularMechanism::certify(exponential_config());
  const std::vector<double> bids{0.2};
  const auto out = run_auction(mech, bids, PaymentVariant::critical_price);
  ASSERT_EQ(out.winner, 0u);
  EXPECT_EQ(out.allocation[0], 1555u);
  EXPECT_EQ(out.critical_bid, 0.05);
  EXPECT_NEAR(out.payments[0], 1555 * std::exp(-30 * 0.05), 1e-9);
}

TEST(RunAuction, LowerScoreWins) {
  const auto mech = RegularMechanism::certify(exponential_config());
  const std::vector<double> bids{0.1, 0.2};
  for (auto variant : {PaymentVariant::integral, PaymentVariant::critical_price}) {
    const auto out = run_auction(mech, bids, variant);
    ASSERT_EQ(out.winner, 1u);
    EXPECT_EQ(out.allocation, (AnnotationPlan{0, 1555}));
    EXPECT_EQ(out.payments[0], 0.0);
    EXPECT_GT(out.payments[1], 0.0);
  }
}

TEST(RunAuction, TieGoesToSmallestIndex) {
  const auto mech = RegularMechanism::certify(exponential_config());
  const std::vector<double> bids{0.15, 0.15, 0.1};
  EXPECT_EQ(run_auction(mech, bids, PaymentVariant::integral).winner, 0u);
}

TEST(RunAuction, PermutationEquivariance) {
  const auto mech = RegularMechanism::certify(exponential_config());
  const std::vector<double> bids{0.12, 0.27, 0.2};
  const std::vector<std::size_t> perm{2, 0, 1};
  std::vector<double> permuted(3);
  for (std::size_t j = 0; j < 3; ++j) permuted[j] = bids[perm[j]];
  for (auto variant : {PaymentVariant::integral, PaymentVariant::critical_price}) {
    const auto a = run_auction(mech, bids, variant);
    const auto b = run_auction(mech, permuted, variant);
    for (std::size_t j = 0; j < 3; ++j) {
      EXPECT_EQ(b.allocation[j], a.allocation[perm[j]]);
      EXPECT_DOUBLE_EQ(b.payments[j], a.payments[perm[j]]);
    }
  }
}

TEST(RunAuction, RejectsBadProfiles) {
  const auto mech = RegularMechanism::certify(exponential_config());
  EXPECT_THROW(run_auction(mech, std::vector<double>{}, PaymentVariant::integral),
               std::invalid_argument);
  EXPECT_THROW(run_auction(mech, std::vector<double>{0.01, 0.2}, PaymentVariant::integral),
               DomainError);
}

TEST(RunAuction, AllocationIsMonotoneInOwnBid) {
  const auto mech = RegularMechanism::certify(exponential_config());
  const std::vector<double> others{0.18, 0.22};
  std::uint64_t previous = 0;
  for (double bid : mech.interval().grid(400)) {
    const std::vector<double> bids{bid, others[0], others[1]};
    const auto a = run_auction(mech, bids, PaymentVariant::integral).allocation[0];
    ASSERT_GE(a, previous) << "bid " << bid;
    previous = a;
  }
}

TEST(RunAuction, CostScalingKeepsWinnerAndScalesPayments) {
  const auto base = RegularMechanism::certify(exponential_config(1.0));
  const auto scaled = RegularMechanism::certify(exponential_config(4.0));
  const std::vector<double> bids{0.11, 0.23, 0.19};
  for (auto variant : {PaymentVariant::integral, PaymentVariant::critical_price}) {
    const auto a = run_auction(base, bids, variant);
    const auto b = run_auction(scaled, bids, variant);
    EXPECT_EQ(a.winner, b.winner);
    EXPECT_EQ(a.allocation, b.allocation);
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(b.payments[j], 4.0 * a.payments[j], 1e-9);
  }
}

TEST(RunAuction, PacCompatibleAndPaysAtLeastCost) {
  const auto mech = RegularMechanism::certify(exponential_config());
  Rng rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> bids(1 + trial % 4);
    for (auto& b : bids) b = rng.uniform(0.05, 0.30);
    for (auto variant : {PaymentVariant::integral, PaymentVariant::critical_price}) {
      const auto out = run_auction(mech, bids, variant);
      EXPECT_TRUE(is_feasible(out.allocation, bids, mech.params()));
      const std::size_t w = *out.winner;
      EXPECT_GE(out.payments[w], out.allocation[w] * mech.cost().value(bids[w]) - 1e-12);
      // elicitation premium: per-example price at the critical bid
      EXPECT_GE(mech.cost().value(*out.critical_bid), mech.cost().value(bids[w]));
    }
  }
}

TEST(CriticalPricePayment, MarginalWinnerHasZeroMargin) {
  const auto mech = RegularMechanism::certify(exponential_config());
  AuctionOutcome out{0, {1000, 0}, {0.0, 0.0}, 0.17, PaymentVariant::critical_price};
  const auto pay = critical_price_payment(mech, out);
  EXPECT_DOUBLE_EQ(pay[0], 1000 * mech.cost().value(0.17));
  EXPECT_EQ(pay[1], 0.0);
  out.critical_bid.reset();
  EXPECT_THROW(critical_price_payment(mech, out), std::logic_error);
}

TEST(IntegralPayment, ConstantAllocationCollapsesToCriticalPrice) {
  const auto mech = RegularMechanism::certify(exponential_config());
  const double q = 0.2;
  // stay below the next staircase edge
  const double budget = log_budget(mech.params()).value;
  const double edge = psi_inverse(budget / static_cast<double>(mech.allocation_for(q)), 0.1);
  const double bid = q + 0.5 * (edge - q);
  ASSERT_EQ(mech.allocation_for(bid), mech.allocation_for(q));
  EXPECT_NEAR(staircase_payment(mech, q, bid), mech.allocation_for(q) * mech.cost().value(q),
              1e-12);
}

TEST(IntegralPayment, SingleJumpClosedFormAndQuadrature) {
  const auto mech = RegularMechanism::certify(exponential_config());
  const double budget = log_budget(mech.params()).value;
  const std::uint64_t level = 1200;
  // locate the jump from `level` to `level + 1` by bisection on ceil(L / psi)
  double lo = 0.05, hi = 0.30;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (std::ceil(budget / psi(mid, 0.1)) <= level) lo = mid; else hi = mid;
  }
  const double jump = lo;
  const double q = jump - 2e-5;
  const double bid = jump + 2e-5;
  ASSERT_EQ(mech.allocation_for(q), level);
  ASSERT_EQ(mech.allocation_for(bid), level + 1);
  const double c_q = mech.cost().value(q);
  const double expected = level * c_q + mech.cost().value(jump);
  EXPECT_NEAR(staircase_payment(mech, q, bid), expected, 1e-9);

  // 1e5-point trapezoid of a(t) c'(t) over [q, bid]
  const int points = 100000;
  const double h = (bid - q) / points;
  double integral = 0.0;
  for (int j = 0; j < points; ++j) {
    const double a = q + j * h;
    const double b = a + h;
    auto f = [&](double t) {
      return std::ceil(budget / psi(t, 0.1)) * mech.cost().derivative(t);
    };
    integral += 0.5 * h * (f(a) + f(b));
  }
  const double quadrature = (level + 1) * mech.cost().value(bid) - integral;
  EXPECT_NEAR(staircase_payment(mech, q, bid), quadrature, 1e-6);
}

TEST(IntegralPayment, MatchesDenseQuadratureOnProfiles) {
  const auto mech = RegularMechanism::certify(exponential_config());
  for (const auto& bids : std::vector<std::vector<double>>{{0.1, 0.2}, {0.21, 0.16, 0.28}, {0.07}}) {
    const auto out = run_auction(mech, bids, PaymentVariant::integral);
    const std::size_t w = *out.winner;
    const double exact = integral_payment(mech, w, bids);
    EXPECT_DOUBLE_EQ(exact, out.payments[w]);
    const double approx = trapezoid_payment(mech, w, bids, 1000000);
    // each staircase jump costs the trapezoid rule at most h * |c'|
    EXPECT_NEAR(exact, approx, 2e-4 * exact);
    for (std::size_t j = 0; j < bids.size(); ++j) {
      if (j != w) {
        EXPECT_EQ(integral_payment(mech, j, bids), 0.0);
      }
    }
  }
}

TEST(IntegralPayment, DominatesCost) {
  const auto mech = RegularMechanism::certify(exponential_config());
  Rng rng(10);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> bids{rng.uniform(0.05, 0.3), rng.uniform(0.05, 0.3)};
    const auto out = run_auction(mech, bids, PaymentVariant::integral);
    const std::size_t w = *out.winner;
    EXPECT_GE(out.payments[w], out.allocation[w] * mech.cost().value(bids[w]) - 1e-12);
  }
}

TEST(PerAnnotatorPriors, ProfileMustMatch) {
  MechanismConfig cfg = exponential_config();
  cfg.priors = {PriorModel::uniform(), PriorModel::truncated_beta(1.0, 1.5)};
  const auto mech = RegularMechanism::certify(cfg);
  EXPECT_NO_THROW(run_auction(mech, std::vector<double>{0.1, 0.2}, PaymentVariant::integral));
  EXPECT_THROW(run_auction(mech, std::vector<double>{0.1, 0.2, 0.3}, PaymentVariant::integral),
               DimensionMismatch);
}

}  // namespace
}  // namespace pacauction
