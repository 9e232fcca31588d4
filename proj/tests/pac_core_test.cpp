#include "pacauction/pac_core.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

namespace pacauction {
namespace {

// 40-digit reference values (mpmath) of the rate formulas at eps = 0.1.
constexpr double kPsiZero = 0.1053605156578263012275009808393127983061;
constexpr double kPsiTenth = 0.008413406489981934809571333773961239638123;
constexpr double kPsiFifth = 0.004888989205155349609929237606357834309164;
constexpr double kPsiThird = 0.005418707824746337345663240718823014456091;
constexpr double kLn2000 = 7.600902459542082361471206485511269190879;

TEST(Psi, MatchesReferenceValues) {
  EXPECT_NEAR(psi(0.0, 0.1), kPsiZero, 1e-12 * kPsiZero);
  EXPECT_NEAR(psi(0.1, 0.1), kPsiTenth, 1e-12 * kPsiTenth);
  EXPECT_NEAR(psi(0.2, 0.1), kPsiFifth, 1e-12 * kPsiFifth);
  EXPECT_NEAR(psi(kOneThird, 0.1), kPsiThird, 1e-12 * kPsiThird);
}

TEST(Psi, BoundaryValuesAreDiscontinuous) {
  // the interior limit at 0 is -ln(1 - eps (1 - e^{-1/8})) ~ 0.01182
  EXPECT_NEAR(psi_interior(0.0, 0.1), 0.01181989022966697718, 1e-15);
  EXPECT_GT(psi(0.0, 0.1), 8.0 * psi(1e-12, 0.1));
  EXPECT_GT(psi(kOneThird, 0.1), psi(kOneThird - 1e-9, 0.1));
}

TEST(Psi, RejectsOutOfDomain) {
  EXPECT_THROW(psi(-0.01, 0.1), DomainError);
  EXPECT_THROW(psi(0.34, 0.1), DomainError);
  EXPECT_THROW(psi(0.1, 0.0), DomainError);
  EXPECT_THROW(psi(0.1, 1.0), DomainError);
}

TEST(Psi, StrictlyDecreasingInEtaOnInterior) {
  for (double eps : {0.05, 0.1, 0.3, 0.9}) {
    double previous = psi(1e-6, eps);
    for (int j = 1; j < 2000; ++j) {
      const double eta = 1e-6 + (kOneThird - 2e-6) * j / 2000.0;
      const double current = psi(eta, eps);
      ASSERT_LT(current, previous) << "eps=" << eps << " eta=" << eta;
      previous = current;
    }
  }
}

TEST(Psi, StrictlyIncreasingInEpsilon) {
  for (double eta : {0.01, 0.1, 0.2, 0.33}) {
    double previous = psi(eta, 0.001);
    for (int j = 2; j < 1000; ++j) {
      const double current = psi(eta, j / 1000.0);
      ASSERT_GT(current, previous) << "eta=" << eta;
      previous = current;
    }
  }
}

TEST(LogBudget, Values) {
  EXPECT_NEAR(log_budget(PacParams(0.1, 0.05, 100)).value, kLn2000, 1e-13);
  EXPECT_NEAR(log_budget(PacParams(0.1, 0.5, 2)).value, 1.386294361119890618834, 1e-14);
  // N / delta = e
  EXPECT_NEAR(log_budget(PacParams(0.1, 2.0 / std::exp(1.0), 2)).value, 1.0, 1e-15);
}

TEST(PacParams, ValidatesInvariants) {
  EXPECT_THROW(PacParams(0.0, 0.1, 10), DomainError);
  EXPECT_THROW(PacParams(0.1, 1.0, 10), DomainError);
  EXPECT_THROW(PacParams(0.1, 0.1, 1), DomainError);
}

TEST(Feasibility, ZeroPlanIsInfeasible) {
  const PacParams params(0.1, 0.05, 100);
  const std::vector<std::uint64_t> plan{0, 0, 0};
  const std::vector<double> etas{0.0, 0.1, 0.3};
  EXPECT_FALSE(is_feasible(plan, etas, params));
}

TEST(Feasibility, SingleNoiselessAnnotatorThreshold) {
  const PacParams params(0.1, 0.05, 100);
  const std::vector<double> etas{0.0};
  EXPECT_TRUE(is_feasible(std::vector<std::uint64_t>{73}, etas, params));
  EXPECT_FALSE(is_feasible(std::vector<std::uint64_t>{72}, etas, params));
}

TEST(Feasibility, TwoNoisyAnnotators) {
  const PacParams params(0.1, 0.05, 100);
  EXPECT_TRUE(is_feasible(std::vector<std::uint64_t>{452, 452}, std::vector<double>{0.1, 0.1},
                          params));
  EXPECT_FALSE(is_feasible(std::vector<std::uint64_t>{451, 452}, std::vector<double>{0.1, 0.1},
                           params));
}

TEST(Feasibility, DimensionMismatch) {
  const PacParams params(0.1, 0.05, 100);
  EXPECT_THROW(is_feasible(std::vector<std::uint64_t>{1, 2}, std::vector<double>{0.1}, params),
               DimensionMismatch);
}

TEST(Feasibility, AddingExamplesNeverBreaksFeasibility) {
  const PacParams params(0.2, 0.1, 50);
  Rng rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + trial % 4;
    std::vector<double> etas(n);
    std::vector<std::uint64_t> plan(n);
    for (std::size_t i = 0; i < n; ++i) {
      etas[i] = rng.uniform(0.0, kOneThird);
      plan[i] = static_cast<std::uint64_t>(rng.uniform(0.0, 600.0));
    }
    const bool before = is_feasible(plan, etas, params);
    plan[trial % n] += 1;
    if (before) {
      EXPECT_TRUE(is_feasible(plan, etas, params));
    }
  }
}

TEST(MinSamplesSingle, Values) {
  const PacParams params(0.1, 0.05, 100);
  EXPECT_EQ(min_samples_single(0.0, params), 73u);
  EXPECT_EQ(min_samples_single(0.1, params), 904u);
  // budget below one example's worth of information
  EXPECT_EQ(min_samples_single(0.0, PacParams(0.99, 0.9, 2)), 1u);
}

TEST(ChernoffBound, Values) {
  EXPECT_DOUBLE_EQ(disagreement_chernoff_bound(std::vector<std::uint64_t>{0, 0},
                                               std::vector<double>{0.1, 0.2}),
                   1.0);
  EXPECT_NEAR(disagreement_chernoff_bound(std::vector<std::uint64_t>{8}, std::vector<double>{0.0}),
              std::exp(-1.0), 1e-15);
  EXPECT_NEAR(disagreement_chernoff_bound(std::vector<std::uint64_t>{8, 8},
                                          std::vector<double>{kOneThird, 0.0}),
              std::exp(-1.0), 1e-15);
}

TEST(E1UpperBound, Values) {
  EXPECT_DOUBLE_EQ(e1_upper_bound(std::vector<std::uint64_t>{0, 0},
                                  std::vector<double>{0.1, 0.2}, 0.3),
                   1.0);
  // 904 * psi(0.1) = 7.6057194669..., exp(-.) = 4.97597287886e-4 < delta/N
  const double b = e1_upper_bound(std::vector<std::uint64_t>{904}, std::vector<double>{0.1}, 0.1);
  EXPECT_NEAR(b, 4.975972878861792145852e-4, 1e-15);
  EXPECT_LE(b, 0.05 / 100);
}

TEST(E1UpperBound, EqualsProductForm) {
  Rng rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + trial % 3;
    const double eps = rng.uniform(0.01, 0.99);
    std::vector<double> etas(n);
    std::vector<std::uint64_t> plan(n);
    double product = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      etas[i] = rng.uniform(0.0, kOneThird);
      plan[i] = static_cast<std::uint64_t>(rng.uniform(0.0, 300.0));
      product *= std::pow(1.0 - eps * (1.0 - std::exp(-(1.0 - 3.0 * etas[i]) / 8.0)),
                          static_cast<double>(plan[i]));
    }
    const double bound = e1_upper_bound(plan, etas, eps);
    EXPECT_NEAR(bound, product, 1e-12 * product);
  }
}

TEST(E1UpperBound, FeasibleImpliesBelowDeltaOverN) {
  const PacParams params(0.1, 0.05, 100);
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const std::vector<double> etas{rng.uniform(0.01, 0.33), rng.uniform(0.01, 0.33)};
    std::vector<std::uint64_t> plan{static_cast<std::uint64_t>(rng.uniform(0, 2000)),
                                    static_cast<std::uint64_t>(rng.uniform(0, 2000))};
    if (!is_feasible(plan, etas, params)) continue;
    EXPECT_LE(e1_upper_bound(plan, etas, params.epsilon()),
              params.delta() / static_cast<double>(params.concept_count()) * (1 + 1e-12));
  }
}

TEST(McE1Probability, ZeroEpsilonIsAlwaysAnEvent) {
  const auto est = mc_e1_probability(std::vector<std::uint64_t>{50}, std::vector<double>{0.1},
                                     0.0, 1000, 1);
  EXPECT_EQ(est.value, 1.0);
  EXPECT_EQ(est.std_error, 0.0);
}

TEST(McE1Probability, DominatedByBound) {
  const std::vector<std::uint64_t> plan{50};
  const std::vector<double> etas{0.1};
  const auto est = mc_e1_probability(plan, etas, 0.2, 200000, 99);
  EXPECT_LE(est.value, e1_upper_bound(plan, etas, 0.2) + 4 * est.std_error);
}

TEST(McE1Probability, OneThirdNoiseStaysAProbability) {
  const auto est = mc_e1_probability(std::vector<std::uint64_t>{20},
                                     std::vector<double>{kOneThird}, 0.3, 5000, 5);
  EXPECT_LE(est.value, 1.0);
  EXPECT_GE(est.value, 0.0);
}

TEST(McE1Probability, DeterministicForSeed) {
  const std::vector<std::uint64_t> plan{30, 10};
  const std::vector<double> etas{0.2, 0.05};
  const auto a = mc_e1_probability(plan, etas, 0.3, 20000, 42);
  const auto b = mc_e1_probability(plan, etas, 0.3, 20000, 42);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.std_error, b.std_error);
  EXPECT_THROW(mc_e1_probability(plan, etas, 0.3, 0, 42), std::invalid_argument);
}

TEST(McDisagreement, DominatedByChernoff) {
  for (std::uint64_t k : {4u, 16u}) {
    for (double eta : {0.0, 0.3}) {
      const std::vector<std::uint64_t> ks{k};
      const std::vector<double> etas{eta};
      const auto est = mc_disagreement_probability(ks, etas, 100000, 17);
      EXPECT_LE(est.value, disagreement_chernoff_bound(ks, etas) + 4 * est.std_error);
    }
  }
}

TEST(Rng, StreamsAreKeyedNotSequential) {
  Rng a = Rng::stream(1, 5);
  Rng b = Rng::stream(1, 5);
  Rng c = Rng::stream(1, 6);
  const auto va = a();
  EXPECT_EQ(va, b());
  EXPECT_NE(va, c());
  Rng u(123);
  for (int j = 0; j < 10000; ++j) {
    const double x = u.uniform();
    ASSERT_GE(x, 0.0);
    ASSERT_LT(x, 1.0);
  }
}

}  // namespace
}  // namespace pacauction
