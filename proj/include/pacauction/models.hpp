#pragma once

// Annotator cost c(eta) and noise-rate prior (phi, Phi) on [0, 1/3].

#include <algorithm>
#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/interpolators/pchip.hpp>

#include "pacauction/errors.hpp"
#include "pacauction/pac_core.hpp"

namespace pacauction {

// c(eta) = intercept - slope * eta, with intercept > slope / 3 > 0.
struct LinearCost {
  double intercept;
  double slope;
};

// c(eta) = scale * exp(-rate * eta).
struct ExponentialCost {
  double scale;
  double rate;
};

// Monotone piecewise-cubic (PCHIP) interpolation of tabulated costs.
struct TableCost {
  boost::math::interpolators::pchip<std::vector<double>> curve;
  double lo;
  double hi;
};

/// Per-example internal cost of an annotator as a function of its noise
/// rate. Bounded, C^1 and strictly decreasing on [0, 1/3].
class CostModel {
 public:
  static CostModel linear(double intercept, double slope) {
    detail::require_domain(slope > 0.0 && intercept > slope / 3.0,
                           "linear cost: need intercept > slope/3 > 0");
    return CostModel(LinearCost{intercept, slope});
  }

  static CostModel exponential(double scale, double rate) {
    detail::require_domain(scale > 0.0 && rate > 0.0,
                           "exponential cost: need scale > 0 and rate > 0");
    return CostModel(ExponentialCost{scale, rate});
  }

  // At least four knots, covering [0, 1/3], with strictly decreasing costs.
  static CostModel table(std::vector<double> eta, std::vector<double> cost) {
    detail::require_same_size(eta.size(), cost.size(), "table cost");
    detail::require_domain(eta.size() >= 4, "table cost: need at least four knots");
    detail::require_domain(eta.front() <= 0.0 && eta.back() >= kOneThird,
                           "table cost: knots must cover [0, 1/3]");
    for (std::size_t j = 0; j < eta.size(); ++j) {
      detail::require_domain(cost[j] > 0.0, "table cost: costs must be positive");
      if (j > 0) {
        detail::require_domain(eta[j] > eta[j - 1], "table cost: knots must increase");
        detail::require_domain(cost[j] < cost[j - 1], "table cost: costs must strictly decrease");
      }
    }
    // Boost's knot slopes are harmonic means of neighbouring secants with
    // one-sided secants at the ends, so all are strictly negative here.
    const double lo = eta.front(), hi = eta.back();
    return CostModel(TableCost{{std::move(eta), std::move(cost)}, lo, hi});
  }

  double value(double eta) const {
    return std::visit([&](const auto& k) { return scale_ * eval(k, eta); }, kind_);
  }

  double derivative(double eta) const {
    return std::visit([&](const auto& k) { return scale_ * slope(k, eta); }, kind_);
  }

  // Same model with every cost multiplied by factor > 0.
  CostModel scaled(double factor) const {
    detail::require_domain(factor > 0.0, "cost scaling factor must be positive");
    CostModel copy = *this;
    copy.scale_ *= factor;
    return copy;
  }

  std::string kind_name() const {
    return std::visit(
        [](const auto& k) -> std::string {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, LinearCost>) return "linear";
          else if constexpr (std::is_same_v<K, ExponentialCost>) return "exponential";
          else return "table";
        },
        kind_);
  }

 private:
  template <class K>
  explicit CostModel(K kind) : kind_(std::move(kind)) {}

  double eval(const LinearCost& k, double eta) const { return k.intercept - k.slope * eta; }
  double slope(const LinearCost& k, double) const { return -k.slope; }
  double eval(const ExponentialCost& k, double eta) const {
    return k.scale * std::exp(-k.rate * eta);
  }
  double slope(const ExponentialCost& k, double eta) const {
    return -k.rate * k.scale * std::exp(-k.rate * eta);
  }

  double eval(const TableCost& k, double eta) const {
    detail::require_domain(eta >= k.lo && eta <= k.hi, "table cost: eta outside the knots");
    return k.curve(eta);
  }
  double slope(const TableCost& k, double eta) const {
    detail::require_domain(eta >= k.lo && eta <= k.hi, "table cost: eta outside the knots");
    return k.curve.prime(eta);
  }

  std::variant<LinearCost, ExponentialCost, TableCost> kind_;
  double scale_ = 1.0;
};

// Uniform on [0, 1/3]: phi = 3, Phi = 3 eta.
struct UniformPrior {};

// Beta(alpha, beta) on [0, 1] conditioned on [0, 1/3].
struct TruncatedBetaPrior {
  double alpha;
  double beta;
};

// Piecewise-linear density through (eta_j, density_j), renormalised.
struct TablePrior {
  std::vector<double> eta;
  std::vector<double> density;
  std::vector<double> cdf_at_knot;
};

/// Distribution of an annotator's true noise rate on [0, 1/3].
class PriorModel {
 public:
  static PriorModel uniform() { return PriorModel(UniformPrior{}); }

  static PriorModel truncated_beta(double alpha, double beta) {
    detail::require_domain(alpha > 0.0 && beta > 0.0,
                           "truncated beta prior: need alpha > 0 and beta > 0");
    PriorModel p(TruncatedBetaPrior{alpha, beta});
    const boost::math::beta_distribution<double> dist(alpha, beta);
    p.beta_mass_ = boost::math::cdf(dist, kOneThird);
    return p;
  }

  static PriorModel table(std::vector<double> eta, std::vector<double> density) {
    detail::require_same_size(eta.size(), density.size(), "table prior");
    detail::require_domain(eta.size() >= 2, "table prior: need at least two knots");
    detail::require_domain(eta.front() == 0.0 && std::abs(eta.back() - kOneThird) < 1e-15,
                           "table prior: knots must span exactly [0, 1/3]");
    for (std::size_t j = 0; j < eta.size(); ++j) {
      detail::require_domain(density[j] > 0.0, "table prior: densities must be positive");
      if (j > 0) detail::require_domain(eta[j] > eta[j - 1], "table prior: knots must increase");
    }
    std::vector<double> cdf(eta.size(), 0.0);
    for (std::size_t j = 1; j < eta.size(); ++j) {
      cdf[j] = cdf[j - 1] + 0.5 * (density[j] + density[j - 1]) * (eta[j] - eta[j - 1]);
    }
    const double total = cdf.back();
    for (auto& d : density) d /= total;
    for (auto& c : cdf) c /= total;
    return PriorModel(TablePrior{std::move(eta), std::move(density), std::move(cdf)});
  }

  double density(double eta) const {
    if (eta < 0.0 || eta > kOneThird) return 0.0;
    return std::visit([&](const auto& k) { return pdf(k, eta); }, kind_);
  }

  double cdf(double eta) const {
    if (eta <= 0.0) return 0.0;
    if (eta >= kOneThird) return 1.0;
    return std::visit([&](const auto& k) { return cdf_of(k, eta); }, kind_);
  }

  // Inverse cdf: closed form for the uniform prior, Boost's beta quantile
  // for the truncated beta, bisection for tables.
  double quantile(double u) const {
    u = std::clamp(u, 0.0, 1.0);
    if (std::holds_alternative<UniformPrior>(kind_)) return u / 3.0;
    if (const auto* b = std::get_if<TruncatedBetaPrior>(&kind_)) {
      const boost::math::beta_distribution<double> dist(b->alpha, b->beta);
      return std::min(boost::math::quantile(dist, u * beta_mass_), kOneThird);
    }
    double lo = 0.0, hi = kOneThird;
    for (int it = 0; it < 200 && lo < hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (cdf(mid) < u) lo = mid; else hi = mid;
    }
    return hi;
  }

  std::string kind_name() const {
    return std::visit(
        [](const auto& k) -> std::string {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, UniformPrior>) return "uniform";
          else if constexpr (std::is_same_v<K, TruncatedBetaPrior>) return "truncated_beta";
          else return "table";
        },
        kind_);
  }

 private:
  template <class K>
  explicit PriorModel(K kind) : kind_(std::move(kind)) {}

  double pdf(const UniformPrior&, double) const { return 3.0; }
  double cdf_of(const UniformPrior&, double eta) const { return 3.0 * eta; }

  double pdf(const TruncatedBetaPrior& k, double eta) const {
    const boost::math::beta_distribution<double> dist(k.alpha, k.beta);
    return boost::math::pdf(dist, eta) / beta_mass_;
  }
  double cdf_of(const TruncatedBetaPrior& k, double eta) const {
    const boost::math::beta_distribution<double> dist(k.alpha, k.beta);
    return boost::math::cdf(dist, eta) / beta_mass_;
  }

  std::size_t segment(const TablePrior& k, double eta) const {
    auto it = std::upper_bound(k.eta.begin(), k.eta.end(), eta);
    std::size_t j = it == k.eta.begin() ? 0 : static_cast<std::size_t>(it - k.eta.begin()) - 1;
    return std::min(j, k.eta.size() - 2);
  }
  double pdf(const TablePrior& k, double eta) const {
    const std::size_t j = segment(k, eta);
    const double t = (eta - k.eta[j]) / (k.eta[j + 1] - k.eta[j]);
    return (1 - t) * k.density[j] + t * k.density[j + 1];
  }
  double cdf_of(const TablePrior& k, double eta) const {
    const std::size_t j = segment(k, eta);
    const double dx = eta - k.eta[j];
    return k.cdf_at_knot[j] + 0.5 * (k.density[j] + pdf(k, eta)) * dx;
  }

  std::variant<UniformPrior, TruncatedBetaPrior, TablePrior> kind_;
  double beta_mass_ = 1.0;
};

}  // namespace pacauction
