#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>

#include <boost/math/distributions/beta.hpp>

namespace pacauction {

// A Monte Carlo estimate and its standard error.
struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

inline Estimate binomial_estimate(std::uint64_t events, std::uint64_t trials) {
  if (trials == 0) throw std::invalid_argument("binomial_estimate: zero trials");
  const double p = static_cast<double>(events) / static_cast<double>(trials);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(trials))};
}

// Sample mean and standard error of the mean, summed in index order.
inline Estimate mean_estimate(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("mean_estimate: no samples");
  const double n = static_cast<double>(xs.size());
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double mean = sum / n;
  if (xs.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

// One-sided Clopper-Pearson upper confidence limit for a binomial proportion.
inline double clopper_pearson_upper(std::uint64_t events, std::uint64_t trials,
                                    double confidence) {
  if (trials == 0) throw std::invalid_argument("clopper_pearson_upper: zero trials");
  if (events >= trials) return 1.0;
  const boost::math::beta_distribution<double> dist(static_cast<double>(events) + 1.0,
                                                    static_cast<double>(trials - events));
  return boost::math::quantile(dist, confidence);
}

}  // namespace pacauction
