#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace cfn {

/**
 * Pairwise (cascade) summation. Fixed association order, so dataset
 * reductions give the same result no matter how work was scheduled, and
 * rounding error grows like log(n) instead of n.
 */
inline double pairwise_sum(std::span<const double> xs) {
  if (xs.size() <= 8) {
    double acc = 0.0;
    for (double x : xs) acc += x;
    return acc;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

inline double mean(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("mean of empty range");
  return pairwise_sum(xs) / static_cast<double>(xs.size());
}

/** Sample standard deviation (n−1 denominator). */
inline double sample_sd(std::span<const double> xs) {
  if (xs.size() < 2) throw std::invalid_argument("sd needs at least 2 values");
  const double m = mean(xs);
  std::vector<double> sq(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) sq[i] = (xs[i] - m) * (xs[i] - m);
  return std::sqrt(pairwise_sum(sq) / static_cast<double>(xs.size() - 1));
}

struct ConfidenceInterval {
  double lo = 0.0;
  double hi = 0.0;
};

/**
 * Wilson score interval for a binomial proportion. Stays inside [0,1] and
 * behaves sensibly at small counts, which matters for the rare-event tier.
 */
inline ConfidenceInterval wilson_interval(long successes, long trials,
                                          double z = 1.959963984540054) {
  if (trials <= 0) throw std::invalid_argument("wilson_interval: trials <= 0");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half =
      z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {center - half, center + half};
}

struct SlopeFit {
  double slope = 0.0;
  double se = 0.0;  // standard error of the slope
  int points = 0;
};

/** Least-squares slope of y on x with its standard error. */
inline SlopeFit fit_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("fit_slope: need >= 2 paired points");
  const double xb = mean(x), yb = mean(y);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - xb) * (x[i] - xb);
    sxy += (x[i] - xb) * (y[i] - yb);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_slope: degenerate x values");
  SlopeFit out;
  out.slope = sxy / sxx;
  out.points = static_cast<int>(x.size());
  double rss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - yb - out.slope * (x[i] - xb);
    rss += r * r;
  }
  const auto dof = static_cast<double>(x.size() >= 3 ? x.size() - 2 : 1);
  out.se = std::sqrt(rss / dof / sxx);
  return out;
}

}  // namespace cfn
