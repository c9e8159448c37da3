#include "bljes/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bljes {

double norm_pdf(double z) { return std::exp(-0.5 * z * z - kLogSqrt2Pi); }

double log_norm_pdf(double z) { return -0.5 * z * z - kLogSqrt2Pi; }

double norm_cdf(double z) { return 0.5 * std::erfc(-z * 0.70710678118654752440); }

double log_norm_cdf(double z) {
  if (z >= -8.0) {
    return std::log(0.5 * std::erfc(-z * 0.70710678118654752440));
  }
  // Phi(z) = phi(z)/(-z) * [1 - 1/z^2 + 3/z^4 - 15/z^6 + ...] for z -> -inf
  const double iz2 = 1.0 / (z * z);
  double series = 0.0;
  double term = -iz2;
  series += term;            // -1/z^2
  term *= -3.0 * iz2;
  series += term;            // +3/z^4
  term *= -5.0 * iz2;
  series += term;            // -15/z^6
  term *= -7.0 * iz2;
  series += term;            // +105/z^8
  term *= -9.0 * iz2;
  series += term;            // -945/z^10
  term *= -11.0 * iz2;
  series += term;            // +10395/z^12
  term *= -13.0 * iz2;
  series += term;            // -135135/z^14
  term *= -15.0 * iz2;
  series += term;            // +2027025/z^16
  return -0.5 * z * z - kLogSqrt2Pi - std::log(-z) + std::log1p(series);
}

double log1mexp(double x) {
  // x < 0; split at -ln 2 to keep both branches well conditioned
  if (x > -0.693147180559945309417) {
    return std::log(-std::expm1(x));
  }
  return std::log1p(-std::exp(x));
}

double log_gaussian_density(double y, double mean, double sd) {
  const double z = (y - mean) / sd;
  return -0.5 * z * z - kLogSqrt2Pi - std::log(sd);
}

double quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
  if (sorted.size() == 1) return sorted.front();
  const double h = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(h);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  return quantile_sorted(values, 0.5);
}

}  // namespace bljes
