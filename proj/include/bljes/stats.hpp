#ifndef BLJES_STATS_HPP
#define BLJES_STATS_HPP

#include <vector>

namespace bljes {

inline constexpr double kLogSqrt2Pi = 0.91893853320467274178032973640562;

double norm_pdf(double z);
// log of the standard normal density
double log_norm_pdf(double z);
double norm_cdf(double z);
// log Phi(z); switches to the Mills-ratio asymptotic series for z < -8 so
// deep tails stay finite and accurate
double log_norm_cdf(double z);
// log(1 - e^x) for x < 0
double log1mexp(double x);

// log N(y; mean, sd^2)
double log_gaussian_density(double y, double mean, double sd);

// linear-interpolation quantile of a sorted sample, p in [0, 1]
double quantile_sorted(const std::vector<double>& sorted, double p);
double median(std::vector<double> values);

}  // namespace bljes

#endif  // BLJES_STATS_HPP
