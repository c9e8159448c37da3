#ifndef BLJES_TESTS_ORACLES_HPP
#define BLJES_TESTS_ORACLES_HPP

// Independent reference implementations used by the tests. Everything here
// is deliberately naive (dense inverses, explicit block algebra, numerical
// quadrature, finite differences) and shares no code path with the library
// internals it checks.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <vector>

#include "bljes/gp.hpp"

namespace oracles {

inline double kernel(const bljes::GpHyperparams& h, const Eigen::VectorXd& a,
                     const Eigen::VectorXd& b) {
  return h.output_scale *
         std::exp(-0.5 * (a - b).squaredNorm() / (h.lengthscale * h.lengthscale));
}

// dense posterior by explicit inverse, with the library's documented jitter
inline std::pair<double, double> naive_posterior(
    const bljes::GpHyperparams& h, const std::vector<Eigen::VectorXd>& train,
    const Eigen::VectorXd& y, const Eigen::VectorXd& noise,
    const Eigen::VectorXd& z) {
  const auto n = static_cast<Eigen::Index>(train.size());
  if (n == 0) return {h.prior_mean, h.output_scale};
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      a(i, j) = kernel(h, train[static_cast<std::size_t>(i)],
                       train[static_cast<std::size_t>(j)]);
    }
    a(i, i) += noise(i) + bljes::kJitter;
  }
  Eigen::VectorXd k(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i) = kernel(h, z, train[static_cast<std::size_t>(i)]);
  }
  const Eigen::MatrixXd ainv = a.inverse();
  const Eigen::VectorXd resid = y.array() - h.prior_mean;
  const double mean = h.prior_mean + k.dot(ainv * resid);
  const double var = kernel(h, z, z) - k.dot(ainv * k);
  return {mean, var};
}

// full (train + query) prior kernel matrix, conditioned on the training
// block by explicit Schur complement
inline bljes::JointGaussian block_conditioning(
    const bljes::GpHyperparams& h, const std::vector<Eigen::VectorXd>& train,
    const Eigen::VectorXd& y, const Eigen::VectorXd& noise,
    const std::vector<Eigen::VectorXd>& query) {
  const auto n = static_cast<Eigen::Index>(train.size());
  const auto m = static_cast<Eigen::Index>(query.size());
  bljes::JointGaussian out;
  out.mean.setConstant(m, h.prior_mean);
  out.cov.resize(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      out.cov(i, j) = kernel(h, query[static_cast<std::size_t>(i)],
                             query[static_cast<std::size_t>(j)]);
    }
  }
  if (n == 0) return out;

  Eigen::MatrixXd ktt(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      ktt(i, j) = kernel(h, train[static_cast<std::size_t>(i)],
                         train[static_cast<std::size_t>(j)]);
    }
    ktt(i, i) += noise(i) + bljes::kJitter;
  }
  Eigen::MatrixXd kqt(m, n);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      kqt(i, j) = kernel(h, query[static_cast<std::size_t>(i)],
                         train[static_cast<std::size_t>(j)]);
    }
  }
  const Eigen::MatrixXd ktt_inv = ktt.inverse();
  const Eigen::VectorXd resid = y.array() - h.prior_mean;
  out.mean += kqt * ktt_inv * resid;
  out.cov -= kqt * ktt_inv * kqt.transpose();
  return out;
}

// composite Gauss-Legendre quadrature with 32 nodes per panel
inline double integrate(const std::function<double(double)>& f, double lo,
                        double hi, int panels = 64) {
  static const double nodes[16] = {
      0.0483076656877383162, 0.1444719615827964934, 0.2392873622521370745,
      0.3318686022821276497, 0.4213512761306353454, 0.5068999089322293900,
      0.5877157572407623290, 0.6630442669302152010, 0.7321821187402896804,
      0.7944837959679424069, 0.8493676137325699701, 0.8963211557660521240,
      0.9349060759377396892, 0.9647622555875064308, 0.9856115115452683354,
      0.9972638618494815635};
  static const double weights[16] = {
      0.0965400885147278006, 0.0956387200792748594, 0.0938443990808045654,
      0.0911738786957638847, 0.0876520930044038111, 0.0833119242269467552,
      0.0781938957870703065, 0.0723457941088485062, 0.0658222227763618468,
      0.0586840934785355471, 0.0509980592623761762, 0.0428358980222266807,
      0.0342738629130214331, 0.0253920653092620595, 0.0162743947309056706,
      0.0070186100094700966};
  double total = 0.0;
  const double width = (hi - lo) / panels;
  for (int p = 0; p < panels; ++p) {
    const double a = lo + p * width;
    const double mid = a + 0.5 * width;
    const double half = 0.5 * width;
    double acc = 0.0;
    for (int i = 0; i < 16; ++i) {
      acc += weights[i] *
             (f(mid + half * nodes[i]) + f(mid - half * nodes[i]));
    }
    total += acc * half;
  }
  return total;
}

inline double central_difference(const std::function<double(double)>& f,
                                 double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

}  // namespace oracles

#endif  // BLJES_TESTS_ORACLES_HPP
