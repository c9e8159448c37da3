#ifndef BLJES_RFF_HPP
#define BLJES_RFF_HPP

#include <Eigen/Dense>

#include "bljes/gp.hpp"
#include "bljes/rng.hpp"
#include "bljes/types.hpp"

namespace bljes {

// Random Fourier feature map for the isotropic Gaussian kernel:
// phi(z) = amplitude * cos(frequencies z + phases), so that
// phi(z) . phi(z') approximates k(z, z').
struct FeatureMap {
  Eigen::MatrixXd frequencies;  // D x d, one feature per row
  Eigen::VectorXd phases;       // D, in [0, 2pi)
  double amplitude = 0.0;       // sqrt(2 * output_scale / D)

  int feature_count() const { return static_cast<int>(phases.size()); }
  int dim() const { return static_cast<int>(frequencies.cols()); }
};

// One posterior (or prior) draw: z -> prior_mean + phi(z) . weights.
struct PathSample {
  const FeatureMap* map = nullptr;
  Eigen::VectorXd weights;
  double prior_mean = 0.0;
};

// frequencies ~ N(0, lengthscale^{-2}) per coordinate (spectral density of
// the Gaussian kernel), phases ~ U[0, 2pi)
FeatureMap draw_feature_map(const GpHyperparams& hyper, int feature_count,
                            int dim, RngStream& rng);

// Weights from the Bayesian-linear-model posterior given the model's
// training data. Uses the D x D normal equations when D <= n, otherwise the
// n x n dual (pathwise) form; both are the same posterior.
PathSample draw_path(const GpModel& model, const FeatureMap& map, RngStream& rng);

// Prior draw (weights ~ N(0, I), zero mean); used by the GP-prior benchmark.
PathSample draw_prior_path(const FeatureMap& map, RngStream& rng);

double eval_path(const PathSample& path, const Eigen::VectorXd& z);
inline double eval_path(const PathSample& path, const QueryPoint& p) {
  return eval_path(path, p.joint());
}

// values at many points, one point per row
void eval_path_batch(const PathSample& path, const Eigen::MatrixXd& points,
                     Eigen::VectorXd& out);

// closed-form trigonometric derivatives (no numerical differentiation)
Eigen::VectorXd grad_path(const PathSample& path, const Eigen::VectorXd& z);
inline Eigen::VectorXd grad_path(const PathSample& path, const QueryPoint& p) {
  return grad_path(path, p.joint());
}

// d_theta x d_theta Hessian block in the theta coordinates
Eigen::MatrixXd hess_path_theta(const PathSample& path, const Eigen::VectorXd& z,
                                int d_x, int d_theta);
// d_theta x d_x mixed block d2/dtheta dx
Eigen::MatrixXd cross_hess_path(const PathSample& path, const Eigen::VectorXd& z,
                                int d_x, int d_theta);

}  // namespace bljes

#endif  // BLJES_RFF_HPP
