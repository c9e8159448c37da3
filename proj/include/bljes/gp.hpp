#ifndef BLJES_GP_HPP
#define BLJES_GP_HPP

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "bljes/rng.hpp"
#include "bljes/types.hpp"

namespace bljes {

inline constexpr double kNoiseFloor = 1e-6;
inline constexpr double kLengthscaleMin = 1e-3;
inline constexpr double kLengthscaleMax = 1e3;
inline constexpr double kOutputScaleMin = 1e-6;
inline constexpr double kOutputScaleMax = 1e6;
inline constexpr double kJitter = 1e-8;
inline constexpr double kJitterMax = 1e-4;
inline constexpr double kAugmentedNoise = 1e-8;

struct GpHyperparams {
  double prior_mean = 0.0;
  double lengthscale = 0.5;
  double output_scale = 1.0;   // prior variance k(z, z)
  double noise_variance = kNoiseFloor;
};

GpHyperparams clamp_to_bounds(GpHyperparams h);

// isotropic Gaussian kernel over the concatenated (x, theta) input
double kernel_value(const GpHyperparams& hyper, const Eigen::VectorXd& a,
                    const Eigen::VectorXd& b);

struct JointGaussian {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

// Conditions a joint Gaussian on coordinate `observed_index` taking
// `value`, observed with variance `obs_noise_variance`. The result is over
// the remaining coordinates. Throws DegenerateConditioning when the total
// variance at the observed index vanishes.
JointGaussian condition(const JointGaussian& joint, int observed_index,
                        double value, double obs_noise_variance);

// Cached per-point solve against a model: v = L^{-1} k(Z, z). Posterior
// covariances between two points reduce to k(z, z') - v . v'.
struct SolvedPoint {
  Eigen::VectorXd point;
  Eigen::VectorXd v;
  double mean = 0.0;
  double variance = 0.0;
};

class GpModel {
 public:
  // inputs: one training point per row (n x d). noise: per-point observation
  // variance on the kernel diagonal; jitter is added on top and escalated
  // x10 up to 1e-4 if the factorization fails.
  GpModel(GpHyperparams hyper, Eigen::MatrixXd inputs, Eigen::VectorXd targets,
          Eigen::VectorXd noise);
  GpModel(GpHyperparams hyper, Eigen::MatrixXd inputs, Eigen::VectorXd targets);
  explicit GpModel(GpHyperparams hyper);  // empty training set -> prior

  int size() const { return static_cast<int>(targets_.size()); }
  int dim() const { return static_cast<int>(inputs_.cols()); }
  const GpHyperparams& hyper() const { return hyper_; }
  const Eigen::MatrixXd& inputs() const { return inputs_; }
  const Eigen::VectorXd& targets() const { return targets_; }
  const Eigen::MatrixXd& chol() const { return chol_; }
  const Eigen::VectorXd& alpha() const { return alpha_; }

  std::pair<double, double> posterior_at(const Eigen::VectorXd& z) const;
  std::pair<double, double> posterior_at(const QueryPoint& p) const {
    return posterior_at(p.joint());
  }

  SolvedPoint solve_point(const Eigen::VectorXd& z) const;
  double posterior_cov(const SolvedPoint& a, const SolvedPoint& b) const;

  JointGaussian joint_posterior(const std::vector<Eigen::VectorXd>& points) const;
  JointGaussian joint_posterior(const std::vector<QueryPoint>& points) const;

  // new model with one extra observation, hyperparameters unchanged
  GpModel with_observation(const Eigen::VectorXd& z, double value,
                           double noise_variance) const;

  double log_marginal_likelihood() const;

  // k(Z, z) into out (size n)
  void kernel_vector(const Eigen::VectorXd& z, Eigen::VectorXd& out) const;

 private:
  void factorize();

  GpHyperparams hyper_;
  Eigen::MatrixXd inputs_;   // n x d, one point per row
  Eigen::VectorXd targets_;
  Eigen::VectorXd noise_;
  Eigen::MatrixXd chol_;     // lower factor of K + diag(noise) + jitter I
  Eigen::VectorXd alpha_;    // (K + diag(noise))^{-1} (y - prior_mean)
  double log_det_half_ = 0.0;
};

struct FitResult {
  GpHyperparams hyper;
  double log_marginal = 0.0;
  bool fallback = false;  // set when every restart failed and init was kept
};

// Multi-start ascent of the log marginal likelihood in log-parameter space.
// Never returns hyperparameters with a lower likelihood than `init`.
FitResult fit_hyperparameters(const Eigen::MatrixXd& inputs,
                              const Eigen::VectorXd& targets,
                              const GpHyperparams& init, RngStream& rng,
                              int restarts = 5);

double log_marginal_likelihood(const GpHyperparams& hyper,
                               const Eigen::MatrixXd& inputs,
                               const Eigen::VectorXd& targets);

// D_t^+ : dataset with one sampled optimum appended as a noiseless record
Dataset augment(const Dataset& dataset, const QueryPoint& point, double f_star,
                double g_star);

// model over a dataset level; includes augmented records with kAugmentedNoise
enum class Level { upper, lower };
GpModel model_from_dataset(const Dataset& dataset, Level level,
                           const GpHyperparams& hyper, bool include_augmented);

}  // namespace bljes

#endif  // BLJES_GP_HPP
