#ifndef BLJES_ACQUISITION_HPP
#define BLJES_ACQUISITION_HPP

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <vector>

#include "bljes/bilevel.hpp"
#include "bljes/gp.hpp"
#include "bljes/rff.hpp"
#include "bljes/rng.hpp"

namespace bljes {

inline constexpr double kSdFloor = 1e-9;
inline constexpr double kLogProbFloor = -690.77552789821368;  // log 1e-300
inline constexpr double kContinuousEqualityTol = 1e-9;

// Moments of the truncated-density factors:
//   (m1, s1): value at the truncation point | candidate observation, optimum
//   (m2, s2): value at the truncation point | optimum
//   (m3, s3): candidate observation | optimum
// all conditioned on the dataset through the underlying model.
struct TruncatedMoments {
  double m1 = 0, s1 = 1;
  double m2 = 0, s2 = 1;
  double m3 = 0, s3 = 1;
};

// Posterior pieces for the (truncation, candidate, optimum) triple given
// the current dataset.
struct TriplePosterior {
  double mu_tr = 0, var_tr = 0;
  double mu_cd = 0, var_cd = 0;
  double mu_op = 0, var_op = 0;
  double cov_tr_cd = 0, cov_tr_op = 0, cov_cd_op = 0;
};

// Closed-form rank-two conditioning on (candidate observation, optimum
// value). Returns nullopt when the optimum's posterior variance is
// degenerate (duplicated points); callers fall back to the unconditioned
// branch.
std::optional<TruncatedMoments> assemble_truncated_moments(
    const TriplePosterior& t, double noise_variance, double opt_value, double y,
    double output_scale);

// Upper-level moments: truncation point (x, theta*(x)) with theta*(x) the
// sample's inner argmax at candidate.x.
std::optional<TruncatedMoments> truncated_moments_f(
    const GpModel& model_f, const OptimumSample& sample,
    const QueryPoint& candidate, const Eigen::VectorXd& theta_star_of_x,
    double y_f);

// Lower-level moments: truncation point (x*, theta).
std::optional<TruncatedMoments> truncated_moments_g(const GpModel& model_g,
                                                    const OptimumSample& sample,
                                                    const QueryPoint& candidate,
                                                    double y_g);

// log q(y) for the truncated observation density; the at-optimum branch
// drops the truncation factors.
double truncated_log_density_f(const TruncatedMoments& m, double y, double f_star,
                               bool at_optimum_x);
double truncated_log_density_g(const TruncatedMoments& m, double y, double g_star,
                               bool at_optimum_theta);

// Constraint-aware truncation probabilities:
//   1 - (1 - Phi((v - m)/s)) prod_n (1 - Phi((0 - mc_n)/sc_n))
struct ConstraintTruncation {
  TruncatedMoments objective_moments;
  Eigen::VectorXd constraint_means;      // conditioned on the constraint draws
  Eigen::VectorXd constraint_sds;
  Eigen::VectorXd constraint_means_unc;  // plain predictive at the truncation point
  Eigen::VectorXd constraint_sds_unc;
};

double constrained_truncation_prob_upper(const ConstraintTruncation& ct,
                                         double f_star, bool use_conditioned);
double constrained_truncation_prob_lower(const ConstraintTruncation& ct,
                                         double g_star, bool use_conditioned);

// fitted models for the current dataset, one per modeled function
struct Models {
  GpModel f;
  GpModel g;
  std::vector<GpModel> cu;
  std::vector<GpModel> cl;
};

struct BundleConfig {
  int k_samples = 30;
  int rff_dim = 1000;
  bool shared_feature_map = false;
  bool constrained = false;
};

// One Monte-Carlo draw of the optimum plus the pool tables built from the
// same sampled paths (path values, inner-argmax table, observation draws).
struct McSample {
  FeatureMap map_f, map_g;
  std::vector<FeatureMap> maps_cu, maps_cl;
  PathSample path_f, path_g;
  std::vector<PathSample> paths_cu, paths_cl;
  OptimumSample opt;
  std::vector<int> theta_star_index;       // per x-grid index
  Eigen::MatrixXd f_values, g_values;      // n_x by n_theta
  std::vector<Eigen::MatrixXd> cu_values, cl_values;
  Eigen::VectorXd y_f, y_g;                // observation draws per pool index
  std::vector<Eigen::VectorXd> y_cu, y_cl;
  double eps_f = 0, eps_g = 0;             // fixed noise draws, continuous mode
  bool feasibility_fallback = false;
};

struct McBundle {
  std::vector<std::unique_ptr<McSample>> samples;
  int k() const { return static_cast<int>(samples.size()); }
};

McBundle build_bundle(const Models& models, const GridSpec& grid,
                      const BundleConfig& config, RngStream& rng);

// Continuous-domain bundle: optima from the gradient-based bilevel solver,
// no pool tables.
McBundle build_bundle_continuous(const Models& models, int d_x, int d_theta,
                                 const BundleConfig& config, RngStream& rng);

// Per-candidate Monte-Carlo level terms over the whole pool (Eq. 5 / Eq. 6
// integrands; their sum is the coupled estimate).
struct AcquisitionScores {
  Eigen::VectorXd term_f;
  Eigen::VectorXd term_g;
};

AcquisitionScores score_pool(const Models& models, const GridSpec& grid,
                             const McBundle& bundle, bool constrained);

// single-candidate estimates (pool index resolves the branch tests exactly)
double bljes_coupled(int pool_index, const Models& models, const GridSpec& grid,
                     const McBundle& bundle);
double bljes_decoupled_f(int pool_index, const Models& models,
                         const GridSpec& grid, const McBundle& bundle);
double bljes_decoupled_g(int pool_index, const Models& models,
                         const GridSpec& grid, const McBundle& bundle);
double bljes_constrained(int pool_index, const Models& models,
                         const GridSpec& grid, const McBundle& bundle);

enum class AcqMode { coupled, decoupled, constrained };

struct Selection {
  int pool_index = -1;
  Level level = Level::upper;  // meaningful in decoupled mode only
  bool both_levels = true;
};

Selection select_next(const GridSpec& pool, const Models& models,
                      const McBundle& bundle, AcqMode mode);

// Continuous-domain selection: multi-start ascent of the sampled lower
// bound, hypergradient through the per-sample inner argmax.
struct ContinuousSelection {
  QueryPoint point;
  Level level = Level::upper;
  bool both_levels = true;
};

ContinuousSelection select_next_continuous(const Models& models,
                                           const McBundle& bundle, int d_x,
                                           int d_theta, AcqMode mode,
                                           RngStream& rng);

// continuous-mode estimate at an arbitrary candidate (used by the selector
// and as the FD target for its gradients)
double acquisition_value_continuous(const QueryPoint& candidate,
                                    const Models& models, const McBundle& bundle,
                                    Level level, bool both_levels);

}  // namespace bljes

#endif  // BLJES_ACQUISITION_HPP
