#ifndef BLJES_BENCHMARKS_HPP
#define BLJES_BENCHMARKS_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "bljes/bilevel.hpp"
#include "bljes/types.hpp"

namespace bljes {

enum class Transform { identity, signed_log1p };

// signed log1p: sign(y) log(1 + |y|); odd and monotone
double apply_transform(double raw, Transform transform);

// Bilevel benchmark problem over the unit hypercube. Evaluators return the
// already ingested values: native formulas rescaled from [0,1]^d, negated
// to the max/max convention where the source is a minimization problem,
// and passed through the output transform. Constraints keep their c >= 0
// feasibility orientation (the transform preserves sign).
struct BenchmarkSpec {
  std::string name;
  int d_x = 1;
  int d_theta = 1;
  int n_upper_constraints = 0;
  int n_lower_constraints = 0;
  std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)> eval_f;
  std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)> eval_g;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)>
      eval_cu;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)>
      eval_cl;
  GridSpec grid;
  Transform transform = Transform::identity;

  double f_at(int ix, int it) const {
    return eval_f(grid.x_grid[static_cast<std::size_t>(ix)],
                  grid.theta_grid[static_cast<std::size_t>(it)]);
  }
  double g_at(int ix, int it) const {
    return eval_g(grid.x_grid[static_cast<std::size_t>(ix)],
                  grid.theta_grid[static_cast<std::size_t>(it)]);
  }
};

// Catalog lookup by "name" or "name:key=val,key=val". Known names:
// gp-prior (params lU, lL, seed, grid, rff), bg, sb, smd01, smd02, smd03,
// smd09, smd10, smd11, smd12 (param grid overrides points per dimension).
BenchmarkSpec make_problem(const std::string& name_and_params);
BenchmarkSpec make_problem(const std::string& name,
                           const std::map<std::string, double>& params);

// f and g are frozen random-feature draws from the zero-mean unit-variance
// Gaussian-kernel prior, deterministic per seed.
BenchmarkSpec gp_prior_problem(double lengthscale_upper, double lengthscale_lower,
                               std::uint64_t seed, int points_per_dim = 100,
                               int rff_dim = 4096);

std::vector<std::string> problem_catalog();

// Exhaustive pool scan: theta*(x) per grid x, the bilevel optimum, the
// normalizing extrema of Eq.-style regret, and per-constraint violation
// normalizers. Constrained problems filter the scans by feasibility and
// fall back to unconstrained argmaxes when a feasible set is empty.
struct GroundTruth {
  double f_star = 0.0;
  int x_star_index = -1;
  std::vector<int> theta_star_table;  // per x index
  double min_f = 0.0;
  Eigen::VectorXd g_at_theta_star;    // per x index
  Eigen::VectorXd min_g_per_x;
  Eigen::MatrixXd f_table;            // n_x by n_theta
  Eigen::MatrixXd g_table;
  std::vector<Eigen::MatrixXd> cu_tables;
  std::vector<Eigen::MatrixXd> cl_tables;
  Eigen::VectorXd max_violation_cu;   // per upper constraint
  Eigen::VectorXd max_violation_cl;
  bool feasibility_fallback = false;
};

GroundTruth compute_ground_truth(const BenchmarkSpec& spec);

}  // namespace bljes

#endif  // BLJES_BENCHMARKS_HPP
