#ifndef BLJES_BILEVEL_HPP
#define BLJES_BILEVEL_HPP

#include <Eigen/Dense>
#include <optional>
#include <utility>
#include <vector>

#include "bljes/rff.hpp"
#include "bljes/rng.hpp"

namespace bljes {

// Tensor candidate grids over [0, 1]^d, inclusive uniform spacing.
// Pool index convention: index = ix * theta_grid.size() + itheta.
struct GridSpec {
  int points_per_dim = 0;
  std::vector<Eigen::VectorXd> x_grid;
  std::vector<Eigen::VectorXd> theta_grid;

  static GridSpec uniform(int d_x, int d_theta, int points_per_dim);

  int n_x() const { return static_cast<int>(x_grid.size()); }
  int n_theta() const { return static_cast<int>(theta_grid.size()); }
  int pool_size() const { return n_x() * n_theta(); }
  int pool_index(int ix, int itheta) const { return ix * n_theta() + itheta; }
  QueryPoint pool_point(int index) const {
    return {x_grid[static_cast<std::size_t>(index / n_theta())],
            theta_grid[static_cast<std::size_t>(index % n_theta())]};
  }
};

// One Monte-Carlo draw of the sampled bilevel optimum.
struct OptimumSample {
  Eigen::VectorXd x_star;
  Eigen::VectorXd theta_star;
  double f_star = 0.0;
  double g_star = 0.0;
  int x_index = -1;      // grid indices in pool mode, -1 in continuous mode
  int theta_index = -1;
  const PathSample* path_f = nullptr;
  const PathSample* path_g = nullptr;
};

inline Dataset augment(const Dataset& dataset, const OptimumSample& sample) {
  return augment(dataset, {sample.x_star, sample.theta_star}, sample.f_star,
                 sample.g_star);
}

// grid theta maximizing g(x, .); ties broken by lowest grid index
std::pair<Eigen::VectorXd, double> inner_argmax_grid(
    const PathSample& path_g, const Eigen::VectorXd& x,
    const std::vector<Eigen::VectorXd>& theta_grid);

// Full grid solve. Keeps the path-value tables and the per-x inner argmax
// so acquisition construction can reuse them.
struct GridSolve {
  OptimumSample opt;
  std::vector<int> theta_star_index;  // per x-grid index
  Eigen::MatrixXd f_values;           // n_x by n_theta
  Eigen::MatrixXd g_values;
};

GridSolve solve_bilevel_grid_full(const PathSample& path_f,
                                  const PathSample& path_g, const GridSpec& grid);

OptimumSample solve_bilevel_grid(const PathSample& path_f,
                                 const PathSample& path_g, const GridSpec& grid);

// Constrained variant: the inner argmax is restricted to grid thetas with
// all sampled lower-constraint paths >= 0, the outer argmax to x with all
// sampled upper-constraint paths >= 0 at (x, theta*(x)). Falls back to the
// unconstrained argmax when a feasibility set is empty.
struct ConstrainedGridSolve {
  GridSolve base;
  std::vector<Eigen::MatrixXd> cu_values;  // per upper constraint, n_x x n_theta
  std::vector<Eigen::MatrixXd> cl_values;
  bool feasibility_fallback = false;
};

ConstrainedGridSolve solve_bilevel_grid_constrained(
    const PathSample& path_f, const PathSample& path_g,
    const std::vector<PathSample>& paths_cu,
    const std::vector<PathSample>& paths_cl, const GridSpec& grid);

// d theta*(x) / dx^T = -[d2g/dth dth^T]^{-1} d2g/dth dx^T via the implicit
// function theorem; nullopt when the inner Hessian is singular
std::optional<Eigen::MatrixXd> theta_star_jacobian(const PathSample& path_g,
                                                   const Eigen::VectorXd& x,
                                                   const Eigen::VectorXd& theta_star);

// d f(x, theta*(x)) / dx = df/dx + (dtheta*/dx^T)^T df/dtheta
std::optional<Eigen::VectorXd> hyper_gradient(const PathSample& path_f,
                                              const PathSample& path_g,
                                              const Eigen::VectorXd& x,
                                              const Eigen::VectorXd& theta_star);

struct ContinuousSolveOptions {
  int n_starts = 10;
  int max_inner_steps = 200;
  int max_outer_steps = 120;
  double grad_tol = 1e-8;
  // coarse presolve; its optimum seeds one trajectory, is kept as a
  // candidate, and serves as the fallback when every inner Hessian is
  // singular. 0 picks 20 per dimension up to two total dims, 8 beyond.
  int presolve_per_dim = 0;
  // optional explicit start points for the outer ascent (x coordinates);
  // appended to the low-discrepancy starts
  std::vector<Eigen::VectorXd> extra_starts;
};

OptimumSample solve_bilevel_continuous(const PathSample& path_f,
                                       const PathSample& path_g, int d_x,
                                       int d_theta, RngStream& rng,
                                       const ContinuousSolveOptions& opts = {});

// deterministic low-discrepancy sequence for multistart points
double halton(std::uint64_t index, std::uint64_t base);

// inner maximization of g(x, .) by projected gradient ascent
Eigen::VectorXd inner_ascent(const PathSample& path_g, const Eigen::VectorXd& x,
                             Eigen::VectorXd theta, int max_steps,
                             double grad_tol);

// semi-global inner solve: scan a theta grid, refine the best cell by
// projected ascent
Eigen::VectorXd inner_solve_scan(const PathSample& path_g,
                                 const Eigen::VectorXd& x,
                                 const std::vector<Eigen::VectorXd>& theta_scan,
                                 int max_steps, double grad_tol);

}  // namespace bljes

#endif  // BLJES_BILEVEL_HPP
