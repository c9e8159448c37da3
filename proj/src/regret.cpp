#include "bljes/regret.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bljes {

double RegretComponents::aggregate() const {
  double m = std::max(r_f, r_g);
  for (Eigen::Index i = 0; i < r_c.size(); ++i) m = std::max(m, r_c(i));
  return m;
}

namespace {

double safe_ratio(double num, double den) {
  if (!(den > 0.0)) return 0.0;
  return num / den;
}

int grid_index_of(const std::vector<Eigen::VectorXd>& grid,
                  const Eigen::VectorXd& v) {
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if ((grid[i] - v).lpNorm<Eigen::Infinity>() < 1e-12) {
      return static_cast<int>(i);
    }
  }
  return -1;
}

}  // namespace

RegretComponents regret_components_at(int ix, int it, const BenchmarkSpec&,
                                      const GroundTruth& gt) {
  RegretComponents rc;
  rc.r_f = safe_ratio(std::max(0.0, gt.f_star - gt.f_table(ix, it)),
                      gt.f_star - gt.min_f);
  // the feasible theta*(x) may not be the unconstrained argmax, so the
  // numerator is clamped like r_f
  rc.r_g = safe_ratio(std::max(0.0, gt.g_at_theta_star(ix) - gt.g_table(ix, it)),
                      gt.g_at_theta_star(ix) - gt.min_g_per_x(ix));

  const auto n_cu = static_cast<Eigen::Index>(gt.cu_tables.size());
  const auto n_cl = static_cast<Eigen::Index>(gt.cl_tables.size());
  rc.r_c.resize(n_cu + n_cl);
  for (Eigen::Index n = 0; n < n_cu; ++n) {
    rc.r_c(n) = safe_ratio(
        std::max(0.0, -gt.cu_tables[static_cast<std::size_t>(n)](ix, it)),
        gt.max_violation_cu(n));
  }
  for (Eigen::Index m = 0; m < n_cl; ++m) {
    rc.r_c(n_cu + m) = safe_ratio(
        std::max(0.0, -gt.cl_tables[static_cast<std::size_t>(m)](ix, it)),
        gt.max_violation_cl(m));
  }
  return rc;
}

RegretComponents regret_components(const QueryPoint& point,
                                   const BenchmarkSpec& spec,
                                   const GroundTruth& gt) {
  const int ix = grid_index_of(spec.grid.x_grid, point.x);
  const int it = grid_index_of(spec.grid.theta_grid, point.theta);
  if (ix < 0 || it < 0) {
    throw std::invalid_argument("regret_components: point is not on the pool");
  }
  return regret_components_at(ix, it, spec, gt);
}

RegretComponents regret_components_continuous(const QueryPoint& point,
                                              const BenchmarkSpec& spec,
                                              const GroundTruth& gt) {
  RegretComponents rc;
  const double f_val = spec.eval_f(point.x, point.theta);
  rc.r_f = safe_ratio(std::max(0.0, gt.f_star - f_val), gt.f_star - gt.min_f);

  // lower-level curve and normalizers from the reference-grid scan at the
  // nearest grid x; true functions are only evaluated at the queried point
  int ix = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < spec.grid.x_grid.size(); ++i) {
    const double d = (spec.grid.x_grid[i] - point.x).squaredNorm();
    if (d < best_d) {
      best_d = d;
      ix = static_cast<int>(i);
    }
  }
  const double g_val = spec.eval_g(point.x, point.theta);
  rc.r_g = safe_ratio(std::max(0.0, gt.g_at_theta_star(ix) - g_val),
                      gt.g_at_theta_star(ix) - gt.min_g_per_x(ix));

  const auto n_cu = static_cast<Eigen::Index>(gt.cu_tables.size());
  const auto n_cl = static_cast<Eigen::Index>(gt.cl_tables.size());
  rc.r_c.resize(n_cu + n_cl);
  if (n_cu > 0) {
    const Eigen::VectorXd c = spec.eval_cu(point.x, point.theta);
    for (Eigen::Index n = 0; n < n_cu; ++n) {
      rc.r_c(n) = safe_ratio(std::max(0.0, -c(n)), gt.max_violation_cu(n));
    }
  }
  if (n_cl > 0) {
    const Eigen::VectorXd c = spec.eval_cl(point.x, point.theta);
    for (Eigen::Index m = 0; m < n_cl; ++m) {
      rc.r_c(n_cu + m) = safe_ratio(std::max(0.0, -c(m)), gt.max_violation_cl(m));
    }
  }
  return rc;
}

std::vector<double> bilevel_simple_regret(const std::vector<QueryPoint>& points,
                                          const BenchmarkSpec& spec,
                                          const GroundTruth& gt) {
  if (points.empty()) {
    throw std::invalid_argument("bilevel_simple_regret: empty point list");
  }
  std::vector<double> out;
  out.reserve(points.size());
  double running = std::numeric_limits<double>::infinity();
  for (const auto& p : points) {
    running = std::min(running, regret_components(p, spec, gt).aggregate());
    out.push_back(running);
  }
  return out;
}

}  // namespace bljes
