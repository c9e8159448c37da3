#include "bljes/bilevel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bljes {

namespace {

// all multi-index combinations of a per-dimension 1-D grid
std::vector<Eigen::VectorXd> tensor_grid(int dim, int points_per_dim) {
  Eigen::VectorXd axis(points_per_dim);
  if (points_per_dim == 1) {
    axis(0) = 0.5;
  } else {
    for (int i = 0; i < points_per_dim; ++i) {
      axis(i) = static_cast<double>(i) / static_cast<double>(points_per_dim - 1);
    }
  }
  std::vector<Eigen::VectorXd> out;
  const auto total = static_cast<std::size_t>(std::pow(points_per_dim, dim));
  out.reserve(total);
  std::vector<int> idx(static_cast<std::size_t>(dim), 0);
  while (true) {
    Eigen::VectorXd p(dim);
    for (int a = 0; a < dim; ++a) p(a) = axis(idx[static_cast<std::size_t>(a)]);
    out.push_back(std::move(p));
    int a = dim - 1;
    while (a >= 0 && ++idx[static_cast<std::size_t>(a)] == points_per_dim) {
      idx[static_cast<std::size_t>(a)] = 0;
      --a;
    }
    if (a < 0) break;
  }
  return out;
}

Eigen::VectorXd joint_of(const Eigen::VectorXd& x, const Eigen::VectorXd& theta) {
  Eigen::VectorXd z(x.size() + theta.size());
  z << x, theta;
  return z;
}

Eigen::VectorXd clamp01(Eigen::VectorXd v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    v(i) = std::min(1.0, std::max(0.0, v(i)));
  }
  return v;
}

}  // namespace

GridSpec GridSpec::uniform(int d_x, int d_theta, int points_per_dim) {
  GridSpec g;
  g.points_per_dim = points_per_dim;
  g.x_grid = tensor_grid(d_x, points_per_dim);
  g.theta_grid = tensor_grid(d_theta, points_per_dim);
  return g;
}

std::pair<Eigen::VectorXd, double> inner_argmax_grid(
    const PathSample& path_g, const Eigen::VectorXd& x,
    const std::vector<Eigen::VectorXd>& theta_grid) {
  if (theta_grid.empty()) {
    throw std::invalid_argument("inner_argmax_grid: empty theta grid");
  }
  int best = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < theta_grid.size(); ++i) {
    const double v = eval_path(path_g, joint_of(x, theta_grid[i]));
    if (v > best_val) {
      best_val = v;
      best = static_cast<int>(i);
    }
  }
  return {theta_grid[static_cast<std::size_t>(best)], best_val};
}

GridSolve solve_bilevel_grid_full(const PathSample& path_f,
                                  const PathSample& path_g, const GridSpec& grid) {
  const int nx = grid.n_x();
  const int nt = grid.n_theta();
  if (nx == 0 || nt == 0) {
    throw std::invalid_argument("solve_bilevel_grid: empty grid");
  }
  GridSolve out;
  out.f_values.resize(nx, nt);
  out.g_values.resize(nx, nt);
  out.theta_star_index.assign(static_cast<std::size_t>(nx), 0);

  for (int ix = 0; ix < nx; ++ix) {
    int best_t = 0;
    double best_g = -std::numeric_limits<double>::infinity();
    for (int it = 0; it < nt; ++it) {
      const Eigen::VectorXd z =
          joint_of(grid.x_grid[static_cast<std::size_t>(ix)],
                   grid.theta_grid[static_cast<std::size_t>(it)]);
      out.f_values(ix, it) = eval_path(path_f, z);
      out.g_values(ix, it) = eval_path(path_g, z);
      if (out.g_values(ix, it) > best_g) {
        best_g = out.g_values(ix, it);
        best_t = it;
      }
    }
    out.theta_star_index[static_cast<std::size_t>(ix)] = best_t;
  }

  int best_x = 0;
  double best_f = -std::numeric_limits<double>::infinity();
  for (int ix = 0; ix < nx; ++ix) {
    const double v = out.f_values(ix, out.theta_star_index[static_cast<std::size_t>(ix)]);
    if (v > best_f) {
      best_f = v;
      best_x = ix;
    }
  }
  const int best_t = out.theta_star_index[static_cast<std::size_t>(best_x)];
  out.opt.x_star = grid.x_grid[static_cast<std::size_t>(best_x)];
  out.opt.theta_star = grid.theta_grid[static_cast<std::size_t>(best_t)];
  out.opt.f_star = out.f_values(best_x, best_t);
  out.opt.g_star = out.g_values(best_x, best_t);
  out.opt.x_index = best_x;
  out.opt.theta_index = best_t;
  out.opt.path_f = &path_f;
  out.opt.path_g = &path_g;
  return out;
}

OptimumSample solve_bilevel_grid(const PathSample& path_f,
                                 const PathSample& path_g, const GridSpec& grid) {
  return solve_bilevel_grid_full(path_f, path_g, grid).opt;
}

ConstrainedGridSolve solve_bilevel_grid_constrained(
    const PathSample& path_f, const PathSample& path_g,
    const std::vector<PathSample>& paths_cu,
    const std::vector<PathSample>& paths_cl, const GridSpec& grid) {
  if (paths_cu.empty() && paths_cl.empty()) {
    ConstrainedGridSolve out;
    out.base = solve_bilevel_grid_full(path_f, path_g, grid);
    return out;
  }
  const int nx = grid.n_x();
  const int nt = grid.n_theta();
  ConstrainedGridSolve out;
  out.base.f_values.resize(nx, nt);
  out.base.g_values.resize(nx, nt);
  out.base.theta_star_index.assign(static_cast<std::size_t>(nx), 0);
  out.cu_values.resize(paths_cu.size());
  out.cl_values.resize(paths_cl.size());
  for (auto& m : out.cu_values) m.resize(nx, nt);
  for (auto& m : out.cl_values) m.resize(nx, nt);

  for (int ix = 0; ix < nx; ++ix) {
    for (int it = 0; it < nt; ++it) {
      const Eigen::VectorXd z =
          joint_of(grid.x_grid[static_cast<std::size_t>(ix)],
                   grid.theta_grid[static_cast<std::size_t>(it)]);
      out.base.f_values(ix, it) = eval_path(path_f, z);
      out.base.g_values(ix, it) = eval_path(path_g, z);
      for (std::size_t c = 0; c < paths_cu.size(); ++c) {
        out.cu_values[c](ix, it) = eval_path(paths_cu[c], z);
      }
      for (std::size_t c = 0; c < paths_cl.size(); ++c) {
        out.cl_values[c](ix, it) = eval_path(paths_cl[c], z);
      }
    }
  }

  auto lower_feasible = [&](int ix, int it) {
    for (const auto& m : out.cl_values) {
      if (m(ix, it) < 0.0) return false;
    }
    return true;
  };
  auto upper_feasible = [&](int ix, int it) {
    for (const auto& m : out.cu_values) {
      if (m(ix, it) < 0.0) return false;
    }
    return true;
  };

  for (int ix = 0; ix < nx; ++ix) {
    int best_t = -1;
    double best_g = -std::numeric_limits<double>::infinity();
    for (int it = 0; it < nt; ++it) {
      if (!lower_feasible(ix, it)) continue;
      if (out.base.g_values(ix, it) > best_g) {
        best_g = out.base.g_values(ix, it);
        best_t = it;
      }
    }
    if (best_t < 0) {
      out.feasibility_fallback = true;
      Eigen::Index arg;
      out.base.g_values.row(ix).maxCoeff(&arg);
      // lowest-index tie break to match the scan convention
      for (Eigen::Index it = 0; it < nt; ++it) {
        if (out.base.g_values(ix, it) == out.base.g_values(ix, arg)) {
          arg = it;
          break;
        }
      }
      best_t = static_cast<int>(arg);
    }
    out.base.theta_star_index[static_cast<std::size_t>(ix)] = best_t;
  }

  int best_x = -1;
  double best_f = -std::numeric_limits<double>::infinity();
  for (int ix = 0; ix < nx; ++ix) {
    const int it = out.base.theta_star_index[static_cast<std::size_t>(ix)];
    if (!upper_feasible(ix, it)) continue;
    if (out.base.f_values(ix, it) > best_f) {
      best_f = out.base.f_values(ix, it);
      best_x = ix;
    }
  }
  if (best_x < 0) {
    out.feasibility_fallback = true;
    for (int ix = 0; ix < nx; ++ix) {
      const int it = out.base.theta_star_index[static_cast<std::size_t>(ix)];
      if (out.base.f_values(ix, it) > best_f) {
        best_f = out.base.f_values(ix, it);
        best_x = ix;
      }
    }
  }
  const int best_t = out.base.theta_star_index[static_cast<std::size_t>(best_x)];
  out.base.opt.x_star = grid.x_grid[static_cast<std::size_t>(best_x)];
  out.base.opt.theta_star = grid.theta_grid[static_cast<std::size_t>(best_t)];
  out.base.opt.f_star = out.base.f_values(best_x, best_t);
  out.base.opt.g_star = out.base.g_values(best_x, best_t);
  out.base.opt.x_index = best_x;
  out.base.opt.theta_index = best_t;
  out.base.opt.path_f = &path_f;
  out.base.opt.path_g = &path_g;
  return out;
}

std::optional<Eigen::MatrixXd> theta_star_jacobian(const PathSample& path_g,
                                                   const Eigen::VectorXd& x,
                                                   const Eigen::VectorXd& theta_star) {
  const int d_x = static_cast<int>(x.size());
  const int d_t = static_cast<int>(theta_star.size());
  const Eigen::VectorXd z = joint_of(x, theta_star);
  const Eigen::MatrixXd h_tt = hess_path_theta(path_g, z, d_x, d_t);
  const Eigen::MatrixXd h_tx = cross_hess_path(path_g, z, d_x, d_t);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h_tt);
  const double lo = es.eigenvalues().cwiseAbs().minCoeff();
  const double hi = es.eigenvalues().cwiseAbs().maxCoeff();
  if (!(lo > 0.0) || hi / lo > 1e12) return std::nullopt;

  return Eigen::MatrixXd(-h_tt.ldlt().solve(h_tx));
}

std::optional<Eigen::VectorXd> hyper_gradient(const PathSample& path_f,
                                              const PathSample& path_g,
                                              const Eigen::VectorXd& x,
                                              const Eigen::VectorXd& theta_star) {
  const int d_x = static_cast<int>(x.size());
  const int d_t = static_cast<int>(theta_star.size());
  const auto jac = theta_star_jacobian(path_g, x, theta_star);
  if (!jac.has_value()) return std::nullopt;
  const Eigen::VectorXd g = grad_path(path_f, joint_of(x, theta_star));
  const Eigen::VectorXd gf_x = g.head(d_x);
  const Eigen::VectorXd gf_t = g.tail(d_t);
  return Eigen::VectorXd(gf_x + jac->transpose() * gf_t);
}

double halton(std::uint64_t index, std::uint64_t base) {
  double f = 1.0;
  double r = 0.0;
  std::uint64_t i = index;
  while (i > 0) {
    f /= static_cast<double>(base);
    r += f * static_cast<double>(i % base);
    i /= base;
  }
  return r;
}

Eigen::VectorXd inner_ascent(const PathSample& path_g, const Eigen::VectorXd& x,
                             Eigen::VectorXd theta, int max_steps,
                             double grad_tol) {
  const int d_t = static_cast<int>(theta.size());
  double value = eval_path(path_g, joint_of(x, theta));
  double step = 0.2;
  for (int it = 0; it < max_steps; ++it) {
    const Eigen::VectorXd g =
        grad_path(path_g, joint_of(x, theta)).tail(d_t);
    // projected direction; at an active bound the raw gradient may point out
    const Eigen::VectorXd probe = clamp01(theta + g);
    if ((probe - theta).norm() < grad_tol) break;
    bool accepted = false;
    for (int half = 0; half < 30; ++half) {
      Eigen::VectorXd trial = clamp01(theta + step * g);
      const double tv = eval_path(path_g, joint_of(x, trial));
      if (tv > value) {
        theta = std::move(trial);
        value = tv;
        step *= 1.3;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted || step < 1e-14) break;
  }
  return theta;
}

Eigen::VectorXd inner_solve_scan(const PathSample& path_g,
                                 const Eigen::VectorXd& x,
                                 const std::vector<Eigen::VectorXd>& theta_scan,
                                 int max_steps, double grad_tol) {
  const auto [theta0, v0] = inner_argmax_grid(path_g, x, theta_scan);
  (void)v0;
  return inner_ascent(path_g, x, theta0, max_steps, grad_tol);
}

OptimumSample solve_bilevel_continuous(const PathSample& path_f,
                                       const PathSample& path_g, int d_x,
                                       int d_theta, RngStream& rng,
                                       const ContinuousSolveOptions& opts) {
  if (opts.n_starts < 1) {
    throw std::invalid_argument("solve_bilevel_continuous: n_starts must be >= 1");
  }
  // seed-derived offset into the low-discrepancy start sequence
  const std::uint64_t offset = rng.next_u64() % 65536;

  static constexpr std::uint64_t primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29};

  int presolve_n = opts.presolve_per_dim;
  if (presolve_n <= 0) presolve_n = d_x + d_theta <= 2 ? 20 : 8;
  const GridSpec presolve_grid = GridSpec::uniform(d_x, d_theta, presolve_n);
  const GridSolve presolve =
      solve_bilevel_grid_full(path_f, path_g, presolve_grid);

  // the grid optimum stays a candidate so refinement never returns
  // something worse than the coarse solve
  OptimumSample best = presolve.opt;
  best.x_index = -1;
  best.theta_index = -1;
  double best_val = best.f_star;

  auto composite = [&](const Eigen::VectorXd& x, Eigen::VectorXd& theta_out) {
    theta_out = inner_solve_scan(path_g, x, presolve_grid.theta_grid,
                                 opts.max_inner_steps, opts.grad_tol);
    return eval_path(path_f, joint_of(x, theta_out));
  };

  std::vector<Eigen::VectorXd> starts;
  starts.push_back(presolve.opt.x_star);
  for (const auto& s : opts.extra_starts) starts.push_back(s);
  for (int s = 0; static_cast<int>(starts.size()) < opts.n_starts; ++s) {
    Eigen::VectorXd x(d_x);
    for (int a = 0; a < d_x; ++a) {
      x(a) = halton(offset + static_cast<std::uint64_t>(s + 1),
                    primes[static_cast<std::size_t>(a) % 10]);
    }
    starts.push_back(std::move(x));
  }

  for (auto& x : starts) {
    Eigen::VectorXd theta(d_theta);
    double value = composite(x, theta);
    if (value > best_val) {
      best_val = value;
      best.x_star = x;
      best.theta_star = theta;
    }
    double step = 0.2;
    for (int it = 0; it < opts.max_outer_steps; ++it) {
      const auto hg = hyper_gradient(path_f, path_g, x, theta);
      if (!hg.has_value()) break;
      const Eigen::VectorXd probe = clamp01(x + *hg);
      if ((probe - x).norm() < opts.grad_tol) break;
      bool accepted = false;
      for (int half = 0; half < 30; ++half) {
        Eigen::VectorXd xt = clamp01(x + step * (*hg));
        Eigen::VectorXd tt;
        const double tv = composite(xt, tt);
        if (tv > value) {
          x = std::move(xt);
          theta = std::move(tt);
          value = tv;
          step *= 1.3;
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted || step < 1e-14) break;
    }
    if (value > best_val) {
      best_val = value;
      best.x_star = x;
      best.theta_star = theta;
    }
  }

  best.f_star = eval_path(path_f, joint_of(best.x_star, best.theta_star));
  best.g_star = eval_path(path_g, joint_of(best.x_star, best.theta_star));
  best.path_f = &path_f;
  best.path_g = &path_g;
  return best;
}

}  // namespace bljes
