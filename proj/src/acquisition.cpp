#include "bljes/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bljes/stats.hpp"

namespace bljes {

namespace {

double floor_sd(double variance) {
  return std::max(std::sqrt(std::max(variance, 0.0)), kSdFloor);
}

// log(1 - e^L) clamped at the probability floor
double log_one_minus_exp_clamped(double l) {
  if (!(l < 0.0)) return kLogProbFloor;
  return std::max(log1mexp(l), kLogProbFloor);
}

Eigen::VectorXd concat(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  Eigen::VectorXd z(a.size() + b.size());
  z << a, b;
  return z;
}

TriplePosterior triple_from_solved(const GpModel& model, const SolvedPoint& tr,
                                   const SolvedPoint& cd, const SolvedPoint& op) {
  TriplePosterior t;
  t.mu_tr = tr.mean;
  t.var_tr = tr.variance;
  t.mu_cd = cd.mean;
  t.var_cd = cd.variance;
  t.mu_op = op.mean;
  t.var_op = op.variance;
  t.cov_tr_cd = model.posterior_cov(tr, cd);
  t.cov_tr_op = model.posterior_cov(tr, op);
  t.cov_cd_op = model.posterior_cov(cd, op);
  return t;
}

struct ConstraintPiece {
  double m_cond, s_cond;
  double m_unc, s_unc;
};

// rank-one conditioning of the constraint value at the truncation point on
// the constraint observation draw at the candidate
ConstraintPiece constraint_piece(const GpModel& model, const SolvedPoint& tr,
                                 const SolvedPoint& cd, double y_c) {
  ConstraintPiece p;
  p.m_unc = tr.mean;
  p.s_unc = floor_sd(tr.variance);
  const double cov = model.posterior_cov(tr, cd);
  const double denom = cd.variance + model.hyper().noise_variance;
  const double gain = cov / denom;
  p.m_cond = tr.mean + gain * (y_c - cd.mean);
  p.s_cond = floor_sd(tr.variance - gain * cov);
  return p;
}

// Everything needed for one (sample, candidate) per-level term.
struct LevelTermInput {
  TriplePosterior tri;
  double noise_var = 0;
  double output_scale = 1;
  double opt_value = 0;
  double y = 0;
  bool at_optimum = false;
  std::vector<ConstraintPiece> constraints;
};

// log q(y | truncation, D+) - log p(y | D_t), the Monte-Carlo integrand of
// the lower bound. The constraint observation factors cancel exactly since
// constraint models are not augmented, so they never appear here.
double level_log_ratio(const LevelTermInput& in) {
  const auto mm = assemble_truncated_moments(in.tri, in.noise_var, in.opt_value,
                                             in.y, in.output_scale);
  if (!mm.has_value()) return 0.0;  // degenerate optimum: sample is uninformative

  const double sd_dt = std::sqrt(in.tri.var_cd + in.noise_var);
  const double base = log_norm_pdf((in.y - mm->m3) / mm->s3) - std::log(mm->s3) -
                      log_gaussian_density(in.y, in.tri.mu_cd, sd_dt);

  if (in.constraints.empty()) {
    if (in.at_optimum) return base;
    return log_norm_cdf((in.opt_value - mm->m1) / mm->s1) -
           log_norm_cdf((in.opt_value - mm->m2) / mm->s2) + base;
  }

  double lc = 0.0;
  double lu = 0.0;
  if (!in.at_optimum) {
    lc += log_norm_cdf(-(in.opt_value - mm->m1) / mm->s1);
    lu += log_norm_cdf(-(in.opt_value - mm->m2) / mm->s2);
  }
  for (const auto& c : in.constraints) {
    lc += log_norm_cdf(c.m_cond / c.s_cond);
    lu += log_norm_cdf(c.m_unc / c.s_unc);
  }
  return log_one_minus_exp_clamped(lc) - log_one_minus_exp_clamped(lu) + base;
}

std::vector<SolvedPoint> solve_pool(const GpModel& model, const GridSpec& grid) {
  std::vector<SolvedPoint> out;
  out.reserve(static_cast<std::size_t>(grid.pool_size()));
  for (int ix = 0; ix < grid.n_x(); ++ix) {
    for (int it = 0; it < grid.n_theta(); ++it) {
      out.push_back(model.solve_point(
          concat(grid.x_grid[static_cast<std::size_t>(ix)],
                 grid.theta_grid[static_cast<std::size_t>(it)])));
    }
  }
  return out;
}

}  // namespace

std::optional<TruncatedMoments> assemble_truncated_moments(
    const TriplePosterior& t, double noise_variance, double opt_value, double y,
    double output_scale) {
  const double degen = std::max(1e-12, 1e-10 * output_scale);
  if (!(t.var_op > degen)) return std::nullopt;

  TruncatedMoments m;
  const double gain2 = t.cov_tr_op / t.var_op;
  m.m2 = t.mu_tr + gain2 * (opt_value - t.mu_op);
  m.s2 = floor_sd(t.var_tr - gain2 * t.cov_tr_op);

  const double gain3 = t.cov_cd_op / t.var_op;
  m.m3 = t.mu_cd + gain3 * (opt_value - t.mu_op);
  m.s3 = floor_sd(t.var_cd + noise_variance - gain3 * t.cov_cd_op);

  const double a11 = t.var_cd + noise_variance;
  const double a12 = t.cov_cd_op;
  const double a22 = t.var_op;
  const double det = a11 * a22 - a12 * a12;
  if (!(det > 0.0)) return std::nullopt;
  const double r1 = y - t.mu_cd;
  const double r2 = opt_value - t.mu_op;
  const double u1 = (a22 * r1 - a12 * r2) / det;
  const double u2 = (a11 * r2 - a12 * r1) / det;
  m.m1 = t.mu_tr + t.cov_tr_cd * u1 + t.cov_tr_op * u2;
  const double w1 = (a22 * t.cov_tr_cd - a12 * t.cov_tr_op) / det;
  const double w2 = (a11 * t.cov_tr_op - a12 * t.cov_tr_cd) / det;
  m.s1 = floor_sd(t.var_tr - (t.cov_tr_cd * w1 + t.cov_tr_op * w2));
  return m;
}

namespace {

TriplePosterior triple_posterior(const GpModel& model, const Eigen::VectorXd& z_tr,
                                 const Eigen::VectorXd& z_cd,
                                 const Eigen::VectorXd& z_op) {
  const SolvedPoint tr = model.solve_point(z_tr);
  const SolvedPoint cd = model.solve_point(z_cd);
  const SolvedPoint op = model.solve_point(z_op);
  return triple_from_solved(model, tr, cd, op);
}

}  // namespace

std::optional<TruncatedMoments> truncated_moments_f(
    const GpModel& model_f, const OptimumSample& sample,
    const QueryPoint& candidate, const Eigen::VectorXd& theta_star_of_x,
    double y_f) {
  const TriplePosterior t = triple_posterior(
      model_f, concat(candidate.x, theta_star_of_x), candidate.joint(),
      concat(sample.x_star, sample.theta_star));
  return assemble_truncated_moments(t, model_f.hyper().noise_variance,
                                    sample.f_star, y_f,
                                    model_f.hyper().output_scale);
}

std::optional<TruncatedMoments> truncated_moments_g(const GpModel& model_g,
                                                    const OptimumSample& sample,
                                                    const QueryPoint& candidate,
                                                    double y_g) {
  const TriplePosterior t = triple_posterior(
      model_g, concat(sample.x_star, candidate.theta), candidate.joint(),
      concat(sample.x_star, sample.theta_star));
  return assemble_truncated_moments(t, model_g.hyper().noise_variance,
                                    sample.g_star, y_g,
                                    model_g.hyper().output_scale);
}

double truncated_log_density_f(const TruncatedMoments& m, double y, double f_star,
                               bool at_optimum_x) {
  const double base = log_norm_pdf((y - m.m3) / m.s3) - std::log(m.s3);
  if (at_optimum_x) return base;
  return log_norm_cdf((f_star - m.m1) / m.s1) + base -
         log_norm_cdf((f_star - m.m2) / m.s2);
}

double truncated_log_density_g(const TruncatedMoments& m, double y, double g_star,
                               bool at_optimum_theta) {
  return truncated_log_density_f(m, y, g_star, at_optimum_theta);
}

namespace {

double constrained_truncation_prob(const TruncatedMoments& m,
                                   const Eigen::VectorXd& c_means,
                                   const Eigen::VectorXd& c_sds, double value,
                                   bool conditioned) {
  const double mu = conditioned ? m.m1 : m.m2;
  const double sd = conditioned ? m.s1 : m.s2;
  double l = log_norm_cdf(-(value - mu) / sd);
  for (Eigen::Index i = 0; i < c_means.size(); ++i) {
    l += log_norm_cdf(c_means(i) / c_sds(i));
  }
  return std::exp(log_one_minus_exp_clamped(l));
}

}  // namespace

double constrained_truncation_prob_upper(const ConstraintTruncation& ct,
                                         double f_star, bool use_conditioned) {
  return constrained_truncation_prob(
      ct.objective_moments,
      use_conditioned ? ct.constraint_means : ct.constraint_means_unc,
      use_conditioned ? ct.constraint_sds : ct.constraint_sds_unc, f_star,
      use_conditioned);
}

double constrained_truncation_prob_lower(const ConstraintTruncation& ct,
                                         double g_star, bool use_conditioned) {
  return constrained_truncation_prob_upper(ct, g_star, use_conditioned);
}

namespace {

// substream tags for bundle construction; keyed derivation keeps sibling
// streams independent of each other's draw counts
enum BundleTag : std::uint64_t {
  kTagMapF = 1,
  kTagPathF,
  kTagMapG,
  kTagPathG,
  kTagYNoiseF,
  kTagYNoiseG,
  kTagMapCu,
  kTagPathCu,
  kTagMapCl,
  kTagPathCl,
  kTagYNoiseCu,
  kTagYNoiseCl,
  kTagEps,
  kTagContinuousSolve,
};

void draw_sample_paths(McSample& s, const Models& models,
                       const BundleConfig& config, int dim, int k,
                       RngStream& rng) {
  const std::uint64_t map_index =
      config.shared_feature_map ? 0 : static_cast<std::uint64_t>(k);
  RngStream mf = rng.substream(kTagMapF, map_index);
  RngStream mg = rng.substream(kTagMapG, map_index);
  s.map_f = draw_feature_map(models.f.hyper(), config.rff_dim, dim, mf);
  s.map_g = draw_feature_map(models.g.hyper(), config.rff_dim, dim, mg);
  RngStream pf = rng.substream(kTagPathF, static_cast<std::uint64_t>(k));
  RngStream pg = rng.substream(kTagPathG, static_cast<std::uint64_t>(k));
  s.path_f = draw_path(models.f, s.map_f, pf);
  s.path_g = draw_path(models.g, s.map_g, pg);

  if (config.constrained) {
    s.maps_cu.resize(models.cu.size());
    s.paths_cu.resize(models.cu.size());
    for (std::size_t c = 0; c < models.cu.size(); ++c) {
      RngStream mc = rng.substream(kTagMapCu, map_index).substream(c);
      RngStream pc = rng.substream(kTagPathCu, static_cast<std::uint64_t>(k))
                         .substream(c);
      s.maps_cu[c] = draw_feature_map(models.cu[c].hyper(), config.rff_dim, dim, mc);
      s.paths_cu[c] = draw_path(models.cu[c], s.maps_cu[c], pc);
    }
    s.maps_cl.resize(models.cl.size());
    s.paths_cl.resize(models.cl.size());
    for (std::size_t c = 0; c < models.cl.size(); ++c) {
      RngStream mc = rng.substream(kTagMapCl, map_index).substream(c);
      RngStream pc = rng.substream(kTagPathCl, static_cast<std::uint64_t>(k))
                         .substream(c);
      s.maps_cl[c] = draw_feature_map(models.cl[c].hyper(), config.rff_dim, dim, mc);
      s.paths_cl[c] = draw_path(models.cl[c], s.maps_cl[c], pc);
    }
  }
}

Eigen::VectorXd observation_draws(const Eigen::MatrixXd& values, double noise_sd,
                                  RngStream rng) {
  Eigen::VectorXd out(values.size());
  int idx = 0;
  for (Eigen::Index ix = 0; ix < values.rows(); ++ix) {
    for (Eigen::Index it = 0; it < values.cols(); ++it) {
      out(idx++) = values(ix, it) + noise_sd * rng.gaussian();
    }
  }
  return out;
}

}  // namespace

McBundle build_bundle(const Models& models, const GridSpec& grid,
                      const BundleConfig& config, RngStream& rng) {
  if (config.k_samples < 1) {
    throw std::invalid_argument("build_bundle: k_samples must be >= 1");
  }
  const int dim = static_cast<int>(grid.x_grid.front().size() +
                                   grid.theta_grid.front().size());
  McBundle bundle;
  bundle.samples.reserve(static_cast<std::size_t>(config.k_samples));

  for (int k = 0; k < config.k_samples; ++k) {
    auto s = std::make_unique<McSample>();
    draw_sample_paths(*s, models, config, dim, k, rng);

    if (config.constrained) {
      ConstrainedGridSolve cs = solve_bilevel_grid_constrained(
          s->path_f, s->path_g, s->paths_cu, s->paths_cl, grid);
      s->opt = cs.base.opt;
      s->theta_star_index = std::move(cs.base.theta_star_index);
      s->f_values = std::move(cs.base.f_values);
      s->g_values = std::move(cs.base.g_values);
      s->cu_values = std::move(cs.cu_values);
      s->cl_values = std::move(cs.cl_values);
      s->feasibility_fallback = cs.feasibility_fallback;
    } else {
      GridSolve gs = solve_bilevel_grid_full(s->path_f, s->path_g, grid);
      s->opt = gs.opt;
      s->theta_star_index = std::move(gs.theta_star_index);
      s->f_values = std::move(gs.f_values);
      s->g_values = std::move(gs.g_values);
    }

    s->y_f = observation_draws(
        s->f_values, std::sqrt(models.f.hyper().noise_variance),
        rng.substream(kTagYNoiseF, static_cast<std::uint64_t>(k)));
    s->y_g = observation_draws(
        s->g_values, std::sqrt(models.g.hyper().noise_variance),
        rng.substream(kTagYNoiseG, static_cast<std::uint64_t>(k)));
    if (config.constrained) {
      s->y_cu.resize(models.cu.size());
      for (std::size_t c = 0; c < models.cu.size(); ++c) {
        s->y_cu[c] = observation_draws(
            s->cu_values[c], std::sqrt(models.cu[c].hyper().noise_variance),
            rng.substream(kTagYNoiseCu, static_cast<std::uint64_t>(k)).substream(c));
      }
      s->y_cl.resize(models.cl.size());
      for (std::size_t c = 0; c < models.cl.size(); ++c) {
        s->y_cl[c] = observation_draws(
            s->cl_values[c], std::sqrt(models.cl[c].hyper().noise_variance),
            rng.substream(kTagYNoiseCl, static_cast<std::uint64_t>(k)).substream(c));
      }
    }
    bundle.samples.push_back(std::move(s));
  }
  return bundle;
}

McBundle build_bundle_continuous(const Models& models, int d_x, int d_theta,
                                 const BundleConfig& config, RngStream& rng) {
  McBundle bundle;
  bundle.samples.reserve(static_cast<std::size_t>(config.k_samples));
  const int dim = d_x + d_theta;
  for (int k = 0; k < config.k_samples; ++k) {
    auto s = std::make_unique<McSample>();
    draw_sample_paths(*s, models, config, dim, k, rng);
    RngStream solver_rng =
        rng.substream(kTagContinuousSolve, static_cast<std::uint64_t>(k));
    s->opt = solve_bilevel_continuous(s->path_f, s->path_g, d_x, d_theta,
                                      solver_rng);
    RngStream eps = rng.substream(kTagEps, static_cast<std::uint64_t>(k));
    s->eps_f = std::sqrt(models.f.hyper().noise_variance) * eps.gaussian();
    s->eps_g = std::sqrt(models.g.hyper().noise_variance) * eps.gaussian();
    bundle.samples.push_back(std::move(s));
  }
  return bundle;
}

namespace {

struct PoolCaches {
  std::vector<SolvedPoint> f;
  std::vector<SolvedPoint> g;
  std::vector<std::vector<SolvedPoint>> cu;
  std::vector<std::vector<SolvedPoint>> cl;
};

PoolCaches build_caches(const Models& models, const GridSpec& grid,
                        bool constrained) {
  PoolCaches pc;
  pc.f = solve_pool(models.f, grid);
  pc.g = solve_pool(models.g, grid);
  if (constrained) {
    pc.cu.reserve(models.cu.size());
    for (const auto& m : models.cu) pc.cu.push_back(solve_pool(m, grid));
    pc.cl.reserve(models.cl.size());
    for (const auto& m : models.cl) pc.cl.push_back(solve_pool(m, grid));
  }
  return pc;
}

// the f-level term for one (sample, candidate) pair, pool mode
double sample_term_f(const Models& models, const GridSpec& grid,
                     const McSample& s, const PoolCaches& pc, int ix, int it,
                     bool constrained) {
  const int cand = grid.pool_index(ix, it);
  const int tr = grid.pool_index(ix, s.theta_star_index[static_cast<std::size_t>(ix)]);
  const int op = grid.pool_index(s.opt.x_index, s.opt.theta_index);

  LevelTermInput in;
  in.tri = triple_from_solved(models.f, pc.f[static_cast<std::size_t>(tr)],
                              pc.f[static_cast<std::size_t>(cand)],
                              pc.f[static_cast<std::size_t>(op)]);
  in.noise_var = models.f.hyper().noise_variance;
  in.output_scale = models.f.hyper().output_scale;
  in.opt_value = s.opt.f_star;
  in.y = s.y_f(cand);
  in.at_optimum = ix == s.opt.x_index;
  if (constrained) {
    in.constraints.reserve(models.cu.size());
    for (std::size_t c = 0; c < models.cu.size(); ++c) {
      in.constraints.push_back(constraint_piece(
          models.cu[c], pc.cu[c][static_cast<std::size_t>(tr)],
          pc.cu[c][static_cast<std::size_t>(cand)], s.y_cu[c](cand)));
    }
  }
  return level_log_ratio(in);
}

double sample_term_g(const Models& models, const GridSpec& grid,
                     const McSample& s, const PoolCaches& pc, int ix, int it,
                     bool constrained) {
  const int cand = grid.pool_index(ix, it);
  const int tr = grid.pool_index(s.opt.x_index, it);
  const int op = grid.pool_index(s.opt.x_index, s.opt.theta_index);

  LevelTermInput in;
  in.tri = triple_from_solved(models.g, pc.g[static_cast<std::size_t>(tr)],
                              pc.g[static_cast<std::size_t>(cand)],
                              pc.g[static_cast<std::size_t>(op)]);
  in.noise_var = models.g.hyper().noise_variance;
  in.output_scale = models.g.hyper().output_scale;
  in.opt_value = s.opt.g_star;
  in.y = s.y_g(cand);
  in.at_optimum = it == s.opt.theta_index;
  if (constrained) {
    in.constraints.reserve(models.cl.size());
    for (std::size_t c = 0; c < models.cl.size(); ++c) {
      in.constraints.push_back(constraint_piece(
          models.cl[c], pc.cl[c][static_cast<std::size_t>(tr)],
          pc.cl[c][static_cast<std::size_t>(cand)], s.y_cl[c](cand)));
    }
  }
  return level_log_ratio(in);
}

}  // namespace

AcquisitionScores score_pool(const Models& models, const GridSpec& grid,
                             const McBundle& bundle, bool constrained) {
  const int n = grid.pool_size();
  AcquisitionScores sc;
  sc.term_f.setZero(n);
  sc.term_g.setZero(n);
  const PoolCaches pc = build_caches(models, grid, constrained);

  for (const auto& sptr : bundle.samples) {
    const McSample& s = *sptr;
    for (int ix = 0; ix < grid.n_x(); ++ix) {
      for (int it = 0; it < grid.n_theta(); ++it) {
        const int cand = grid.pool_index(ix, it);
        sc.term_f(cand) += sample_term_f(models, grid, s, pc, ix, it, constrained);
        sc.term_g(cand) += sample_term_g(models, grid, s, pc, ix, it, constrained);
      }
    }
  }
  const double inv_k = 1.0 / static_cast<double>(bundle.k());
  sc.term_f *= inv_k;
  sc.term_g *= inv_k;
  return sc;
}

namespace {

std::pair<double, double> score_candidate(int pool_index, const Models& models,
                                          const GridSpec& grid,
                                          const McBundle& bundle,
                                          bool constrained) {
  const int ix = pool_index / grid.n_theta();
  const int it = pool_index % grid.n_theta();

  // single-candidate caches: only the pool points this candidate touches
  PoolCaches pc;
  pc.f.resize(static_cast<std::size_t>(grid.pool_size()));
  pc.g.resize(static_cast<std::size_t>(grid.pool_size()));
  if (constrained) {
    pc.cu.assign(models.cu.size(),
                 std::vector<SolvedPoint>(static_cast<std::size_t>(grid.pool_size())));
    pc.cl.assign(models.cl.size(),
                 std::vector<SolvedPoint>(static_cast<std::size_t>(grid.pool_size())));
  }
  auto ensure = [&](int idx) {
    auto& spf = pc.f[static_cast<std::size_t>(idx)];
    if (spf.point.size() == 0) {
      const QueryPoint p = grid.pool_point(idx);
      const Eigen::VectorXd z = p.joint();
      spf = models.f.solve_point(z);
      pc.g[static_cast<std::size_t>(idx)] = models.g.solve_point(z);
      for (std::size_t c = 0; c < pc.cu.size(); ++c) {
        pc.cu[c][static_cast<std::size_t>(idx)] = models.cu[c].solve_point(z);
      }
      for (std::size_t c = 0; c < pc.cl.size(); ++c) {
        pc.cl[c][static_cast<std::size_t>(idx)] = models.cl[c].solve_point(z);
      }
    }
  };

  double term_f = 0.0;
  double term_g = 0.0;
  for (const auto& sptr : bundle.samples) {
    const McSample& s = *sptr;
    ensure(grid.pool_index(ix, it));
    ensure(grid.pool_index(ix, s.theta_star_index[static_cast<std::size_t>(ix)]));
    ensure(grid.pool_index(s.opt.x_index, s.opt.theta_index));
    ensure(grid.pool_index(s.opt.x_index, it));
    term_f += sample_term_f(models, grid, s, pc, ix, it, constrained);
    term_g += sample_term_g(models, grid, s, pc, ix, it, constrained);
  }
  const double inv_k = 1.0 / static_cast<double>(bundle.k());
  return {term_f * inv_k, term_g * inv_k};
}

}  // namespace

double bljes_coupled(int pool_index, const Models& models, const GridSpec& grid,
                     const McBundle& bundle) {
  const auto [f, g] = score_candidate(pool_index, models, grid, bundle, false);
  return f + g;
}

double bljes_decoupled_f(int pool_index, const Models& models,
                         const GridSpec& grid, const McBundle& bundle) {
  return score_candidate(pool_index, models, grid, bundle, false).first;
}

double bljes_decoupled_g(int pool_index, const Models& models,
                         const GridSpec& grid, const McBundle& bundle) {
  return score_candidate(pool_index, models, grid, bundle, false).second;
}

double bljes_constrained(int pool_index, const Models& models,
                         const GridSpec& grid, const McBundle& bundle) {
  const auto [f, g] = score_candidate(pool_index, models, grid, bundle, true);
  return f + g;
}

Selection select_next(const GridSpec& pool, const Models& models,
                      const McBundle& bundle, AcqMode mode) {
  const AcquisitionScores sc =
      score_pool(models, pool, bundle, mode == AcqMode::constrained);
  Selection sel;
  if (mode == AcqMode::decoupled) {
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < pool.pool_size(); ++i) {
      if (sc.term_f(i) > best) {
        best = sc.term_f(i);
        sel.pool_index = i;
        sel.level = Level::upper;
      }
      if (sc.term_g(i) > best) {
        best = sc.term_g(i);
        sel.pool_index = i;
        sel.level = Level::lower;
      }
    }
    sel.both_levels = false;
    return sel;
  }
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < pool.pool_size(); ++i) {
    const double v = sc.term_f(i) + sc.term_g(i);
    if (v > best) {
      best = v;
      sel.pool_index = i;
    }
  }
  sel.both_levels = true;
  return sel;
}

// ---- continuous-domain evaluation ----

namespace {

struct ContinuousTermContext {
  std::vector<Eigen::VectorXd> theta_star;  // per sample, at the current x
};

double continuous_level_term(const Models& models, const McSample& s,
                             const QueryPoint& cand,
                             const Eigen::VectorXd& theta_star_of_x,
                             Level level) {
  LevelTermInput in;
  if (level == Level::upper) {
    in.tri = triple_posterior(models.f, concat(cand.x, theta_star_of_x),
                              cand.joint(),
                              concat(s.opt.x_star, s.opt.theta_star));
    in.noise_var = models.f.hyper().noise_variance;
    in.output_scale = models.f.hyper().output_scale;
    in.opt_value = s.opt.f_star;
    in.y = eval_path(s.path_f, cand.joint()) + s.eps_f;
    in.at_optimum = (cand.x - s.opt.x_star).norm() < kContinuousEqualityTol;
  } else {
    in.tri = triple_posterior(models.g, concat(s.opt.x_star, cand.theta),
                              cand.joint(),
                              concat(s.opt.x_star, s.opt.theta_star));
    in.noise_var = models.g.hyper().noise_variance;
    in.output_scale = models.g.hyper().output_scale;
    in.opt_value = s.opt.g_star;
    in.y = eval_path(s.path_g, cand.joint()) + s.eps_g;
    in.at_optimum =
        (cand.theta - s.opt.theta_star).norm() < kContinuousEqualityTol;
  }
  return level_log_ratio(in);
}

}  // namespace

double acquisition_value_continuous(const QueryPoint& candidate,
                                    const Models& models, const McBundle& bundle,
                                    Level level, bool both_levels) {
  const int d_theta = static_cast<int>(candidate.theta.size());
  const auto scan = GridSpec::uniform(1, d_theta, 15).theta_grid;
  double total = 0.0;
  for (const auto& sptr : bundle.samples) {
    const McSample& s = *sptr;
    const Eigen::VectorXd th =
        inner_solve_scan(s.path_g, candidate.x, scan, 200, 1e-8);
    if (both_levels || level == Level::upper) {
      total += continuous_level_term(models, s, candidate, th, Level::upper);
    }
    if (both_levels || level == Level::lower) {
      total += continuous_level_term(models, s, candidate, th, Level::lower);
    }
  }
  return total / static_cast<double>(bundle.k());
}

namespace {

Eigen::VectorXd clamp01(Eigen::VectorXd v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    v(i) = std::min(1.0, std::max(0.0, v(i)));
  }
  return v;
}

// Monte-Carlo mean of the per-sample terms given per-sample inner argmax
double continuous_value_at(const Models& models, const McBundle& bundle,
                           const QueryPoint& cand,
                           const ContinuousTermContext& ctx, Level level,
                           bool both) {
  double total = 0.0;
  for (int k = 0; k < bundle.k(); ++k) {
    const McSample& s = *bundle.samples[static_cast<std::size_t>(k)];
    const auto& th = ctx.theta_star[static_cast<std::size_t>(k)];
    if (both || level == Level::upper) {
      total += continuous_level_term(models, s, cand, th, Level::upper);
    }
    if (both || level == Level::lower) {
      total += continuous_level_term(models, s, cand, th, Level::lower);
    }
  }
  return total / static_cast<double>(bundle.k());
}

void refresh_inner(const McBundle& bundle, const Eigen::VectorXd& x,
                   ContinuousTermContext& ctx) {
  ctx.theta_star.resize(static_cast<std::size_t>(bundle.k()));
  const int d_theta =
      static_cast<int>(bundle.samples.front()->opt.theta_star.size());
  const auto scan = GridSpec::uniform(1, d_theta, 15).theta_grid;
  for (int k = 0; k < bundle.k(); ++k) {
    const McSample& s = *bundle.samples[static_cast<std::size_t>(k)];
    ctx.theta_star[static_cast<std::size_t>(k)] =
        inner_solve_scan(s.path_g, x, scan, 200, 1e-8);
  }
}

// Gradient of the sampled bound: finite differences of the explicit
// (x, theta, theta') dependence plus the implicit-function-theorem term
// through the per-sample inner argmax.
Eigen::VectorXd continuous_gradient(const Models& models, const McBundle& bundle,
                                    const QueryPoint& cand,
                                    const ContinuousTermContext& ctx,
                                    Level level, bool both, int d_x, int d_theta) {
  const double h = 1e-5;
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(d_x + d_theta);

  for (int k = 0; k < bundle.k(); ++k) {
    const McSample& s = *bundle.samples[static_cast<std::size_t>(k)];
    const Eigen::VectorXd& th = ctx.theta_star[static_cast<std::size_t>(k)];

    auto term_at = [&](const QueryPoint& c, const Eigen::VectorXd& tprime) {
      double v = 0.0;
      if (both || level == Level::upper) {
        v += continuous_level_term(models, s, c, tprime, Level::upper);
      }
      if (both || level == Level::lower) {
        v += continuous_level_term(models, s, c, tprime, Level::lower);
      }
      return v;
    };

    // explicit partials in x and theta, theta' held fixed
    for (int a = 0; a < d_x; ++a) {
      QueryPoint cp = cand;
      QueryPoint cm = cand;
      cp.x(a) += h;
      cm.x(a) -= h;
      grad(a) += (term_at(cp, th) - term_at(cm, th)) / (2.0 * h);
    }
    for (int a = 0; a < d_theta; ++a) {
      QueryPoint cp = cand;
      QueryPoint cm = cand;
      cp.theta(a) += h;
      cm.theta(a) -= h;
      grad(d_x + a) += (term_at(cp, th) - term_at(cm, th)) / (2.0 * h);
    }

    // implicit term: (d theta'/dx)^T da/dtheta'
    const auto jac = theta_star_jacobian(s.path_g, cand.x, th);
    if (jac.has_value()) {
      Eigen::VectorXd dth(d_theta);
      for (int a = 0; a < d_theta; ++a) {
        Eigen::VectorXd tp = th;
        Eigen::VectorXd tm = th;
        tp(a) += h;
        tm(a) -= h;
        dth(a) = (term_at(cand, tp) - term_at(cand, tm)) / (2.0 * h);
      }
      grad.head(d_x) += jac->transpose() * dth;
    }
  }
  return grad / static_cast<double>(bundle.k());
}

}  // namespace

ContinuousSelection select_next_continuous(const Models& models,
                                           const McBundle& bundle, int d_x,
                                           int d_theta, AcqMode mode,
                                           RngStream& rng) {
  if (mode == AcqMode::constrained) {
    throw std::invalid_argument(
        "select_next_continuous: constrained mode is pool-only");
  }
  static constexpr std::uint64_t primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29};
  const std::uint64_t offset = rng.next_u64() % 65536;
  const int n_starts = 8;
  const int max_steps = 40;

  auto run_level = [&](Level level, bool both) {
    QueryPoint best_point;
    double best_val = -std::numeric_limits<double>::infinity();
    for (int st = 0; st < n_starts; ++st) {
      QueryPoint cand;
      cand.x.resize(d_x);
      cand.theta.resize(d_theta);
      for (int a = 0; a < d_x; ++a) {
        cand.x(a) = halton(offset + static_cast<std::uint64_t>(st + 1),
                           primes[static_cast<std::size_t>(a) % 10]);
      }
      for (int a = 0; a < d_theta; ++a) {
        cand.theta(a) = halton(offset + static_cast<std::uint64_t>(st + 1),
                               primes[static_cast<std::size_t>(d_x + a) % 10]);
      }

      ContinuousTermContext ctx;
      refresh_inner(bundle, cand.x, ctx);
      double value = continuous_value_at(models, bundle, cand, ctx, level, both);
      double step = 0.1;
      for (int it = 0; it < max_steps; ++it) {
        const Eigen::VectorXd g = continuous_gradient(models, bundle, cand, ctx,
                                                      level, both, d_x, d_theta);
        if (g.norm() < 1e-7) break;
        bool accepted = false;
        for (int half = 0; half < 15; ++half) {
          QueryPoint trial;
          trial.x = clamp01(cand.x + step * g.head(d_x));
          trial.theta = clamp01(cand.theta + step * g.tail(d_theta));
          ContinuousTermContext tctx = ctx;
          refresh_inner(bundle, trial.x, tctx);
          const double tv =
              continuous_value_at(models, bundle, trial, tctx, level, both);
          if (tv > value) {
            cand = std::move(trial);
            ctx = std::move(tctx);
            value = tv;
            step *= 1.3;
            accepted = true;
            break;
          }
          step *= 0.5;
        }
        if (!accepted || step < 1e-10) break;
      }
      if (value > best_val) {
        best_val = value;
        best_point = cand;
      }
    }
    return std::make_pair(best_point, best_val);
  };

  ContinuousSelection out;
  if (mode == AcqMode::coupled) {
    out.point = run_level(Level::upper, true).first;
    out.both_levels = true;
    return out;
  }
  // decoupled: optimize each level's own bound, keep the better
  const auto [pf, vf] = run_level(Level::upper, false);
  const auto [pg, vg] = run_level(Level::lower, false);
  out.both_levels = false;
  if (vf >= vg) {
    out.point = pf;
    out.level = Level::upper;
  } else {
    out.point = pg;
    out.level = Level::lower;
  }
  return out;
}

}  // namespace bljes
