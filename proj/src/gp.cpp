#include "bljes/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bljes/simd.hpp"
#include "bljes/stats.hpp"

namespace bljes {

namespace {

double clampd(double v, double lo, double hi) {
  return std::min(std::max(v, lo), hi);
}

// pairwise squared distances, one point per row
Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& pts) {
  const auto n = pts.rows();
  Eigen::VectorXd sq = pts.rowwise().squaredNorm();
  Eigen::MatrixXd d2 = sq.replicate(1, n) + sq.transpose().replicate(n, 1) -
                       2.0 * (pts * pts.transpose());
  return d2.cwiseMax(0.0);
}

Eigen::MatrixXd kernel_matrix(const GpHyperparams& h, const Eigen::MatrixXd& d2) {
  const double inv = -0.5 / (h.lengthscale * h.lengthscale);
  Eigen::MatrixXd k(d2.rows(), d2.cols());
  simd::vexp((d2 * inv).eval().data(), k.data(), static_cast<std::size_t>(k.size()));
  return k * h.output_scale;
}

}  // namespace

GpHyperparams clamp_to_bounds(GpHyperparams h) {
  h.lengthscale = clampd(h.lengthscale, kLengthscaleMin, kLengthscaleMax);
  h.output_scale = clampd(h.output_scale, kOutputScaleMin, kOutputScaleMax);
  h.noise_variance = std::max(h.noise_variance, kNoiseFloor);
  return h;
}

double kernel_value(const GpHyperparams& hyper, const Eigen::VectorXd& a,
                    const Eigen::VectorXd& b) {
  const double d2 = (a - b).squaredNorm();
  const double v =
      hyper.output_scale *
      std::exp(-0.5 * d2 / (hyper.lengthscale * hyper.lengthscale));
  if (!std::isfinite(v)) throw NumericError("non-finite kernel evaluation");
  return v;
}

JointGaussian condition(const JointGaussian& joint, int observed_index,
                        double value, double obs_noise_variance) {
  const auto m = joint.mean.size();
  if (observed_index < 0 || observed_index >= m) {
    throw std::invalid_argument("condition: index out of range");
  }
  const double total_var = joint.cov(observed_index, observed_index) +
                           obs_noise_variance;
  if (!(total_var > 0.0)) {
    throw DegenerateConditioning("zero variance at observed index");
  }
  const double gain = (value - joint.mean(observed_index)) / total_var;

  JointGaussian out;
  out.mean.resize(m - 1);
  out.cov.resize(m - 1, m - 1);
  Eigen::VectorXd c(m - 1);
  int r = 0;
  for (int i = 0; i < m; ++i) {
    if (i == observed_index) continue;
    c(r) = joint.cov(i, observed_index);
    out.mean(r) = joint.mean(i) + c(r) * gain;
    ++r;
  }
  r = 0;
  for (int i = 0; i < m; ++i) {
    if (i == observed_index) continue;
    int s = 0;
    for (int j = 0; j < m; ++j) {
      if (j == observed_index) continue;
      out.cov(r, s) = joint.cov(i, j) - c(r) * c(s) / total_var;
      ++s;
    }
    ++r;
  }
  return out;
}

GpModel::GpModel(GpHyperparams hyper, Eigen::MatrixXd inputs,
                 Eigen::VectorXd targets, Eigen::VectorXd noise)
    : hyper_(hyper),
      inputs_(std::move(inputs)),
      targets_(std::move(targets)),
      noise_(std::move(noise)) {
  factorize();
}

GpModel::GpModel(GpHyperparams hyper, Eigen::MatrixXd inputs,
                 Eigen::VectorXd targets)
    : GpModel(hyper, std::move(inputs),
              Eigen::VectorXd(targets),
              Eigen::VectorXd::Constant(targets.size(), hyper.noise_variance)) {}

GpModel::GpModel(GpHyperparams hyper)
    : GpModel(hyper, Eigen::MatrixXd(0, 0), Eigen::VectorXd(0),
              Eigen::VectorXd(0)) {}

void GpModel::factorize() {
  const auto n = targets_.size();
  if (n == 0) {
    chol_.resize(0, 0);
    alpha_.resize(0);
    log_det_half_ = 0.0;
    return;
  }
  if (!inputs_.allFinite() || !targets_.allFinite()) {
    throw NumericError("non-finite training data");
  }
  Eigen::MatrixXd k = kernel_matrix(hyper_, squared_distances(inputs_));
  if (!k.allFinite()) throw NumericError("non-finite kernel matrix");
  k.diagonal() += noise_;

  double jitter = kJitter;
  while (true) {
    Eigen::MatrixXd a = k;
    a.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() == Eigen::Success) {
      chol_ = llt.matrixL();
      const Eigen::VectorXd r = targets_.array() - hyper_.prior_mean;
      alpha_ = llt.solve(r);
      log_det_half_ = chol_.diagonal().array().log().sum();
      return;
    }
    jitter *= 10.0;
    if (jitter > kJitterMax) {
      throw NumericError("Cholesky failed beyond jitter repair");
    }
  }
}

void GpModel::kernel_vector(const Eigen::VectorXd& z, Eigen::VectorXd& out) const {
  if (!z.allFinite()) throw NumericError("non-finite kernel evaluation point");
  const auto n = size();
  const auto d = dim();
  out.setZero(n);
  for (int a = 0; a < d; ++a) {
    simd::sqdiff_accum(z(a), inputs_.col(a).data(), out.data(),
                       static_cast<std::size_t>(n));
  }
  const double inv = -0.5 / (hyper_.lengthscale * hyper_.lengthscale);
  out *= inv;
  simd::vexp(out.data(), out.data(), static_cast<std::size_t>(n));
  out *= hyper_.output_scale;
  if (!out.allFinite()) throw NumericError("non-finite kernel vector");
}

std::pair<double, double> GpModel::posterior_at(const Eigen::VectorXd& z) const {
  if (size() == 0) return {hyper_.prior_mean, hyper_.output_scale};
  Eigen::VectorXd kv(size());
  kernel_vector(z, kv);
  const double mean = hyper_.prior_mean + kv.dot(alpha_);
  const Eigen::VectorXd v =
      chol_.triangularView<Eigen::Lower>().solve(kv);
  const double var = std::max(0.0, hyper_.output_scale - v.squaredNorm());
  return {mean, var};
}

SolvedPoint GpModel::solve_point(const Eigen::VectorXd& z) const {
  SolvedPoint sp;
  sp.point = z;
  if (size() == 0) {
    sp.v.resize(0);
    sp.mean = hyper_.prior_mean;
    sp.variance = hyper_.output_scale;
    return sp;
  }
  Eigen::VectorXd kv(size());
  kernel_vector(z, kv);
  sp.mean = hyper_.prior_mean + kv.dot(alpha_);
  sp.v = chol_.triangularView<Eigen::Lower>().solve(kv);
  sp.variance = std::max(0.0, hyper_.output_scale - sp.v.squaredNorm());
  return sp;
}

double GpModel::posterior_cov(const SolvedPoint& a, const SolvedPoint& b) const {
  const double prior = kernel_value(hyper_, a.point, b.point);
  if (size() == 0) return prior;
  return prior - simd::dot(a.v.data(), b.v.data(),
                           static_cast<std::size_t>(a.v.size()));
}

JointGaussian GpModel::joint_posterior(
    const std::vector<Eigen::VectorXd>& points) const {
  if (points.empty()) throw std::invalid_argument("joint_posterior: no points");
  const auto m = points.size();
  std::vector<SolvedPoint> sp(m);
  for (std::size_t i = 0; i < m; ++i) sp[i] = solve_point(points[i]);

  JointGaussian jg;
  jg.mean.resize(static_cast<Eigen::Index>(m));
  jg.cov.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) {
    jg.mean(static_cast<Eigen::Index>(i)) = sp[i].mean;
    jg.cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) =
        sp[i].variance;
    for (std::size_t j = i + 1; j < m; ++j) {
      const double c = posterior_cov(sp[i], sp[j]);
      jg.cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = c;
      jg.cov(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = c;
    }
  }
  return jg;
}

JointGaussian GpModel::joint_posterior(const std::vector<QueryPoint>& points) const {
  std::vector<Eigen::VectorXd> zs;
  zs.reserve(points.size());
  for (const auto& p : points) zs.push_back(p.joint());
  return joint_posterior(zs);
}

GpModel GpModel::with_observation(const Eigen::VectorXd& z, double value,
                                  double noise_variance) const {
  const auto n = size();
  Eigen::MatrixXd in(n + 1, z.size());
  if (n > 0) in.topRows(n) = inputs_;
  in.row(n) = z.transpose();
  Eigen::VectorXd t(n + 1);
  t.head(n) = targets_;
  t(n) = value;
  Eigen::VectorXd nv(n + 1);
  nv.head(n) = noise_;
  nv(n) = noise_variance;
  return GpModel(hyper_, std::move(in), std::move(t), std::move(nv));
}

double GpModel::log_marginal_likelihood() const {
  const auto n = size();
  if (n == 0) return 0.0;
  const Eigen::VectorXd r = targets_.array() - hyper_.prior_mean;
  return -0.5 * r.dot(alpha_) - log_det_half_ -
         0.5 * static_cast<double>(n) * std::log(2.0 * M_PI);
}

double log_marginal_likelihood(const GpHyperparams& hyper,
                               const Eigen::MatrixXd& inputs,
                               const Eigen::VectorXd& targets) {
  GpModel m(hyper, inputs, targets);
  return m.log_marginal_likelihood();
}

namespace {

// log-space parameterization (prior_mean stays linear)
struct LogParams {
  double mean;
  double log_ell;
  double log_scale;
  double log_noise;

  GpHyperparams to_hyper() const {
    GpHyperparams h;
    h.prior_mean = mean;
    h.lengthscale = std::exp(log_ell);
    h.output_scale = std::exp(log_scale);
    h.noise_variance = std::exp(log_noise);
    return h;
  }

  static LogParams from_hyper(const GpHyperparams& h) {
    return {h.prior_mean, std::log(h.lengthscale), std::log(h.output_scale),
            std::log(h.noise_variance)};
  }

  void project() {
    log_ell = clampd(log_ell, std::log(kLengthscaleMin), std::log(kLengthscaleMax));
    log_scale = clampd(log_scale, std::log(kOutputScaleMin), std::log(kOutputScaleMax));
    log_noise = clampd(log_noise, std::log(kNoiseFloor), std::log(kOutputScaleMax));
  }
};

struct LmlEval {
  double value = -std::numeric_limits<double>::infinity();
  Eigen::Vector4d grad = Eigen::Vector4d::Zero();
  bool ok = false;
};

LmlEval eval_lml(const LogParams& p, const Eigen::MatrixXd& d2,
                 const Eigen::VectorXd& y, bool with_grad) {
  LmlEval out;
  const GpHyperparams h = p.to_hyper();
  const auto n = y.size();
  Eigen::MatrixXd k = kernel_matrix(h, d2);
  Eigen::MatrixXd a = k;
  a.diagonal().array() += h.noise_variance + kJitter;
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) return out;

  const Eigen::VectorXd r = y.array() - h.prior_mean;
  const Eigen::VectorXd alpha = llt.solve(r);
  const double log_det_half =
      Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
  out.value = -0.5 * r.dot(alpha) - log_det_half -
              0.5 * static_cast<double>(n) * std::log(2.0 * M_PI);
  if (!std::isfinite(out.value)) return out;
  out.ok = true;
  if (!with_grad) return out;

  const Eigen::MatrixXd ainv =
      llt.solve(Eigen::MatrixXd::Identity(n, n));
  // d/d log ell : K .* d2 / ell^2
  const double iell2 = 1.0 / (h.lengthscale * h.lengthscale);
  const Eigen::MatrixXd dk_ell = k.cwiseProduct(d2) * iell2;
  out.grad(0) = alpha.sum();  // d/d mean
  out.grad(1) = 0.5 * (alpha.dot(dk_ell * alpha) - ainv.cwiseProduct(dk_ell).sum());
  out.grad(2) = 0.5 * (alpha.dot(k * alpha) - ainv.cwiseProduct(k).sum());
  out.grad(3) = 0.5 * h.noise_variance * (alpha.squaredNorm() - ainv.trace());
  return out;
}

LogParams ascend(LogParams p, const Eigen::MatrixXd& d2, const Eigen::VectorXd& y,
                 double* final_value) {
  p.project();
  LmlEval cur = eval_lml(p, d2, y, true);
  if (!cur.ok) {
    *final_value = cur.value;
    return p;
  }
  double step = 0.1;
  for (int it = 0; it < 120; ++it) {
    if (cur.grad.norm() < 1e-7) break;
    bool accepted = false;
    for (int half = 0; half < 25; ++half) {
      LogParams trial = p;
      trial.mean += step * cur.grad(0);
      trial.log_ell += step * cur.grad(1);
      trial.log_scale += step * cur.grad(2);
      trial.log_noise += step * cur.grad(3);
      trial.project();
      LmlEval te = eval_lml(trial, d2, y, false);
      if (te.ok && te.value > cur.value) {
        p = trial;
        cur = eval_lml(p, d2, y, true);
        step *= 1.3;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted || step < 1e-13) break;
  }
  *final_value = cur.value;
  return p;
}

}  // namespace

FitResult fit_hyperparameters(const Eigen::MatrixXd& inputs,
                              const Eigen::VectorXd& targets,
                              const GpHyperparams& init, RngStream& rng,
                              int restarts) {
  const GpHyperparams init_clamped = clamp_to_bounds(init);
  const Eigen::MatrixXd d2 = squared_distances(inputs);
  const auto n = targets.size();

  const double ymean = targets.mean();
  const double yvar =
      n > 1 ? (targets.array() - ymean).square().sum() / static_cast<double>(n - 1)
            : 1.0;
  const double yscale = std::max(yvar, 1e-8);

  const LogParams p_init = LogParams::from_hyper(init_clamped);
  double init_value;
  {
    LmlEval e = eval_lml(p_init, d2, targets, false);
    init_value = e.value;
  }

  FitResult best;
  best.hyper = init_clamped;
  best.log_marginal = init_value;
  bool any_ok = std::isfinite(init_value);

  for (int r = 0; r < restarts; ++r) {
    LogParams start;
    if (r == 0) {
      start = p_init;
    } else {
      start.mean = ymean + std::sqrt(yscale) * 0.3 * rng.gaussian();
      start.log_ell = rng.uniform(std::log(0.03), std::log(1.0));
      start.log_scale = std::log(yscale) + rng.uniform(std::log(0.2), std::log(5.0));
      start.log_noise = std::log(yscale) + rng.uniform(std::log(1e-6), std::log(1e-2));
      start.project();
    }
    double value;
    LogParams p = ascend(start, d2, targets, &value);
    if (std::isfinite(value) && (!any_ok || value > best.log_marginal)) {
      best.hyper = clamp_to_bounds(p.to_hyper());
      best.log_marginal = value;
      any_ok = true;
    }
  }

  if (!any_ok) {
    best.hyper = init_clamped;
    best.log_marginal = init_value;
    best.fallback = true;
    return best;
  }
  // monotone-improvement contract against init
  if (std::isfinite(init_value) && best.log_marginal < init_value) {
    best.hyper = init_clamped;
    best.log_marginal = init_value;
  }
  return best;
}

Dataset augment(const Dataset& dataset, const QueryPoint& point, double f_star,
                double g_star) {
  if (!std::isfinite(f_star) || !std::isfinite(g_star)) {
    throw std::invalid_argument("augment: non-finite optimum values");
  }
  Dataset out = dataset;
  ObservationRecord rec;
  rec.point = point;
  rec.y_f = f_star;
  rec.y_g = g_star;
  out.augmented.push_back(std::move(rec));
  return out;
}

GpModel model_from_dataset(const Dataset& dataset, Level level,
                           const GpHyperparams& hyper, bool include_augmented) {
  std::vector<const ObservationRecord*> recs;
  for (const auto& r : dataset.records) {
    const auto& y = level == Level::upper ? r.y_f : r.y_g;
    if (y.has_value()) recs.push_back(&r);
  }
  std::size_t n_aug = 0;
  if (include_augmented) n_aug = dataset.augmented.size();

  const std::size_t n = recs.size() + n_aug;
  if (n == 0) return GpModel(hyper);
  const auto d = recs.empty()
                     ? dataset.augmented.front().point.joint().size()
                     : recs.front()->point.joint().size();
  Eigen::MatrixXd in(n, d);
  Eigen::VectorXd t(n);
  Eigen::VectorXd nv(n);
  std::size_t i = 0;
  for (const auto* r : recs) {
    in.row(i) = r->point.joint().transpose();
    t(i) = level == Level::upper ? *r->y_f : *r->y_g;
    nv(i) = hyper.noise_variance;
    ++i;
  }
  if (include_augmented) {
    for (const auto& r : dataset.augmented) {
      in.row(i) = r.point.joint().transpose();
      t(i) = level == Level::upper ? *r.y_f : *r.y_g;
      nv(i) = kAugmentedNoise;
      ++i;
    }
  }
  return GpModel(hyper, std::move(in), std::move(t), std::move(nv));
}

}  // namespace bljes
