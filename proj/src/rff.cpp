#include "bljes/rff.hpp"

#include <cmath>
#include <vector>

#include "bljes/simd.hpp"

namespace bljes {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// scratch buffers sized to the feature count, reused across calls
struct Scratch {
  std::vector<double> t;
  std::vector<double> trig;
  std::vector<double> trig2;
  void resize(std::size_t d) {
    if (t.size() < d) {
      t.resize(d);
      trig.resize(d);
      trig2.resize(d);
    }
  }
};

Scratch& scratch() {
  thread_local Scratch s;
  return s;
}

// t = frequencies z + phases, accumulated per input coordinate so each
// column sweep is contiguous
void feature_args(const FeatureMap& map, const Eigen::VectorXd& z, double* t) {
  const auto d_count = static_cast<std::size_t>(map.feature_count());
  const auto dim = map.dim();
  for (std::size_t j = 0; j < d_count; ++j) t[j] = map.phases(static_cast<Eigen::Index>(j));
  for (int a = 0; a < dim; ++a) {
    simd::axpy(z(a), map.frequencies.col(a).data(), t, d_count);
  }
}

}  // namespace

FeatureMap draw_feature_map(const GpHyperparams& hyper, int feature_count,
                            int dim, RngStream& rng) {
  if (feature_count < 1) {
    throw std::invalid_argument("draw_feature_map: feature_count must be >= 1");
  }
  FeatureMap map;
  map.frequencies.resize(feature_count, dim);
  map.phases.resize(feature_count);
  const double inv_ell = 1.0 / hyper.lengthscale;
  // drawn feature by feature so the matrix layout does not affect the stream
  for (int j = 0; j < feature_count; ++j) {
    for (int a = 0; a < dim; ++a) map.frequencies(j, a) = inv_ell * rng.gaussian();
    map.phases(j) = kTwoPi * rng.uniform01();
  }
  map.amplitude =
      std::sqrt(2.0 * hyper.output_scale / static_cast<double>(feature_count));
  return map;
}

double eval_path(const PathSample& path, const Eigen::VectorXd& z) {
  const auto n = static_cast<std::size_t>(path.map->feature_count());
  auto& s = scratch();
  s.resize(n);
  feature_args(*path.map, z, s.t.data());
  simd::vcos(s.t.data(), s.trig.data(), n);
  return path.prior_mean +
         path.map->amplitude * simd::dot(s.trig.data(), path.weights.data(), n);
}

void eval_path_batch(const PathSample& path, const Eigen::MatrixXd& points,
                     Eigen::VectorXd& out) {
  const auto m = points.rows();
  out.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    out(i) = eval_path(path, Eigen::VectorXd(points.row(i)));
  }
}

Eigen::VectorXd grad_path(const PathSample& path, const Eigen::VectorXd& z) {
  const auto n = static_cast<std::size_t>(path.map->feature_count());
  const int dim = path.map->dim();
  auto& s = scratch();
  s.resize(n);
  feature_args(*path.map, z, s.t.data());
  simd::vsin(s.t.data(), s.trig.data(), n);
  Eigen::VectorXd g(dim);
  for (int a = 0; a < dim; ++a) {
    g(a) = -path.map->amplitude *
           simd::dot3(s.trig.data(), path.weights.data(),
                      path.map->frequencies.col(a).data(), n);
  }
  return g;
}

Eigen::MatrixXd hess_path_theta(const PathSample& path, const Eigen::VectorXd& z,
                                int d_x, int d_theta) {
  const auto n = static_cast<std::size_t>(path.map->feature_count());
  auto& s = scratch();
  s.resize(n);
  feature_args(*path.map, z, s.t.data());
  simd::vcos(s.t.data(), s.trig.data(), n);
  Eigen::MatrixXd h(d_theta, d_theta);
  for (int a = 0; a < d_theta; ++a) {
    for (int b = a; b < d_theta; ++b) {
      const double v = -path.map->amplitude *
                       simd::dot4(s.trig.data(), path.weights.data(),
                                  path.map->frequencies.col(d_x + a).data(),
                                  path.map->frequencies.col(d_x + b).data(), n);
      h(a, b) = v;
      h(b, a) = v;
    }
  }
  return h;
}

Eigen::MatrixXd cross_hess_path(const PathSample& path, const Eigen::VectorXd& z,
                                int d_x, int d_theta) {
  const auto n = static_cast<std::size_t>(path.map->feature_count());
  auto& s = scratch();
  s.resize(n);
  feature_args(*path.map, z, s.t.data());
  simd::vcos(s.t.data(), s.trig.data(), n);
  Eigen::MatrixXd h(d_theta, d_x);
  for (int a = 0; a < d_theta; ++a) {
    for (int b = 0; b < d_x; ++b) {
      h(a, b) = -path.map->amplitude *
                simd::dot4(s.trig.data(), path.weights.data(),
                           path.map->frequencies.col(d_x + a).data(),
                           path.map->frequencies.col(b).data(), n);
    }
  }
  return h;
}

PathSample draw_prior_path(const FeatureMap& map, RngStream& rng) {
  PathSample p;
  p.map = &map;
  p.prior_mean = 0.0;
  p.weights.resize(map.feature_count());
  for (Eigen::Index j = 0; j < p.weights.size(); ++j) p.weights(j) = rng.gaussian();
  return p;
}

PathSample draw_path(const GpModel& model, const FeatureMap& map, RngStream& rng) {
  const int d_count = map.feature_count();
  const int n = model.size();
  PathSample p;
  p.map = &map;
  p.prior_mean = model.hyper().prior_mean;
  p.weights.resize(d_count);
  for (int j = 0; j < d_count; ++j) p.weights(j) = rng.gaussian();
  if (n == 0) return p;

  const double noise_var = model.hyper().noise_variance;

  // feature matrix of the training inputs, one row per point
  Eigen::MatrixXd phi(n, d_count);
  auto& s = scratch();
  s.resize(static_cast<std::size_t>(d_count));
  for (int i = 0; i < n; ++i) {
    feature_args(map, model.inputs().row(i).transpose(), s.t.data());
    simd::vcos(s.t.data(), s.trig.data(), static_cast<std::size_t>(d_count));
    for (int j = 0; j < d_count; ++j) phi(i, j) = map.amplitude * s.trig[j];
  }

  const Eigen::VectorXd resid = model.targets().array() - p.prior_mean;

  if (d_count <= n) {
    // D x D normal equations: A = I + Phi^T Phi / noise
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(d_count, d_count);
    a.noalias() += phi.transpose() * phi / noise_var;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success) {
      a.diagonal().array() += kJitterMax;
      llt.compute(a);
      if (llt.info() != Eigen::Success) {
        throw NumericError("draw_path: normal equations not factorizable");
      }
    }
    const Eigen::VectorXd mean = llt.solve(phi.transpose() * resid / noise_var);
    // w = mean + L^{-T} xi
    const Eigen::VectorXd xi = p.weights;
    p.weights = mean + Eigen::MatrixXd(llt.matrixL())
                           .triangularView<Eigen::Lower>()
                           .transpose()
                           .solve(xi);
    return p;
  }

  // dual form: w = w0 + Phi^T (Phi Phi^T + noise I)^{-1} (y - m - Phi w0 - e0)
  Eigen::VectorXd e0(n);
  const double noise_sd = std::sqrt(noise_var);
  for (int i = 0; i < n; ++i) e0(i) = noise_sd * rng.gaussian();

  Eigen::MatrixXd m = phi * phi.transpose();
  m.diagonal().array() += noise_var;
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) {
    m.diagonal().array() += kJitterMax;
    llt.compute(m);
    if (llt.info() != Eigen::Success) {
      throw NumericError("draw_path: dual system not factorizable");
    }
  }
  const Eigen::VectorXd u = llt.solve(resid - phi * p.weights - e0);
  p.weights.noalias() += phi.transpose() * u;
  return p;
}

}  // namespace bljes
