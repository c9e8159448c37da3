#include "bljes/benchmarks.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "bljes/gp.hpp"
#include "bljes/rff.hpp"
#include "bljes/rng.hpp"

namespace bljes {

double apply_transform(double raw, Transform transform) {
  switch (transform) {
    case Transform::signed_log1p:
      return std::copysign(std::log1p(std::fabs(raw)), raw);
    case Transform::identity:
    default:
      return raw;
  }
}

namespace {

constexpr double kPi = 3.14159265358979323846;

double rescale(double u01, double lo, double hi) { return lo + (hi - lo) * u01; }

// ---- classic single-level test functions, native minimization form ----

double branin(double u, double v) {
  const double a = v - 5.1 * u * u / (4.0 * kPi * kPi) + 5.0 * u / kPi - 6.0;
  return a * a + 10.0 * (1.0 - 1.0 / (8.0 * kPi)) * std::cos(u) + 10.0;
}

double goldstein_price(double u, double v) {
  const double t1 = 1.0 + (u + v + 1.0) * (u + v + 1.0) *
                              (19.0 - 14.0 * u + 3.0 * u * u - 14.0 * v +
                               6.0 * u * v + 3.0 * v * v);
  const double t2 = 30.0 + (2.0 * u - 3.0 * v) * (2.0 * u - 3.0 * v) *
                               (18.0 - 32.0 * u + 12.0 * u * u + 48.0 * v -
                                36.0 * u * v + 27.0 * v * v);
  return t1 * t2;
}

double six_hump_camel(double u, double v) {
  return (4.0 - 2.1 * u * u + u * u * u * u / 3.0) * u * u + u * v +
         (-4.0 + 4.0 * v * v) * v * v;
}

// band constraint used by the SMD suite: s - floor(s + 0.5) >= 0
double band_constraint(double s) { return s - std::floor(s + 0.5); }

// ---- SMD test problems, p = q = r = 1 ----
// Upper variables (u1, u2) from x, lower variables (l1, l2) from theta,
// native boxes below, both levels minimized in the source suite.

struct SmdVars {
  double u1, u2, l1, l2;
};

struct SmdBox {
  double u1_lo, u1_hi, u2_lo, u2_hi, l1_lo, l1_hi, l2_lo, l2_hi;

  SmdVars vars(const Eigen::VectorXd& x, const Eigen::VectorXd& theta) const {
    return {rescale(x(0), u1_lo, u1_hi), rescale(x(1), u2_lo, u2_hi),
            rescale(theta(0), l1_lo, l1_hi), rescale(theta(1), l2_lo, l2_hi)};
  }
};

struct SmdDef {
  SmdBox box;
  std::function<double(const SmdVars&)> upper;  // F, minimized
  std::function<double(const SmdVars&)> lower;  // f, minimized
  std::vector<std::function<double(const SmdVars&)>> cu;  // G_n >= 0
  std::vector<std::function<double(const SmdVars&)>> cl;  // g_m >= 0
};

SmdDef smd_def(const std::string& name) {
  SmdDef d;
  if (name == "smd01") {
    d.box = {-5, 10, -5, 10, -5, 10, -1.5, 1.5};
    d.upper = [](const SmdVars& v) {
      const double c = v.u2 - std::tan(v.l2);
      return v.u1 * v.u1 + v.l1 * v.l1 + v.u2 * v.u2 + c * c;
    };
    d.lower = [](const SmdVars& v) {
      const double c = v.u2 - std::tan(v.l2);
      return v.u1 * v.u1 + v.l1 * v.l1 + c * c;
    };
  } else if (name == "smd02") {
    d.box = {-5, 10, -5, 1, -5, 10, std::exp(-5.0), std::exp(1.0)};
    d.upper = [](const SmdVars& v) {
      const double c = v.u2 - std::log(v.l2);
      return v.u1 * v.u1 - v.l1 * v.l1 + v.u2 * v.u2 - c * c;
    };
    d.lower = [](const SmdVars& v) {
      const double c = v.u2 - std::log(v.l2);
      return v.u1 * v.u1 + v.l1 * v.l1 + c * c;
    };
  } else if (name == "smd03") {
    d.box = {-5, 10, -5, 10, -5, 10, -1.5, 1.5};
    d.upper = [](const SmdVars& v) {
      const double c = v.u2 * v.u2 - std::tan(v.l2);
      return v.u1 * v.u1 + v.l1 * v.l1 + v.u2 * v.u2 + c * c;
    };
    d.lower = [](const SmdVars& v) {
      const double c = v.u2 * v.u2 - std::tan(v.l2);
      return v.u1 * v.u1 + (1.0 + v.l1 * v.l1 - std::cos(2.0 * kPi * v.l1)) +
             c * c;
    };
  } else if (name == "smd09") {
    d.box = {-5, 10, -5, 1, -5, 10, std::exp(-5.0) - 1.0, std::exp(1.0) - 1.0};
    d.upper = [](const SmdVars& v) {
      const double c = v.u2 - std::log1p(v.l2);
      return v.u1 * v.u1 - v.l1 * v.l1 + v.u2 * v.u2 - c * c;
    };
    d.lower = [](const SmdVars& v) {
      const double c = v.u2 - std::log1p(v.l2);
      return v.u1 * v.u1 + v.l1 * v.l1 + c * c;
    };
    d.cu = {[](const SmdVars& v) { return band_constraint(v.u1 + v.u2); }};
    d.cl = {[](const SmdVars& v) { return band_constraint(v.l1 + v.l2); }};
  } else if (name == "smd10") {
    d.box = {-5, 10, -5, 10, -5, 10, -1.5, 1.5};
    d.upper = [](const SmdVars& v) {
      const double c = v.u2 - std::tan(v.l2);
      return (v.u1 - 2.0) * (v.u1 - 2.0) + v.l1 * v.l1 +
             (v.u2 - 2.0) * (v.u2 - 2.0) - c * c;
    };
    d.lower = [](const SmdVars& v) {
      const double c = v.u2 - std::tan(v.l2);
      return v.u1 * v.u1 + v.l1 * v.l1 + c * c;
    };
    d.cu = {[](const SmdVars& v) { return v.u1 - v.u2 * v.u2 * v.u2; },
            [](const SmdVars& v) { return v.u2 - v.u1 * v.u1 * v.u1; }};
    d.cl = {[](const SmdVars& v) { return v.l1; }};
  } else if (name == "smd11") {
    d.box = {-5, 10, -1, 1, -5, 10, std::exp(-4.0), std::exp(1.0)};
    d.upper = [](const SmdVars& v) {
      const double c = v.u2 - std::log(v.l2);
      return v.u1 * v.u1 - v.l1 * v.l1 + v.u2 * v.u2 - c * c;
    };
    d.lower = [](const SmdVars& v) {
      const double c = v.u2 - std::log(v.l2);
      return v.u1 * v.u1 + v.l1 * v.l1 + c * c;
    };
    d.cu = {[](const SmdVars& v) { return v.u2 - 1.0 - std::log(v.l2); }};
    d.cl = {[](const SmdVars& v) {
      const double c = v.u2 - std::log(v.l2);
      return c * c - 1.0;
    }};
  } else if (name == "smd12") {
    d.box = {-5, 10, -5, 10, -5, 10, -1.5, 1.5};
    d.upper = [](const SmdVars& v) {
      const double c = v.u2 - std::tan(v.l2);
      return (v.u1 - 2.0) * (v.u1 - 2.0) + v.l1 * v.l1 +
             (v.u2 - 2.0) * (v.u2 - 2.0) - c * c;
    };
    d.lower = [](const SmdVars& v) {
      const double c = v.u2 - std::tan(v.l2);
      return v.u1 * v.u1 + v.l1 * v.l1 + c * c;
    };
    d.cu = {[](const SmdVars& v) { return v.u1 - v.u2 * v.u2 * v.u2; },
            [](const SmdVars& v) { return v.u2 - v.u1 * v.u1 * v.u1; },
            [](const SmdVars& v) { return band_constraint(v.u1 + v.u2); }};
    d.cl = {[](const SmdVars& v) { return v.l1; },
            [](const SmdVars& v) {
              const double c = v.u2 - std::tan(v.l2);
              return c * c - 1.0;
            }};
  } else {
    throw std::invalid_argument("unknown SMD problem: " + name);
  }
  return d;
}

BenchmarkSpec smd_problem(const std::string& name, int points_per_dim) {
  const SmdDef def = smd_def(name);
  BenchmarkSpec spec;
  spec.name = name;
  spec.d_x = 2;
  spec.d_theta = 2;
  spec.n_upper_constraints = static_cast<int>(def.cu.size());
  spec.n_lower_constraints = static_cast<int>(def.cl.size());
  spec.transform = Transform::signed_log1p;
  spec.grid = GridSpec::uniform(2, 2, points_per_dim);

  const SmdBox box = def.box;
  const auto upper = def.upper;
  const auto lower = def.lower;
  spec.eval_f = [box, upper](const Eigen::VectorXd& x, const Eigen::VectorXd& t) {
    return apply_transform(-upper(box.vars(x, t)), Transform::signed_log1p);
  };
  spec.eval_g = [box, lower](const Eigen::VectorXd& x, const Eigen::VectorXd& t) {
    return apply_transform(-lower(box.vars(x, t)), Transform::signed_log1p);
  };
  const auto cu = def.cu;
  spec.eval_cu = [box, cu](const Eigen::VectorXd& x, const Eigen::VectorXd& t) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(cu.size()));
    const SmdVars v = box.vars(x, t);
    for (std::size_t i = 0; i < cu.size(); ++i) {
      out(static_cast<Eigen::Index>(i)) =
          apply_transform(cu[i](v), Transform::signed_log1p);
    }
    return out;
  };
  const auto cl = def.cl;
  spec.eval_cl = [box, cl](const Eigen::VectorXd& x, const Eigen::VectorXd& t) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(cl.size()));
    const SmdVars v = box.vars(x, t);
    for (std::size_t i = 0; i < cl.size(); ++i) {
      out(static_cast<Eigen::Index>(i)) =
          apply_transform(cl[i](v), Transform::signed_log1p);
    }
    return out;
  };
  return spec;
}

BenchmarkSpec composed_problem(const std::string& name, int points_per_dim) {
  BenchmarkSpec spec;
  spec.name = name;
  spec.d_x = 1;
  spec.d_theta = 1;
  spec.transform = Transform::signed_log1p;
  spec.grid = GridSpec::uniform(1, 1, points_per_dim);
  if (name == "bg") {
    spec.eval_f = [](const Eigen::VectorXd& x, const Eigen::VectorXd& t) {
      return apply_transform(
          -branin(rescale(x(0), -5.0, 10.0), rescale(t(0), 0.0, 15.0)),
          Transform::signed_log1p);
    };
    spec.eval_g = [](const Eigen::VectorXd& x, const Eigen::VectorXd& t) {
      return apply_transform(
          -goldstein_price(rescale(x(0), -2.0, 2.0), rescale(t(0), -2.0, 2.0)),
          Transform::signed_log1p);
    };
  } else if (name == "sb") {
    spec.eval_f = [](const Eigen::VectorXd& x, const Eigen::VectorXd& t) {
      return apply_transform(
          -six_hump_camel(rescale(x(0), -3.0, 3.0), rescale(t(0), -2.0, 2.0)),
          Transform::signed_log1p);
    };
    spec.eval_g = [](const Eigen::VectorXd& x, const Eigen::VectorXd& t) {
      return apply_transform(
          -branin(rescale(x(0), -5.0, 10.0), rescale(t(0), 0.0, 15.0)),
          Transform::signed_log1p);
    };
  } else {
    throw std::invalid_argument("unknown composed problem: " + name);
  }
  return spec;
}

// frozen prior draw with a stable feature-map address
struct FrozenPath {
  FeatureMap map;
  PathSample path;
};

std::shared_ptr<FrozenPath> freeze_prior_path(double lengthscale, int dim,
                                              int rff_dim, RngStream rng) {
  auto fp = std::make_shared<FrozenPath>();
  GpHyperparams h;
  h.prior_mean = 0.0;
  h.lengthscale = lengthscale;
  h.output_scale = 1.0;
  RngStream map_rng = rng.substream(1);
  RngStream w_rng = rng.substream(2);
  fp->map = draw_feature_map(h, rff_dim, dim, map_rng);
  fp->path = draw_prior_path(fp->map, w_rng);
  fp->path.map = &fp->map;
  return fp;
}

}  // namespace

BenchmarkSpec gp_prior_problem(double lengthscale_upper, double lengthscale_lower,
                               std::uint64_t seed, int points_per_dim,
                               int rff_dim) {
  BenchmarkSpec spec;
  std::ostringstream name;
  name << "gp-prior:lU=" << lengthscale_upper << ",lL=" << lengthscale_lower
       << ",seed=" << seed;
  spec.name = name.str();
  spec.d_x = 1;
  spec.d_theta = 1;
  spec.transform = Transform::identity;
  spec.grid = GridSpec::uniform(1, 1, points_per_dim);

  RngStream root(mix64(seed ^ 0x67D5EB0A3CULL));
  auto fp = freeze_prior_path(lengthscale_upper, 2, rff_dim, root.substream(10));
  auto gp = freeze_prior_path(lengthscale_lower, 2, rff_dim, root.substream(20));

  spec.eval_f = [fp](const Eigen::VectorXd& x, const Eigen::VectorXd& t) {
    Eigen::VectorXd z(x.size() + t.size());
    z << x, t;
    return eval_path(fp->path, z);
  };
  spec.eval_g = [gp](const Eigen::VectorXd& x, const Eigen::VectorXd& t) {
    Eigen::VectorXd z(x.size() + t.size());
    z << x, t;
    return eval_path(gp->path, z);
  };
  return spec;
}

std::vector<std::string> problem_catalog() {
  return {"gp-prior", "bg",    "sb",    "smd01", "smd02",
          "smd03",    "smd09", "smd10", "smd11", "smd12"};
}

BenchmarkSpec make_problem(const std::string& name,
                           const std::map<std::string, double>& params) {
  auto param = [&params](const std::string& key, double fallback) {
    const auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  };
  if (name == "gp-prior") {
    return gp_prior_problem(param("lU", 0.25), param("lL", 0.25),
                            static_cast<std::uint64_t>(param("seed", 0.0)),
                            static_cast<int>(param("grid", 100.0)),
                            static_cast<int>(param("rff", 4096.0)));
  }
  if (name == "bg" || name == "sb") {
    return composed_problem(name, static_cast<int>(param("grid", 100.0)));
  }
  if (name.rfind("smd", 0) == 0) {
    return smd_problem(name, static_cast<int>(param("grid", 10.0)));
  }
  throw std::invalid_argument("unknown problem: " + name);
}

BenchmarkSpec make_problem(const std::string& name_and_params) {
  const auto colon = name_and_params.find(':');
  const std::string name = name_and_params.substr(0, colon);
  std::map<std::string, double> params;
  if (colon != std::string::npos) {
    std::stringstream ss(name_and_params.substr(colon + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) {
        throw std::invalid_argument("bad problem parameter: " + item);
      }
      params[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
    }
  }
  return make_problem(name, params);
}

GroundTruth compute_ground_truth(const BenchmarkSpec& spec) {
  const int nx = spec.grid.n_x();
  const int nt = spec.grid.n_theta();
  GroundTruth gt;
  gt.f_table.resize(nx, nt);
  gt.g_table.resize(nx, nt);
  gt.cu_tables.assign(static_cast<std::size_t>(spec.n_upper_constraints),
                      Eigen::MatrixXd(nx, nt));
  gt.cl_tables.assign(static_cast<std::size_t>(spec.n_lower_constraints),
                      Eigen::MatrixXd(nx, nt));

  for (int ix = 0; ix < nx; ++ix) {
    for (int it = 0; it < nt; ++it) {
      const auto& x = spec.grid.x_grid[static_cast<std::size_t>(ix)];
      const auto& t = spec.grid.theta_grid[static_cast<std::size_t>(it)];
      gt.f_table(ix, it) = spec.eval_f(x, t);
      gt.g_table(ix, it) = spec.eval_g(x, t);
      if (spec.n_upper_constraints > 0) {
        const Eigen::VectorXd c = spec.eval_cu(x, t);
        for (int n = 0; n < spec.n_upper_constraints; ++n) {
          gt.cu_tables[static_cast<std::size_t>(n)](ix, it) = c(n);
        }
      }
      if (spec.n_lower_constraints > 0) {
        const Eigen::VectorXd c = spec.eval_cl(x, t);
        for (int m = 0; m < spec.n_lower_constraints; ++m) {
          gt.cl_tables[static_cast<std::size_t>(m)](ix, it) = c(m);
        }
      }
    }
  }
  if (!gt.f_table.allFinite() || !gt.g_table.allFinite()) {
    throw NumericError("benchmark evaluator returned a non-finite value");
  }

  auto lower_feasible = [&gt](int ix, int it) {
    for (const auto& c : gt.cl_tables) {
      if (c(ix, it) < 0.0) return false;
    }
    return true;
  };
  auto upper_feasible = [&gt](int ix, int it) {
    for (const auto& c : gt.cu_tables) {
      if (c(ix, it) < 0.0) return false;
    }
    return true;
  };

  gt.theta_star_table.assign(static_cast<std::size_t>(nx), 0);
  gt.g_at_theta_star.resize(nx);
  gt.min_g_per_x.resize(nx);
  for (int ix = 0; ix < nx; ++ix) {
    int best = -1;
    double best_g = -std::numeric_limits<double>::infinity();
    for (int it = 0; it < nt; ++it) {
      if (!lower_feasible(ix, it)) continue;
      if (gt.g_table(ix, it) > best_g) {
        best_g = gt.g_table(ix, it);
        best = it;
      }
    }
    if (best < 0) {
      gt.feasibility_fallback = true;
      for (int it = 0; it < nt; ++it) {
        if (gt.g_table(ix, it) > best_g) {
          best_g = gt.g_table(ix, it);
          best = it;
        }
      }
    }
    gt.theta_star_table[static_cast<std::size_t>(ix)] = best;
    gt.g_at_theta_star(ix) = best_g;
    gt.min_g_per_x(ix) = gt.g_table.row(ix).minCoeff();
  }

  gt.x_star_index = -1;
  double best_f = -std::numeric_limits<double>::infinity();
  for (int ix = 0; ix < nx; ++ix) {
    const int it = gt.theta_star_table[static_cast<std::size_t>(ix)];
    if (!upper_feasible(ix, it)) continue;
    if (gt.f_table(ix, it) > best_f) {
      best_f = gt.f_table(ix, it);
      gt.x_star_index = ix;
    }
  }
  if (gt.x_star_index < 0) {
    gt.feasibility_fallback = true;
    for (int ix = 0; ix < nx; ++ix) {
      const int it = gt.theta_star_table[static_cast<std::size_t>(ix)];
      if (gt.f_table(ix, it) > best_f) {
        best_f = gt.f_table(ix, it);
        gt.x_star_index = ix;
      }
    }
  }
  gt.f_star = best_f;
  gt.min_f = gt.f_table.minCoeff();

  gt.max_violation_cu.resize(spec.n_upper_constraints);
  for (int n = 0; n < spec.n_upper_constraints; ++n) {
    gt.max_violation_cu(n) =
        (-gt.cu_tables[static_cast<std::size_t>(n)].array()).max(0.0).maxCoeff();
  }
  gt.max_violation_cl.resize(spec.n_lower_constraints);
  for (int m = 0; m < spec.n_lower_constraints; ++m) {
    gt.max_violation_cl(m) =
        (-gt.cl_tables[static_cast<std::size_t>(m)].array()).max(0.0).maxCoeff();
  }
  return gt;
}

}  // namespace bljes
