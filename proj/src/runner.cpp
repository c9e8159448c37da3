#include "bljes/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "bljes/simd.hpp"
#include "bljes/stats.hpp"

namespace bljes {

const char* method_name(Method m) {
  return m == Method::bljes ? "bljes" : "random";
}

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::coupled:
      return "coupled";
    case Mode::decoupled:
      return "decoupled";
    case Mode::constrained:
    default:
      return "constrained";
  }
}

const char* domain_name(DomainMode d) {
  return d == DomainMode::pool ? "pool" : "continuous";
}

namespace {

enum RunTag : std::uint64_t {
  kTagInit = 101,
  kTagNoiseF,
  kTagNoiseG,
  kTagNoiseCu,
  kTagNoiseCl,
  kTagFit,
  kTagBundle,
  kTagBaseline,
  kTagFallback,
  kTagSelect,
};

std::pair<std::string, std::map<std::string, double>> parse_problem_string(
    const std::string& text) {
  const auto colon = text.find(':');
  std::map<std::string, double> params;
  const std::string name = text.substr(0, colon);
  if (colon != std::string::npos) {
    std::stringstream ss(text.substr(colon + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) {
        throw std::invalid_argument("bad problem parameter: " + item);
      }
      params[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
    }
  }
  return {name, params};
}

}  // namespace

BenchmarkSpec problem_for_seed(const RunConfig& config, std::uint64_t seed) {
  auto [name, params] = parse_problem_string(config.problem);
  if (name == "gp-prior" && params.find("seed") == params.end()) {
    params["seed"] = static_cast<double>(seed);
  }
  if (config.grid_override > 0) {
    params["grid"] = static_cast<double>(config.grid_override);
  } else if (config.domain_mode == DomainMode::continuous &&
             params.find("grid") == params.end()) {
    // dense reference grid for the regret normalizers
    BenchmarkSpec probe = make_problem(name, params);
    params["grid"] = probe.d_x + probe.d_theta <= 2 ? 200.0 : 30.0;
  }
  return make_problem(name, params);
}

RandomChoice baseline_random(int pool_size, Mode mode, RngStream& rng) {
  if (pool_size < 1) {
    throw std::invalid_argument("baseline_random: empty pool");
  }
  RandomChoice c;
  c.pool_index = static_cast<int>(rng.uniform_index(
      static_cast<std::uint64_t>(pool_size)));
  if (mode == Mode::decoupled) {
    c.both_levels = false;
    c.level = rng.uniform_index(2) == 0 ? Level::upper : Level::lower;
  }
  return c;
}

namespace {

struct SeedRun {
  const RunConfig& config;
  BenchmarkSpec spec;
  GroundTruth gt;
  std::uint64_t seed;
  RngStream root;
  RngStream noise_f;
  RngStream noise_g;
  std::vector<RngStream> noise_cu;
  std::vector<RngStream> noise_cl;
  Dataset data;
  std::optional<GpHyperparams> hyper_f, hyper_g;
  std::vector<std::optional<GpHyperparams>> hyper_cu, hyper_cl;
  RunResult result;
  double best_regret = std::numeric_limits<double>::infinity();

  SeedRun(const RunConfig& cfg, std::uint64_t sd, const ProblemFactory& factory)
      : config(cfg),
        spec(factory(sd)),
        gt(compute_ground_truth(spec)),
        seed(sd),
        root(mix64(sd ^ 0x9b1fb5a2d3c4e607ULL)),
        noise_f(root.substream(kTagNoiseF)),
        noise_g(root.substream(kTagNoiseG)) {
    for (int c = 0; c < spec.n_upper_constraints; ++c) {
      noise_cu.push_back(root.substream(kTagNoiseCu, static_cast<std::uint64_t>(c)));
    }
    for (int c = 0; c < spec.n_lower_constraints; ++c) {
      noise_cl.push_back(root.substream(kTagNoiseCl, static_cast<std::uint64_t>(c)));
    }
    result.seed = sd;
    data.n0 = static_cast<std::size_t>(cfg.n0);
  }

  bool constrained() const { return config.mode == Mode::constrained; }

  // observation with additive noise per level; each level consumes only
  // its own noise stream so decoupled and coupled runs stay comparable
  QueryRecord observe(const QueryPoint& point, int pool_index,
                      const std::string& level_label, bool observe_f,
                      bool observe_g, int iteration) {
    QueryRecord rec;
    rec.iteration = iteration;
    rec.point = point;
    rec.pool_index = pool_index;
    rec.level = level_label;

    ObservationRecord obs;
    obs.point = point;
    if (observe_f) {
      double f_true;
      if (pool_index >= 0) {
        f_true = gt.f_table(pool_index / spec.grid.n_theta(),
                            pool_index % spec.grid.n_theta());
      } else {
        f_true = spec.eval_f(point.x, point.theta);
      }
      rec.y_f = f_true + config.noise_std_f * noise_f.gaussian();
      obs.y_f = rec.y_f;
    }
    if (observe_g) {
      double g_true;
      if (pool_index >= 0) {
        g_true = gt.g_table(pool_index / spec.grid.n_theta(),
                            pool_index % spec.grid.n_theta());
      } else {
        g_true = spec.eval_g(point.x, point.theta);
      }
      rec.y_g = g_true + config.noise_std_g * noise_g.gaussian();
      obs.y_g = rec.y_g;
    }
    if (constrained()) {
      // constraints ride along with every constrained-mode observation
      const int ix = pool_index / spec.grid.n_theta();
      const int it = pool_index % spec.grid.n_theta();
      rec.y_cu.resize(spec.n_upper_constraints);
      for (int c = 0; c < spec.n_upper_constraints; ++c) {
        rec.y_cu(c) = gt.cu_tables[static_cast<std::size_t>(c)](ix, it) +
                      config.noise_std_f * noise_cu[static_cast<std::size_t>(c)].gaussian();
      }
      rec.y_cl.resize(spec.n_lower_constraints);
      for (int c = 0; c < spec.n_lower_constraints; ++c) {
        rec.y_cl(c) = gt.cl_tables[static_cast<std::size_t>(c)](ix, it) +
                      config.noise_std_g * noise_cl[static_cast<std::size_t>(c)].gaussian();
      }
      obs.y_cu = rec.y_cu;
      obs.y_cl = rec.y_cl;
    }
    data.records.push_back(obs);

    const RegretComponents rc =
        pool_index >= 0
            ? regret_components_at(pool_index / spec.grid.n_theta(),
                                   pool_index % spec.grid.n_theta(), spec, gt)
            : regret_components_continuous(point, spec, gt);
    best_regret = std::min(best_regret, rc.aggregate());
    rec.regret_running = best_regret;
    return rec;
  }

  // inputs/targets of the records carrying this level's observations
  std::pair<Eigen::MatrixXd, Eigen::VectorXd> level_data(Level level) const {
    std::vector<const ObservationRecord*> recs;
    for (const auto& r : data.records) {
      const auto& y = level == Level::upper ? r.y_f : r.y_g;
      if (y.has_value()) recs.push_back(&r);
    }
    const auto n = static_cast<Eigen::Index>(recs.size());
    Eigen::MatrixXd in(n, spec.d_x + spec.d_theta);
    Eigen::VectorXd t(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      in.row(i) = recs[static_cast<std::size_t>(i)]->point.joint().transpose();
      t(i) = level == Level::upper ? *recs[static_cast<std::size_t>(i)]->y_f
                                    : *recs[static_cast<std::size_t>(i)]->y_g;
    }
    return {in, t};
  }

  std::pair<Eigen::MatrixXd, Eigen::VectorXd> constraint_data(Level level,
                                                              int c) const {
    std::vector<const ObservationRecord*> recs;
    for (const auto& r : data.records) {
      const auto& y = level == Level::upper ? r.y_cu : r.y_cl;
      if (y.size() > c) recs.push_back(&r);
    }
    const auto n = static_cast<Eigen::Index>(recs.size());
    Eigen::MatrixXd in(n, spec.d_x + spec.d_theta);
    Eigen::VectorXd t(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      in.row(i) = recs[static_cast<std::size_t>(i)]->point.joint().transpose();
      t(i) = level == Level::upper ? recs[static_cast<std::size_t>(i)]->y_cu(c)
                                    : recs[static_cast<std::size_t>(i)]->y_cl(c);
    }
    return {in, t};
  }

  GpHyperparams default_hyper(const Eigen::VectorXd& targets) const {
    GpHyperparams h;
    h.prior_mean = targets.size() > 0 ? targets.mean() : 0.0;
    h.lengthscale = 0.2;
    const double var =
        targets.size() > 1
            ? (targets.array() - targets.mean()).square().sum() /
                  static_cast<double>(targets.size() - 1)
            : 1.0;
    h.output_scale = std::max(var, 1e-3);
    h.noise_variance = std::max(kNoiseFloor, 1e-4 * h.output_scale);
    return clamp_to_bounds(h);
  }

  GpHyperparams refit(const Eigen::MatrixXd& in, const Eigen::VectorXd& t,
                      std::optional<GpHyperparams>& prev, RngStream rng) {
    if (t.size() < 2) {
      if (!prev.has_value()) prev = default_hyper(t);
      return *prev;
    }
    const GpHyperparams init = prev.has_value() ? *prev : default_hyper(t);
    const FitResult fr = fit_hyperparameters(in, t, init, rng);
    if (fr.fallback) ++result.fit_fallback_count;
    prev = fr.hyper;
    return *prev;
  }

  Models fit_models(int iteration) {
    RngStream fit_rng = root.substream(kTagFit, static_cast<std::uint64_t>(iteration));
    const auto [in_f, t_f] = level_data(Level::upper);
    const auto [in_g, t_g] = level_data(Level::lower);
    const GpHyperparams hf = refit(in_f, t_f, hyper_f, fit_rng.substream(0));
    const GpHyperparams hg = refit(in_g, t_g, hyper_g, fit_rng.substream(1));

    Models models{GpModel(hf, in_f, t_f), GpModel(hg, in_g, t_g), {}, {}};
    if (constrained()) {
      hyper_cu.resize(static_cast<std::size_t>(spec.n_upper_constraints));
      hyper_cl.resize(static_cast<std::size_t>(spec.n_lower_constraints));
      for (int c = 0; c < spec.n_upper_constraints; ++c) {
        const auto [in_c, t_c] = constraint_data(Level::upper, c);
        const GpHyperparams hc =
            refit(in_c, t_c, hyper_cu[static_cast<std::size_t>(c)],
                  fit_rng.substream(100 + static_cast<std::uint64_t>(c)));
        models.cu.emplace_back(hc, in_c, t_c);
      }
      for (int c = 0; c < spec.n_lower_constraints; ++c) {
        const auto [in_c, t_c] = constraint_data(Level::lower, c);
        const GpHyperparams hc =
            refit(in_c, t_c, hyper_cl[static_cast<std::size_t>(c)],
                  fit_rng.substream(200 + static_cast<std::uint64_t>(c)));
        models.cl.emplace_back(hc, in_c, t_c);
      }
    }
    return models;
  }

  void run() {
    const bool pool = config.domain_mode == DomainMode::pool;
    RngStream init_rng = root.substream(kTagInit);
    for (int i = 0; i < config.n0; ++i) {
      if (pool) {
        const int idx = static_cast<int>(
            init_rng.uniform_index(static_cast<std::uint64_t>(spec.grid.pool_size())));
        result.log.push_back(observe(spec.grid.pool_point(idx), idx, "init",
                                     true, true, 0));
      } else {
        QueryPoint p;
        p.x.resize(spec.d_x);
        p.theta.resize(spec.d_theta);
        for (int a = 0; a < spec.d_x; ++a) p.x(a) = init_rng.uniform01();
        for (int a = 0; a < spec.d_theta; ++a) p.theta(a) = init_rng.uniform01();
        result.log.push_back(observe(p, -1, "init", true, true, 0));
      }
    }
    result.regret_per_iteration.push_back(best_regret);

    for (int t = 1; t <= config.iterations; ++t) {
      const auto started = std::chrono::steady_clock::now();
      QueryRecord rec;
      try {
        rec = step(t);
      } catch (const NumericError&) {
        // keep the run alive with a random fallback query
        RngStream fb = root.substream(kTagFallback, static_cast<std::uint64_t>(t));
        const RandomChoice rc = baseline_random(
            pool ? spec.grid.pool_size() : 1, config.mode, fb);
        QueryPoint p;
        int idx = -1;
        if (pool) {
          idx = rc.pool_index;
          p = spec.grid.pool_point(idx);
        } else {
          p.x.resize(spec.d_x);
          p.theta.resize(spec.d_theta);
          for (int a = 0; a < spec.d_x; ++a) p.x(a) = fb.uniform01();
          for (int a = 0; a < spec.d_theta; ++a) p.theta(a) = fb.uniform01();
        }
        const bool of = rc.both_levels || rc.level == Level::upper;
        const bool og = rc.both_levels || rc.level == Level::lower;
        rec = observe(p, idx, rc.both_levels ? "both" : (of ? "f" : "g"), of, og, t);
        rec.fallback = true;
        ++result.fallback_count;
      }
      rec.wall_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
              .count();
      result.log.push_back(std::move(rec));
      result.regret_per_iteration.push_back(best_regret);
    }
  }

  QueryRecord step(int t) {
    const bool pool = config.domain_mode == DomainMode::pool;

    if (config.method == Method::random_search) {
      RngStream base = root.substream(kTagBaseline, static_cast<std::uint64_t>(t));
      if (pool) {
        const RandomChoice rc =
            baseline_random(spec.grid.pool_size(), config.mode, base);
        const bool of = rc.both_levels || rc.level == Level::upper;
        const bool og = rc.both_levels || rc.level == Level::lower;
        return observe(spec.grid.pool_point(rc.pool_index), rc.pool_index,
                       rc.both_levels ? "both" : (of ? "f" : "g"), of, og, t);
      }
      QueryPoint p;
      p.x.resize(spec.d_x);
      p.theta.resize(spec.d_theta);
      for (int a = 0; a < spec.d_x; ++a) p.x(a) = base.uniform01();
      for (int a = 0; a < spec.d_theta; ++a) p.theta(a) = base.uniform01();
      bool of = true, og = true;
      std::string label = "both";
      if (config.mode == Mode::decoupled) {
        const bool f_side = base.uniform_index(2) == 0;
        of = f_side;
        og = !f_side;
        label = f_side ? "f" : "g";
      }
      return observe(p, -1, label, of, og, t);
    }

    const Models models = fit_models(t);
    RngStream bundle_rng = root.substream(kTagBundle, static_cast<std::uint64_t>(t));
    BundleConfig bc;
    bc.k_samples = config.k_samples;
    bc.rff_dim = config.rff_dim;
    bc.shared_feature_map = config.shared_feature_map;
    bc.constrained = constrained();

    if (pool) {
      const McBundle bundle = build_bundle(models, spec.grid, bc, bundle_rng);
      const AcqMode am = config.mode == Mode::coupled
                             ? AcqMode::coupled
                             : (config.mode == Mode::decoupled
                                    ? AcqMode::decoupled
                                    : AcqMode::constrained);
      const Selection sel = select_next(spec.grid, models, bundle, am);
      const bool of = sel.both_levels || sel.level == Level::upper;
      const bool og = sel.both_levels || sel.level == Level::lower;
      return observe(spec.grid.pool_point(sel.pool_index), sel.pool_index,
                     sel.both_levels ? "both" : (of ? "f" : "g"), of, og, t);
    }

    const McBundle bundle =
        build_bundle_continuous(models, spec.d_x, spec.d_theta, bc, bundle_rng);
    RngStream sel_rng = root.substream(kTagSelect, static_cast<std::uint64_t>(t));
    const AcqMode am =
        config.mode == Mode::coupled ? AcqMode::coupled : AcqMode::decoupled;
    const ContinuousSelection sel = select_next_continuous(
        models, bundle, spec.d_x, spec.d_theta, am, sel_rng);
    const bool of = sel.both_levels || sel.level == Level::upper;
    const bool og = sel.both_levels || sel.level == Level::lower;
    return observe(sel.point, -1, sel.both_levels ? "both" : (of ? "f" : "g"),
                   of, og, t);
  }
};

}  // namespace

std::vector<RunResult> run_experiment(const RunConfig& config,
                                      const ProblemFactory& factory) {
  if (config.iterations < 1 || config.k_samples < 1 || config.n0 < 1 ||
      config.seeds.empty()) {
    throw std::invalid_argument("run_experiment: invalid configuration");
  }
  if (config.mode == Mode::constrained &&
      config.domain_mode == DomainMode::continuous) {
    throw std::invalid_argument(
        "run_experiment: constrained mode is pool-only");
  }
  std::vector<RunResult> out;
  out.reserve(config.seeds.size());
  for (const auto seed : config.seeds) {
    SeedRun run(config, seed, factory);
    run.run();
    out.push_back(std::move(run.result));
  }
  return out;
}

std::vector<RunResult> run_experiment(const RunConfig& config) {
  return run_experiment(config, [&config](std::uint64_t seed) {
    return problem_for_seed(config, seed);
  });
}

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// standard CSV quoting for fields that may carry commas (problem strings)
std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

void emit_results(const std::vector<RunResult>& results, const RunConfig& config) {
  if (results.empty()) {
    throw std::invalid_argument("emit_results: no results");
  }
  namespace fs = std::filesystem;
  fs::create_directories(config.output_dir);

  const BenchmarkSpec spec = problem_for_seed(config, results.front().seed);

  for (const auto& r : results) {
    const fs::path path =
        fs::path(config.output_dir) / ("run_seed" + std::to_string(r.seed) + ".csv");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "problem,method,mode,seed,iter,level";
    for (int a = 0; a < spec.d_x; ++a) out << ",x" << a;
    for (int a = 0; a < spec.d_theta; ++a) out << ",theta" << a;
    out << ",y_f,y_g,regret\n";
    for (const auto& rec : r.log) {
      out << csv_field(config.problem) << ',' << method_name(config.method)
          << ',' << mode_name(config.mode) << ',' << r.seed << ','
          << rec.iteration << ',' << rec.level;
      for (int a = 0; a < spec.d_x; ++a) out << ',' << format_double(rec.point.x(a));
      for (int a = 0; a < spec.d_theta; ++a) {
        out << ',' << format_double(rec.point.theta(a));
      }
      out << ',' << (rec.y_f ? format_double(*rec.y_f) : std::string())
          << ',' << (rec.y_g ? format_double(*rec.y_g) : std::string())
          << ',' << format_double(rec.regret_running) << '\n';
    }
  }

  {
    const fs::path path = fs::path(config.output_dir) / "summary.csv";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "iter,regret_median,regret_q25,regret_q75\n";
    const std::size_t t_count = results.front().regret_per_iteration.size();
    for (std::size_t t = 0; t < t_count; ++t) {
      std::vector<double> vals;
      vals.reserve(results.size());
      for (const auto& r : results) vals.push_back(r.regret_per_iteration[t]);
      std::sort(vals.begin(), vals.end());
      out << t << ',' << format_double(quantile_sorted(vals, 0.5)) << ','
          << format_double(quantile_sorted(vals, 0.25)) << ','
          << format_double(quantile_sorted(vals, 0.75)) << '\n';
    }
  }

  {
    const fs::path path = fs::path(config.output_dir) / "manifest.txt";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "problem=" << config.problem << '\n';
    out << "method=" << method_name(config.method) << '\n';
    out << "mode=" << mode_name(config.mode) << '\n';
    out << "domain=" << domain_name(config.domain_mode) << '\n';
    out << "iterations=" << config.iterations << '\n';
    out << "n0=" << config.n0 << '\n';
    out << "k_samples=" << config.k_samples << '\n';
    out << "rff_dim=" << config.rff_dim << '\n';
    out << "noise_std_f=" << format_double(config.noise_std_f) << '\n';
    out << "noise_std_g=" << format_double(config.noise_std_g) << '\n';
    out << "grid_override=" << config.grid_override << '\n';
    out << "shared_feature_map=" << (config.shared_feature_map ? 1 : 0) << '\n';
    out << "summary_statistic=median_with_quartiles\n";
    out << "simd=" << simd::isa_name(simd::active_isa()) << '\n';
    out << "version=0.1.0\n";
    out << "seeds=";
    for (std::size_t i = 0; i < config.seeds.size(); ++i) {
      if (i > 0) out << ',';
      out << config.seeds[i];
    }
    out << '\n';
    for (const auto& r : results) {
      out << "fallbacks_seed" << r.seed << '=' << r.fallback_count << '\n';
    }
    for (const auto& r : results) {
      out << "fit_fallbacks_seed" << r.seed << '=' << r.fit_fallback_count << '\n';
    }
  }
}

void apply_config_entry(RunConfig& config, const std::string& key,
                        const std::string& value) {
  if (key == "problem") {
    config.problem = value;
  } else if (key == "method") {
    if (value == "bljes") {
      config.method = Method::bljes;
    } else if (value == "random") {
      config.method = Method::random_search;
    } else {
      throw std::invalid_argument("unknown method: " + value);
    }
  } else if (key == "mode") {
    if (value == "coupled") {
      config.mode = Mode::coupled;
    } else if (value == "decoupled") {
      config.mode = Mode::decoupled;
    } else if (value == "constrained") {
      config.mode = Mode::constrained;
    } else {
      throw std::invalid_argument("unknown mode: " + value);
    }
  } else if (key == "domain") {
    if (value == "pool") {
      config.domain_mode = DomainMode::pool;
    } else if (value == "continuous") {
      config.domain_mode = DomainMode::continuous;
    } else {
      throw std::invalid_argument("unknown domain mode: " + value);
    }
  } else if (key == "iters") {
    config.iterations = std::stoi(value);
  } else if (key == "n0") {
    config.n0 = std::stoi(value);
  } else if (key == "k-samples" || key == "k_samples") {
    config.k_samples = std::stoi(value);
  } else if (key == "rff-dim" || key == "rff_dim") {
    config.rff_dim = std::stoi(value);
  } else if (key == "noise-std" || key == "noise_std") {
    config.noise_std_f = std::stod(value);
    config.noise_std_g = std::stod(value);
  } else if (key == "noise-std-f" || key == "noise_std_f") {
    config.noise_std_f = std::stod(value);
  } else if (key == "noise-std-g" || key == "noise_std_g") {
    config.noise_std_g = std::stod(value);
  } else if (key == "seeds") {
    config.seeds = parse_seed_list(value);
  } else if (key == "grid") {
    config.grid_override = std::stoi(value);
  } else if (key == "out") {
    config.output_dir = value;
  } else if (key == "shared-feature-map" || key == "shared_feature_map") {
    config.shared_feature_map = value == "1" || value == "true";
  } else {
    throw std::invalid_argument("unknown configuration key: " + key);
  }
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file: " + path);
  RunConfig config;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("bad config line: " + line);
    }
    apply_config_entry(config, line.substr(0, eq), line.substr(eq + 1));
  }
  return config;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const auto lo = std::stoull(text.substr(0, dots));
    const auto hi = std::stoull(text.substr(dots + 2));
    for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
  } else {
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (!item.empty()) seeds.push_back(std::stoull(item));
    }
  }
  if (seeds.empty()) throw std::invalid_argument("empty seed list");
  return seeds;
}

}  // namespace bljes
