#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bljes/regret.hpp"
#include "bljes/rng.hpp"

using namespace bljes;

namespace {

// 3x3 toy with hand-enumerated regret components:
//   g table (x rows, theta cols):      f table:
//     x=0:   1 3 2                       0 4 1
//     x=0.5: 2 2 0                       2 1 3
//     x=1:   5 4 6                       6 2 5
// theta*(x) = (0.5, 0, 1), curve f = (4, 2, 5), f* = 5 at x = 1,
// min f = 0, per-x g normalizers (2, 2, 2).
BenchmarkSpec toy_spec() {
  BenchmarkSpec spec;
  spec.name = "toy3x3";
  spec.d_x = 1;
  spec.d_theta = 1;
  spec.grid = GridSpec::uniform(1, 1, 3);
  static const double f_tab[3][3] = {{0, 4, 1}, {2, 1, 3}, {6, 2, 5}};
  static const double g_tab[3][3] = {{1, 3, 2}, {2, 2, 0}, {5, 4, 6}};
  auto index_of = [](double v) { return static_cast<int>(std::lround(v * 2.0)); };
  spec.eval_f = [index_of](const Eigen::VectorXd& x, const Eigen::VectorXd& t) {
    return f_tab[index_of(x(0))][index_of(t(0))];
  };
  spec.eval_g = [index_of](const Eigen::VectorXd& x, const Eigen::VectorXd& t) {
    return g_tab[index_of(x(0))][index_of(t(0))];
  };
  return spec;
}

QueryPoint point_at(double x, double t) {
  return {Eigen::VectorXd::Constant(1, x), Eigen::VectorXd::Constant(1, t)};
}

}  // namespace

TEST_CASE("toy grid regret components match the hand enumeration") {
  const BenchmarkSpec spec = toy_spec();
  const GroundTruth gt = compute_ground_truth(spec);
  CHECK(gt.f_star == 5.0);
  CHECK(gt.min_f == 0.0);
  CHECK(gt.theta_star_table[0] == 1);
  CHECK(gt.theta_star_table[1] == 0);
  CHECK(gt.theta_star_table[2] == 2);

  const double expect_rf[3][3] = {{1.0, 0.2, 0.8}, {0.6, 0.8, 0.4}, {0.0, 0.6, 0.0}};
  const double expect_rg[3][3] = {{1.0, 0.0, 0.5}, {0.0, 0.0, 1.0}, {0.5, 1.0, 0.0}};
  for (int ix = 0; ix < 3; ++ix) {
    for (int it = 0; it < 3; ++it) {
      const RegretComponents rc = regret_components_at(ix, it, spec, gt);
      CHECK(rc.r_f == doctest::Approx(expect_rf[ix][it]).epsilon(1e-14));
      CHECK(rc.r_g == doctest::Approx(expect_rg[ix][it]).epsilon(1e-14));
      CHECK(rc.r_c.size() == 0);
    }
  }

  // off-curve f above f* exercises the max(0, .) clamp: f(1, 0) = 6 > 5
  CHECK(regret_components_at(2, 0, spec, gt).r_f == 0.0);
}

TEST_CASE("regret at the optimum is zero and theta* rows are lower-optimal") {
  const BenchmarkSpec spec = toy_spec();
  const GroundTruth gt = compute_ground_truth(spec);
  const RegretComponents at_opt = regret_components_at(
      gt.x_star_index, gt.theta_star_table[static_cast<std::size_t>(gt.x_star_index)],
      spec, gt);
  CHECK(at_opt.r_f == 0.0);
  CHECK(at_opt.r_g == 0.0);
  for (int ix = 0; ix < 3; ++ix) {
    const RegretComponents rc = regret_components_at(
        ix, gt.theta_star_table[static_cast<std::size_t>(ix)], spec, gt);
    CHECK(rc.r_g == 0.0);
  }
}

TEST_CASE("bilevel simple regret is a running minimum of the worst component") {
  const BenchmarkSpec spec = toy_spec();
  const GroundTruth gt = compute_ground_truth(spec);

  const std::vector<QueryPoint> points = {point_at(0.0, 0.5), point_at(1.0, 0.0),
                                          point_at(1.0, 1.0)};
  const std::vector<double> r = bilevel_simple_regret(points, spec, gt);
  REQUIRE(r.size() == 3);
  CHECK(r[0] == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(r[1] == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(r[2] == 0.0);
}

TEST_CASE("running minimum against a brute-force double loop") {
  const BenchmarkSpec spec = toy_spec();
  const GroundTruth gt = compute_ground_truth(spec);
  RngStream rng(7);
  std::vector<QueryPoint> points;
  std::vector<double> expected;
  double running = 1e300;
  for (int i = 0; i < 10; ++i) {
    const int ix = static_cast<int>(rng.uniform_index(3));
    const int it = static_cast<int>(rng.uniform_index(3));
    points.push_back(point_at(ix * 0.5, it * 0.5));
    const RegretComponents rc = regret_components_at(ix, it, spec, gt);
    running = std::min(running, std::max(rc.r_f, rc.r_g));
    expected.push_back(running);
  }
  const std::vector<double> got = bilevel_simple_regret(points, spec, gt);
  for (int i = 0; i < 10; ++i) CHECK(got[static_cast<std::size_t>(i)] == expected[static_cast<std::size_t>(i)]);
  // monotone non-increasing
  for (int i = 1; i < 10; ++i) {
    CHECK(got[static_cast<std::size_t>(i)] <= got[static_cast<std::size_t>(i - 1)]);
  }
}

TEST_CASE("components stay in the unit interval on a real benchmark") {
  const BenchmarkSpec spec = make_problem("smd09:grid=8");
  const GroundTruth gt = compute_ground_truth(spec);
  for (int ix = 0; ix < spec.grid.n_x(); ++ix) {
    for (int it = 0; it < spec.grid.n_theta(); ++it) {
      const RegretComponents rc = regret_components_at(ix, it, spec, gt);
      CHECK(rc.r_f >= 0.0);
      CHECK(rc.r_f <= 1.0);
      CHECK(rc.r_g >= 0.0);
      CHECK(rc.r_g <= 1.0);
      for (Eigen::Index c = 0; c < rc.r_c.size(); ++c) {
        CHECK(rc.r_c(c) >= 0.0);
        CHECK(rc.r_c(c) <= 1.0);
      }
      CHECK(rc.aggregate() >= std::max(rc.r_f, rc.r_g));
    }
  }
}

TEST_CASE("constant objectives carry zero regret") {
  BenchmarkSpec spec;
  spec.name = "flat";
  spec.d_x = 1;
  spec.d_theta = 1;
  spec.grid = GridSpec::uniform(1, 1, 4);
  spec.eval_f = [](const Eigen::VectorXd&, const Eigen::VectorXd&) { return 3.0; };
  spec.eval_g = spec.eval_f;
  const GroundTruth gt = compute_ground_truth(spec);
  const RegretComponents rc = regret_components_at(1, 2, spec, gt);
  CHECK(rc.r_f == 0.0);
  CHECK(rc.r_g == 0.0);
}

TEST_CASE("off-pool points are a usage error in pool mode") {
  const BenchmarkSpec spec = toy_spec();
  const GroundTruth gt = compute_ground_truth(spec);
  CHECK_THROWS(regret_components(point_at(0.31, 0.5), spec, gt));
}

TEST_CASE("unconstrained aggregate ignores the empty constraint block") {
  const BenchmarkSpec spec = toy_spec();
  const GroundTruth gt = compute_ground_truth(spec);
  const RegretComponents rc = regret_components_at(0, 2, spec, gt);
  CHECK(rc.aggregate() == std::max(rc.r_f, rc.r_g));
}

TEST_CASE("continuous-mode components agree with pool components on the grid") {
  const BenchmarkSpec spec = make_problem("bg:grid=60");
  const GroundTruth gt = compute_ground_truth(spec);
  RngStream rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const int ix = static_cast<int>(
        rng.uniform_index(static_cast<std::uint64_t>(spec.grid.n_x())));
    const int it = static_cast<int>(
        rng.uniform_index(static_cast<std::uint64_t>(spec.grid.n_theta())));
    const QueryPoint p{spec.grid.x_grid[static_cast<std::size_t>(ix)],
                       spec.grid.theta_grid[static_cast<std::size_t>(it)]};
    const RegretComponents a = regret_components_at(ix, it, spec, gt);
    const RegretComponents b = regret_components_continuous(p, spec, gt);
    CHECK(a.r_f == doctest::Approx(b.r_f).epsilon(1e-12));
    CHECK(a.r_g == doctest::Approx(b.r_g).epsilon(1e-12));
  }
}
