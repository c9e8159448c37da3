#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "bljes/rng.hpp"
#include "bljes/simd.hpp"

using namespace bljes;

namespace {

std::vector<double> random_vec(std::size_t n, RngStream& rng, double lo, double hi) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

}  // namespace

TEST_CASE("dispatched reductions match the scalar reference") {
  RngStream rng(42);
  for (const std::size_t n : {0ul, 1ul, 3ul, 4ul, 7ul, 8ul, 64ul, 1001ul}) {
    const auto a = random_vec(n, rng, -2.0, 2.0);
    const auto b = random_vec(n, rng, -2.0, 2.0);
    const auto c = random_vec(n, rng, -2.0, 2.0);
    const auto d = random_vec(n, rng, -2.0, 2.0);

    const double scale = 1.0 + static_cast<double>(n);
    CHECK(simd::dot(a.data(), b.data(), n) ==
          doctest::Approx(simd::ref::dot(a.data(), b.data(), n))
              .epsilon(1e-13)
              .scale(scale));
    CHECK(simd::dot3(a.data(), b.data(), c.data(), n) ==
          doctest::Approx(simd::ref::dot3(a.data(), b.data(), c.data(), n))
              .epsilon(1e-13)
              .scale(scale));
    CHECK(simd::dot4(a.data(), b.data(), c.data(), d.data(), n) ==
          doctest::Approx(simd::ref::dot4(a.data(), b.data(), c.data(), d.data(), n))
              .epsilon(1e-13)
              .scale(scale));

    auto y1 = random_vec(n, rng, -1.0, 1.0);
    auto y2 = y1;
    simd::axpy(0.37, a.data(), y1.data(), n);
    simd::ref::axpy(0.37, a.data(), y2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-15));

    auto s1 = random_vec(n, rng, 0.0, 1.0);
    auto s2 = s1;
    simd::sqdiff_accum(0.4, a.data(), s1.data(), n);
    simd::ref::sqdiff_accum(0.4, a.data(), s2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(s1[i] == doctest::Approx(s2[i]).epsilon(1e-14));
  }
}

TEST_CASE("vexp agrees with libm across the finite range") {
  RngStream rng(7);
  std::vector<double> xs = random_vec(4096, rng, -700.0, 700.0);
  xs.insert(xs.end(), {0.0, -0.5, 1.0, -708.3, 709.7, -745.0, 710.0, 1000.0, -1000.0});
  std::vector<double> out(xs.size());
  simd::vexp(xs.data(), out.data(), xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double expect = std::exp(xs[i]);
    if (std::isinf(expect)) {
      CHECK(std::isinf(out[i]));
    } else {
      CHECK(out[i] == doctest::Approx(expect).epsilon(4e-15));
    }
  }
}

TEST_CASE("vcos and vsin agree with libm") {
  RngStream rng(11);
  // the near range used by kernel rows and a wide range reachable with
  // short fitted lengthscales
  for (const auto range : {6.3, 2.0e4}) {
    std::vector<double> xs = random_vec(4096, rng, -range, range);
    xs.insert(xs.end(), {0.0, M_PI, -M_PI, M_PI_2, 0.75 * M_PI, 1e4});
    std::vector<double> c(xs.size()), s(xs.size());
    simd::vcos(xs.data(), c.data(), xs.size());
    simd::vsin(xs.data(), s.data(), xs.size());
    const double tol = range > 100.0 ? 1e-11 : 1e-14;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      CHECK(c[i] == doctest::Approx(std::cos(xs[i])).epsilon(1e-12).scale(1.0));
      CHECK(std::fabs(c[i] - std::cos(xs[i])) < tol);
      CHECK(std::fabs(s[i] - std::sin(xs[i])) < tol);
    }
  }
}

TEST_CASE("active isa reports a known lane") {
  const char* name = simd::isa_name(simd::active_isa());
  const bool known = std::string(name) == "avx2" || std::string(name) == "scalar";
  CHECK(known);
}
