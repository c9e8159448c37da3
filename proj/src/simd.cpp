#include "bljes/simd.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>

namespace bljes::simd {

namespace ref {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double dot3(const double* a, const double* b, const double* c, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i] * c[i];
  return s;
}

double dot4(const double* a, const double* b, const double* c, const double* d,
            std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i] * c[i] * d[i];
  return s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void sqdiff_accum(double q, const double* col, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double d = q - col[i];
    out[i] += d * d;
  }
}

void vexp(const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = std::exp(x[i]);
}

void vcos(const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = std::cos(x[i]);
}

void vsin(const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = std::sin(x[i]);
}

}  // namespace ref

namespace {

struct Table {
  Isa isa;
  double (*dot)(const double*, const double*, std::size_t);
  double (*dot3)(const double*, const double*, const double*, std::size_t);
  double (*dot4)(const double*, const double*, const double*, const double*,
                 std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*sqdiff_accum)(double, const double*, double*, std::size_t);
  void (*vexp)(const double*, double*, std::size_t);
  void (*vcos)(const double*, double*, std::size_t);
  void (*vsin)(const double*, double*, std::size_t);
};

constexpr Table kScalarTable = {
    Isa::scalar,    ref::dot,  ref::dot3, ref::dot4, ref::axpy,
    ref::sqdiff_accum, ref::vexp, ref::vcos, ref::vsin,
};

#if defined(__x86_64__) || defined(_M_X64)
constexpr Table kAvx2Table = {
    Isa::avx2,       avx2::dot,  avx2::dot3, avx2::dot4, avx2::axpy,
    avx2::sqdiff_accum, avx2::vexp, avx2::vcos, avx2::vsin,
};
#endif

Table select_table() {
  const char* env = std::getenv("BLJES_SIMD");
  if (env != nullptr && std::strcmp(env, "scalar") == 0) return kScalarTable;
#if defined(__x86_64__) || defined(_M_X64)
  const bool forced = env != nullptr && std::strcmp(env, "avx2") == 0;
  if (forced || avx2::supported()) return kAvx2Table;
#endif
  return kScalarTable;
}

const Table& table() {
  static const Table t = select_table();
  return t;
}

}  // namespace

Isa active_isa() { return table().isa; }

const char* isa_name(Isa isa) {
  switch (isa) {
    case Isa::avx2:
      return "avx2";
    case Isa::scalar:
    default:
      return "scalar";
  }
}

double dot(const double* a, const double* b, std::size_t n) {
  return table().dot(a, b, n);
}

double dot3(const double* a, const double* b, const double* c, std::size_t n) {
  return table().dot3(a, b, c, n);
}

double dot4(const double* a, const double* b, const double* c, const double* d,
            std::size_t n) {
  return table().dot4(a, b, c, d, n);
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  table().axpy(a, x, y, n);
}

void sqdiff_accum(double q, const double* col, double* out, std::size_t n) {
  table().sqdiff_accum(q, col, out, n);
}

void vexp(const double* x, double* y, std::size_t n) { table().vexp(x, y, n); }

void vcos(const double* x, double* y, std::size_t n) { table().vcos(x, y, n); }

void vsin(const double* x, double* y, std::size_t n) { table().vsin(x, y, n); }

}  // namespace bljes::simd
