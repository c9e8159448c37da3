#ifndef BLJES_SIMD_HPP
#define BLJES_SIMD_HPP

#include <cstddef>

// Data-parallel kernels used by the numeric hot loops (feature-map
// evaluation, kernel rows). Every operation has a plain scalar reference
// implementation in simd::ref and, on x86-64 hardware with AVX2+FMA, a
// vectorized variant. The active variant is selected once at startup;
// the BLJES_SIMD environment variable ("scalar" / "avx2" / "auto")
// overrides autodetection.
namespace bljes::simd {

enum class Isa { scalar, avx2 };

Isa active_isa();
const char* isa_name(Isa isa);

// sum_i a[i]*b[i]
double dot(const double* a, const double* b, std::size_t n);
// sum_i a[i]*b[i]*c[i]
double dot3(const double* a, const double* b, const double* c, std::size_t n);
// sum_i a[i]*b[i]*c[i]*d[i]
double dot4(const double* a, const double* b, const double* c, const double* d,
            std::size_t n);
// y[i] += a*x[i]
void axpy(double a, const double* x, double* y, std::size_t n);
// out[i] += (q - col[i])^2, one coordinate of a squared-distance sweep
void sqdiff_accum(double q, const double* col, double* out, std::size_t n);
// elementwise transcendentals
void vexp(const double* x, double* y, std::size_t n);
void vcos(const double* x, double* y, std::size_t n);
void vsin(const double* x, double* y, std::size_t n);

// Scalar reference kernels. These stay the ground truth the vector
// variants are equivalence-tested against.
namespace ref {
double dot(const double* a, const double* b, std::size_t n);
double dot3(const double* a, const double* b, const double* c, std::size_t n);
double dot4(const double* a, const double* b, const double* c, const double* d,
            std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void sqdiff_accum(double q, const double* col, double* out, std::size_t n);
void vexp(const double* x, double* y, std::size_t n);
void vcos(const double* x, double* y, std::size_t n);
void vsin(const double* x, double* y, std::size_t n);
}  // namespace ref

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
bool supported();
double dot(const double* a, const double* b, std::size_t n);
double dot3(const double* a, const double* b, const double* c, std::size_t n);
double dot4(const double* a, const double* b, const double* c, const double* d,
            std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void sqdiff_accum(double q, const double* col, double* out, std::size_t n);
void vexp(const double* x, double* y, std::size_t n);
void vcos(const double* x, double* y, std::size_t n);
void vsin(const double* x, double* y, std::size_t n);
}  // namespace avx2
#endif

}  // namespace bljes::simd

#endif  // BLJES_SIMD_HPP
