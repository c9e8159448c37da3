#include "bljes/simd.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>
#include <cstdint>

namespace bljes::simd::avx2 {

bool supported() {
#if defined(__GNUC__) || defined(__clang__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swap = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swap));
}

// --- exp, Cephes rational approximation on [-0.5 ln2, 0.5 ln2] ---

constexpr double kExpHi = 709.782712893383996843;
constexpr double kExpLo = -708.396418532264078749;
constexpr double kLog2E = 1.4426950408889634073599;
constexpr double kLn2Hi = 6.93145751953125e-1;
constexpr double kLn2Lo = 1.42860682030941723212e-6;

constexpr double kExpP0 = 1.26177193074810590878e-4;
constexpr double kExpP1 = 3.02994407707441961300e-2;
constexpr double kExpP2 = 9.99999999999999999910e-1;
constexpr double kExpQ0 = 3.00198505138664455042e-6;
constexpr double kExpQ1 = 2.52448340349684104192e-3;
constexpr double kExpQ2 = 2.27265548208155028766e-1;
constexpr double kExpQ3 = 2.00000000000000000005e0;

inline __m256d exp_pd(__m256d x) {
  const __m256d hi = _mm256_set1_pd(kExpHi);
  const __m256d lo = _mm256_set1_pd(kExpLo);
  const __m256d over = _mm256_cmp_pd(x, hi, _CMP_GT_OQ);
  const __m256d under = _mm256_cmp_pd(x, lo, _CMP_LT_OQ);
  __m256d xc = _mm256_min_pd(_mm256_max_pd(x, lo), hi);

  __m256d n = _mm256_round_pd(
      _mm256_fmadd_pd(xc, _mm256_set1_pd(kLog2E), _mm256_set1_pd(0.5)),
      _MM_FROUND_TO_NEG_INF | _MM_FROUND_NO_EXC);
  xc = _mm256_fnmadd_pd(n, _mm256_set1_pd(kLn2Hi), xc);
  xc = _mm256_fnmadd_pd(n, _mm256_set1_pd(kLn2Lo), xc);

  const __m256d xx = _mm256_mul_pd(xc, xc);
  __m256d p = _mm256_set1_pd(kExpP0);
  p = _mm256_fmadd_pd(p, xx, _mm256_set1_pd(kExpP1));
  p = _mm256_fmadd_pd(p, xx, _mm256_set1_pd(kExpP2));
  p = _mm256_mul_pd(p, xc);
  __m256d q = _mm256_set1_pd(kExpQ0);
  q = _mm256_fmadd_pd(q, xx, _mm256_set1_pd(kExpQ1));
  q = _mm256_fmadd_pd(q, xx, _mm256_set1_pd(kExpQ2));
  q = _mm256_fmadd_pd(q, xx, _mm256_set1_pd(kExpQ3));
  __m256d e = _mm256_div_pd(p, _mm256_sub_pd(q, p));
  e = _mm256_fmadd_pd(e, _mm256_set1_pd(2.0), _mm256_set1_pd(1.0));

  // scale by 2^n through the exponent bits, in two halves so the
  // n = 1024 / n = -1075 extremes stay inside the exponent range
  __m128i ni = _mm256_cvtpd_epi32(n);
  const __m128i nh = _mm_srai_epi32(ni, 1);
  const __m128i nr = _mm_sub_epi32(ni, nh);
  __m256i h64 = _mm256_cvtepi32_epi64(nh);
  __m256i r64 = _mm256_cvtepi32_epi64(nr);
  h64 = _mm256_slli_epi64(_mm256_add_epi64(h64, _mm256_set1_epi64x(1023)), 52);
  r64 = _mm256_slli_epi64(_mm256_add_epi64(r64, _mm256_set1_epi64x(1023)), 52);
  e = _mm256_mul_pd(_mm256_mul_pd(e, _mm256_castsi256_pd(h64)),
                    _mm256_castsi256_pd(r64));

  e = _mm256_blendv_pd(e, _mm256_set1_pd(HUGE_VAL), over);
  e = _mm256_blendv_pd(e, _mm256_setzero_pd(), under);
  return e;
}

// --- sin/cos, Cephes octant reduction with Cody-Waite pi/4 splitting ---

constexpr double kFourOverPi = 1.27323954473516268615;
constexpr double kDP1 = 7.85398125648498535156e-1;
constexpr double kDP2 = 3.77489470793079817668e-8;
constexpr double kDP3 = 2.69515142907905952645e-15;

constexpr double kSinC0 = 1.58962301576546568060e-10;
constexpr double kSinC1 = -2.50507477628578072866e-8;
constexpr double kSinC2 = 2.75573136213857245213e-6;
constexpr double kSinC3 = -1.98412698295895385996e-4;
constexpr double kSinC4 = 8.33333333332211858878e-3;
constexpr double kSinC5 = -1.66666666666666307295e-1;

constexpr double kCosC0 = -1.13585365213876817300e-11;
constexpr double kCosC1 = 2.08757008419747316778e-9;
constexpr double kCosC2 = -2.75573141792967388112e-7;
constexpr double kCosC3 = 2.48015872888517179954e-5;
constexpr double kCosC4 = -1.38888888888730564116e-3;
constexpr double kCosC5 = 4.16666666666665929218e-2;

struct Reduced {
  __m256d z;      // reduced argument in [-pi/4, pi/4]
  __m256i j64;    // octant index 0..7 in 64-bit lanes
};

inline Reduced reduce_pi4(__m256d ax) {
  __m256d y = _mm256_floor_pd(_mm256_mul_pd(ax, _mm256_set1_pd(kFourOverPi)));
  __m128i ji = _mm256_cvttpd_epi32(y);
  // force even octant
  const __m128i odd = _mm_and_si128(ji, _mm_set1_epi32(1));
  ji = _mm_add_epi32(ji, odd);
  y = _mm256_add_pd(y, _mm256_cvtepi32_pd(odd));
  ji = _mm_and_si128(ji, _mm_set1_epi32(7));

  __m256d z = _mm256_fnmadd_pd(y, _mm256_set1_pd(kDP1), ax);
  z = _mm256_fnmadd_pd(y, _mm256_set1_pd(kDP2), z);
  z = _mm256_fnmadd_pd(y, _mm256_set1_pd(kDP3), z);
  return {z, _mm256_cvtepi32_epi64(ji)};
}

inline __m256d sin_poly(__m256d z) {
  const __m256d zz = _mm256_mul_pd(z, z);
  __m256d p = _mm256_set1_pd(kSinC0);
  p = _mm256_fmadd_pd(p, zz, _mm256_set1_pd(kSinC1));
  p = _mm256_fmadd_pd(p, zz, _mm256_set1_pd(kSinC2));
  p = _mm256_fmadd_pd(p, zz, _mm256_set1_pd(kSinC3));
  p = _mm256_fmadd_pd(p, zz, _mm256_set1_pd(kSinC4));
  p = _mm256_fmadd_pd(p, zz, _mm256_set1_pd(kSinC5));
  return _mm256_fmadd_pd(_mm256_mul_pd(z, zz), p, z);
}

inline __m256d cos_poly(__m256d z) {
  const __m256d zz = _mm256_mul_pd(z, z);
  __m256d p = _mm256_set1_pd(kCosC0);
  p = _mm256_fmadd_pd(p, zz, _mm256_set1_pd(kCosC1));
  p = _mm256_fmadd_pd(p, zz, _mm256_set1_pd(kCosC2));
  p = _mm256_fmadd_pd(p, zz, _mm256_set1_pd(kCosC3));
  p = _mm256_fmadd_pd(p, zz, _mm256_set1_pd(kCosC4));
  p = _mm256_fmadd_pd(p, zz, _mm256_set1_pd(kCosC5));
  __m256d r = _mm256_mul_pd(_mm256_mul_pd(zz, zz), p);
  r = _mm256_fnmadd_pd(zz, _mm256_set1_pd(0.5), r);
  return _mm256_add_pd(r, _mm256_set1_pd(1.0));
}

inline __m256d mask_from_epi64(__m256i m) { return _mm256_castsi256_pd(m); }

inline __m256d cos_pd(__m256d x) {
  const __m256d abs_mask =
      _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
  const __m256d ax = _mm256_and_pd(x, abs_mask);
  Reduced r = reduce_pi4(ax);

  const __m256i j = r.j64;
  const __m256i gt3 = _mm256_cmpgt_epi64(j, _mm256_set1_epi64x(3));
  const __m256i jm = _mm256_sub_epi64(j, _mm256_and_si256(gt3, _mm256_set1_epi64x(4)));
  const __m256i gt1 = _mm256_cmpgt_epi64(jm, _mm256_set1_epi64x(1));
  // negative when exactly one of (j > 3), (jm > 1) holds
  const __m256i negm = _mm256_xor_si256(gt3, gt1);

  // octants 1 and 2 use the sine polynomial
  const __m256i use_sin = _mm256_andnot_si256(
      _mm256_cmpgt_epi64(jm, _mm256_set1_epi64x(2)),
      _mm256_cmpgt_epi64(jm, _mm256_set1_epi64x(0)));

  const __m256d rs = sin_poly(r.z);
  const __m256d rc = cos_poly(r.z);
  __m256d res = _mm256_blendv_pd(rc, rs, mask_from_epi64(use_sin));
  const __m256d signbit = _mm256_and_pd(mask_from_epi64(negm),
                                        _mm256_set1_pd(-0.0));
  return _mm256_xor_pd(res, signbit);
}

inline __m256d sin_pd(__m256d x) {
  const __m256d abs_mask =
      _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
  const __m256d ax = _mm256_and_pd(x, abs_mask);
  const __m256d sign_x = _mm256_andnot_pd(abs_mask, x);
  Reduced r = reduce_pi4(ax);

  const __m256i j = r.j64;
  const __m256i gt3 = _mm256_cmpgt_epi64(j, _mm256_set1_epi64x(3));
  const __m256i jm = _mm256_sub_epi64(j, _mm256_and_si256(gt3, _mm256_set1_epi64x(4)));

  // octants 1 and 2 use the cosine polynomial
  const __m256i use_cos = _mm256_andnot_si256(
      _mm256_cmpgt_epi64(jm, _mm256_set1_epi64x(2)),
      _mm256_cmpgt_epi64(jm, _mm256_set1_epi64x(0)));

  const __m256d rs = sin_poly(r.z);
  const __m256d rc = cos_poly(r.z);
  __m256d res = _mm256_blendv_pd(rs, rc, mask_from_epi64(use_cos));
  __m256d signbit = _mm256_and_pd(mask_from_epi64(gt3), _mm256_set1_pd(-0.0));
  signbit = _mm256_xor_pd(signbit, sign_x);
  return _mm256_xor_pd(res, signbit);
}

}  // namespace

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4),
                           acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double dot3(const double* a, const double* b, const double* c, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d ab = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_fmadd_pd(ab, _mm256_loadu_pd(c + i), acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += a[i] * b[i] * c[i];
  return s;
}

double dot4(const double* a, const double* b, const double* c, const double* d,
            std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d ab = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    const __m256d cd = _mm256_mul_pd(_mm256_loadu_pd(c + i), _mm256_loadu_pd(d + i));
    acc = _mm256_fmadd_pd(ab, cd, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += a[i] * b[i] * c[i] * d[i];
  return s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d r = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i),
                                      _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(y + i, r);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void sqdiff_accum(double q, const double* col, double* out, std::size_t n) {
  const __m256d vq = _mm256_set1_pd(q);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(vq, _mm256_loadu_pd(col + i));
    const __m256d r = _mm256_fmadd_pd(d, d, _mm256_loadu_pd(out + i));
    _mm256_storeu_pd(out + i, r);
  }
  for (; i < n; ++i) {
    const double d = q - col[i];
    out[i] += d * d;
  }
}

void vexp(const double* x, double* y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, exp_pd(_mm256_loadu_pd(x + i)));
  }
  if (i < n) {
    double buf_in[4] = {0, 0, 0, 0};
    double buf_out[4];
    for (std::size_t k = i; k < n; ++k) buf_in[k - i] = x[k];
    _mm256_storeu_pd(buf_out, exp_pd(_mm256_loadu_pd(buf_in)));
    for (std::size_t k = i; k < n; ++k) y[k] = buf_out[k - i];
  }
}

void vcos(const double* x, double* y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, cos_pd(_mm256_loadu_pd(x + i)));
  }
  if (i < n) {
    double buf_in[4] = {0, 0, 0, 0};
    double buf_out[4];
    for (std::size_t k = i; k < n; ++k) buf_in[k - i] = x[k];
    _mm256_storeu_pd(buf_out, cos_pd(_mm256_loadu_pd(buf_in)));
    for (std::size_t k = i; k < n; ++k) y[k] = buf_out[k - i];
  }
}

void vsin(const double* x, double* y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, sin_pd(_mm256_loadu_pd(x + i)));
  }
  if (i < n) {
    double buf_in[4] = {0, 0, 0, 0};
    double buf_out[4];
    for (std::size_t k = i; k < n; ++k) buf_in[k - i] = x[k];
    _mm256_storeu_pd(buf_out, sin_pd(_mm256_loadu_pd(buf_in)));
    for (std::size_t k = i; k < n; ++k) y[k] = buf_out[k - i];
  }
}

}  // namespace bljes::simd::avx2

#endif  // x86-64
