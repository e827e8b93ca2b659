// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.

#include <immintrin.h>

#include <cstring>

#include "mlpdyn/kernels.hpp"

namespace mlpdyn::kernels {

const KernelTable& avx2_table();

namespace {

inline __m256d set1(double a) { return _mm256_set1_pd(a); }

// exp(a) for a in [0, 44]: a = k ln2 + r, then the Cephes Pade form
// exp(r) = 1 + 2 r P(r^2) / (Q(r^2) - r P(r^2)).
inline __m256d exp_nonneg(__m256d a) {
  const __m256d k = _mm256_floor_pd(_mm256_fmadd_pd(a, set1(1.4426950408889634073599), set1(0.5)));
  __m256d r = _mm256_fnmadd_pd(k, set1(6.93145751953125e-1), a);
  r = _mm256_fnmadd_pd(k, set1(1.42860682030941723212e-6), r);
  const __m256d rr = _mm256_mul_pd(r, r);

  __m256d p = _mm256_fmadd_pd(set1(1.26177193074810590878e-4), rr, set1(3.02994407707441961300e-2));
  p = _mm256_fmadd_pd(p, rr, set1(9.99999999999999999910e-1));
  p = _mm256_mul_pd(p, r);
  __m256d q = _mm256_fmadd_pd(set1(3.00198505138664455042e-6), rr, set1(2.52448340349684104192e-3));
  q = _mm256_fmadd_pd(q, rr, set1(2.27265548208155028766e-1));
  q = _mm256_fmadd_pd(q, rr, set1(2.00000000000000000009e0));

  const __m256d e = _mm256_fmadd_pd(set1(2.0), _mm256_div_pd(p, _mm256_sub_pd(q, p)), set1(1.0));

  // 2^k via the exponent field; k stays within [0, 64] here.
  const __m256d magic = set1(0x1.8p52);
  const __m256i ki =
      _mm256_sub_epi64(_mm256_castpd_si256(_mm256_add_pd(k, magic)), _mm256_castpd_si256(magic));
  const __m256i bits = _mm256_slli_epi64(_mm256_add_epi64(ki, _mm256_set1_epi64x(1023)), 52);
  return _mm256_mul_pd(e, _mm256_castsi256_pd(bits));
}

inline __m256d tanh4(__m256d x) {
  const __m256d sign_mask = set1(-0.0);
  const __m256d ax = _mm256_andnot_pd(sign_mask, x);

  // |x| < 0.625: x + x^3 P(x^2) / Q(x^2)
  const __m256d z = _mm256_mul_pd(x, x);
  __m256d p = _mm256_fmadd_pd(set1(-9.64399179425052238628e-1), z, set1(-9.92877231001918586564e1));
  p = _mm256_fmadd_pd(p, z, set1(-1.61468768441708447952e3));
  __m256d q = _mm256_add_pd(z, set1(1.12811678491632931402e2));
  q = _mm256_fmadd_pd(q, z, set1(2.23548839060100448583e3));
  q = _mm256_fmadd_pd(q, z, set1(4.84406305325125486048e3));
  const __m256d small = _mm256_fmadd_pd(_mm256_mul_pd(x, z), _mm256_div_pd(p, q), x);

  // otherwise 1 - 2 / (exp(2|x|) + 1), which is exactly 1.0 beyond |x| = 22
  const __m256d a = _mm256_min_pd(_mm256_add_pd(ax, ax), set1(44.0));
  const __m256d s = exp_nonneg(a);
  __m256d large = _mm256_sub_pd(set1(1.0), _mm256_div_pd(set1(2.0), _mm256_add_pd(s, set1(1.0))));

  // tanh is odd; copying the sign of x also keeps tanh(-0) = -0
  const __m256d use_small = _mm256_cmp_pd(ax, set1(0.625), _CMP_LT_OQ);
  __m256d out = _mm256_blendv_pd(large, small, use_small);
  out = _mm256_or_pd(_mm256_andnot_pd(sign_mask, out), _mm256_and_pd(x, sign_mask));
  const __m256d is_nan = _mm256_cmp_pd(x, x, _CMP_UNORD_Q);
  return _mm256_blendv_pd(out, x, is_nan);
}

inline double hsum(__m256d v) {
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, v);
  return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

void tanh_avx2(const double* in, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, tanh4(_mm256_loadu_pd(in + i)));
  if (i < n) {
    alignas(32) double buf[4] = {0.0, 0.0, 0.0, 0.0};
    std::memcpy(buf, in + i, (n - i) * sizeof(double));
    _mm256_store_pd(buf, tanh4(_mm256_load_pd(buf)));
    std::memcpy(out + i, buf, (n - i) * sizeof(double));
  }
}

inline __m256d forward4(const double* v, const double* w, std::size_t m, __m256d xv) {
  __m256d f = _mm256_setzero_pd();
  for (std::size_t j = 0; j < m; ++j) {
    f = _mm256_fmadd_pd(set1(v[j]), tanh4(_mm256_mul_pd(set1(w[j]), xv)), f);
  }
  return f;
}

void forward_avx2(const double* v, const double* w, std::size_t m, const double* x, double* out,
                  std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, forward4(v, w, m, _mm256_loadu_pd(x + i)));
  if (i < n) {
    alignas(32) double buf[4] = {0.0, 0.0, 0.0, 0.0};
    std::memcpy(buf, x + i, (n - i) * sizeof(double));
    _mm256_store_pd(buf, forward4(v, w, m, _mm256_load_pd(buf)));
    std::memcpy(out + i, buf, (n - i) * sizeof(double));
  }
}

double loss_grad_avx2(const double* v, const double* w, std::size_t m, const double* x, const double* y,
                      std::size_t n, double* grad, double* scratch) {
  const std::size_t stride = padded(n);
  const std::size_t full = n / 4 * 4;
  double* t = scratch;
  double* r = scratch + m * stride;

  // Padded tail: x = y = 0 gives t = 0 and r = 0, so pad lanes add nothing.
  alignas(32) double xt[4] = {0.0, 0.0, 0.0, 0.0};
  alignas(32) double yt[4] = {0.0, 0.0, 0.0, 0.0};
  if (full < n) {
    std::memcpy(xt, x + full, (n - full) * sizeof(double));
    std::memcpy(yt, y + full, (n - full) * sizeof(double));
  }
  auto load_x = [&](std::size_t i) { return i < full ? _mm256_loadu_pd(x + i) : _mm256_load_pd(xt); };
  auto load_y = [&](std::size_t i) { return i < full ? _mm256_loadu_pd(y + i) : _mm256_load_pd(yt); };

  for (std::size_t j = 0; j < m; ++j) {
    const __m256d wj = set1(w[j]);
    for (std::size_t i = 0; i < stride; i += 4) {
      _mm256_storeu_pd(t + j * stride + i, tanh4(_mm256_mul_pd(wj, load_x(i))));
    }
  }

  __m256d sq = _mm256_setzero_pd();
  for (std::size_t i = 0; i < stride; i += 4) {
    __m256d f = _mm256_setzero_pd();
    for (std::size_t j = 0; j < m; ++j) f = _mm256_fmadd_pd(set1(v[j]), _mm256_loadu_pd(t + j * stride + i), f);
    const __m256d ri = _mm256_sub_pd(f, load_y(i));
    _mm256_storeu_pd(r + i, ri);
    sq = _mm256_fmadd_pd(ri, ri, sq);
  }

  const __m256d one = set1(1.0);
  for (std::size_t j = 0; j < m; ++j) {
    __m256d gv = _mm256_setzero_pd();
    __m256d gw = _mm256_setzero_pd();
    const double* tj = t + j * stride;
    for (std::size_t i = 0; i < stride; i += 4) {
      const __m256d ti = _mm256_loadu_pd(tj + i);
      const __m256d ri = _mm256_loadu_pd(r + i);
      const __m256d sech2 = _mm256_fnmadd_pd(ti, ti, one);
      gv = _mm256_fmadd_pd(ti, ri, gv);
      gw = _mm256_fmadd_pd(_mm256_mul_pd(load_x(i), sech2), ri, gw);
    }
    grad[j] = hsum(gv);
    grad[m + j] = v[j] * hsum(gw);
  }
  return hsum(sq);
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable table{"avx2", &tanh_avx2, &forward_avx2, &loss_grad_avx2};
  return table;
}

}  // namespace mlpdyn::kernels
