// Built with -mavx2 -mfma; only reached after a runtime CPU check.

#include <immintrin.h>

#include "kernels_internal.hpp"

namespace itere::kernels {

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

// (-1, +1, -1, +1): negates the even lane of each pair.
inline __m256d alternating_sign() { return _mm256_setr_pd(-1.0, 1.0, -1.0, 1.0); }

double dot(const double* x, const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
  double sum = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) sum += x[i] * y[i];
  return sum;
}

double bilinear(const double* s, const double* m, const double* o, std::size_t ns, std::size_t nb) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= ns; i += 4) {
    __m256d sm = _mm256_mul_pd(_mm256_loadu_pd(s + i), _mm256_loadu_pd(m + i));
    acc = _mm256_fmadd_pd(sm, _mm256_loadu_pd(o + i), acc);
  }
  double tail = 0.0;
  for (; i < ns; ++i) tail += s[i] * m[i] * o[i];

  const __m256d sign = alternating_sign();
  std::size_t j = 0;
  for (; j + 2 <= nb; j += 2) {
    const std::size_t k = ns + 2 * j;
    __m256d sv = _mm256_loadu_pd(s + k);
    __m256d ov = _mm256_loadu_pd(o + k);
    __m256d mv = _mm256_loadu_pd(m + k);
    __m256d a = _mm256_permute_pd(mv, 0b0000);
    __m256d b = _mm256_permute_pd(mv, 0b1111);
    __m256d same = _mm256_mul_pd(sv, ov);                               // s0o0, s1o1
    __m256d cross = _mm256_mul_pd(sv, _mm256_permute_pd(ov, 0b0101));   // s0o1, s1o0
    acc = _mm256_fmadd_pd(a, same, acc);
    acc = _mm256_fmadd_pd(b, _mm256_mul_pd(cross, sign), acc);
  }
  for (; j < nb; ++j) {
    const std::size_t k = ns + 2 * j;
    const double a = m[k], b = m[k + 1];
    tail += a * (s[k] * o[k] + s[k + 1] * o[k + 1]) + b * (s[k + 1] * o[k] - s[k] * o[k + 1]);
  }
  return hsum(acc) + tail;
}

template <bool Transpose>
void apply_impl(const double* m, const double* v, std::size_t ns, std::size_t nb, double* out) {
  std::size_t i = 0;
  for (; i + 4 <= ns; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(m + i), _mm256_loadu_pd(v + i)));
  }
  for (; i < ns; ++i) out[i] = m[i] * v[i];

  std::size_t j = 0;
  for (; j + 2 <= nb; j += 2) {
    const std::size_t k = ns + 2 * j;
    __m256d vv = _mm256_loadu_pd(v + k);
    __m256d mv = _mm256_loadu_pd(m + k);
    __m256d a = _mm256_permute_pd(mv, 0b0000);
    __m256d b = _mm256_permute_pd(mv, 0b1111);
    __m256d bswap = _mm256_mul_pd(b, _mm256_permute_pd(vv, 0b0101));  // b v1, b v0
    __m256d r = Transpose ? _mm256_fmsubadd_pd(a, vv, bswap) : _mm256_fmaddsub_pd(a, vv, bswap);
    _mm256_storeu_pd(out + k, r);
  }
  for (; j < nb; ++j) {
    const std::size_t k = ns + 2 * j;
    const double a = m[k], b = m[k + 1];
    const double v0 = v[k], v1 = v[k + 1];
    if constexpr (Transpose) {
      out[k] = a * v0 + b * v1;
      out[k + 1] = a * v1 - b * v0;
    } else {
      out[k] = a * v0 - b * v1;
      out[k + 1] = b * v0 + a * v1;
    }
  }
}

void apply(const double* m, const double* v, std::size_t ns, std::size_t nb, double* out) {
  apply_impl<false>(m, v, ns, nb, out);
}

void apply_transpose(const double* m, const double* v, std::size_t ns, std::size_t nb, double* out) {
  apply_impl<true>(m, v, ns, nb, out);
}

void score_rows(const double* rows, std::size_t count, const double* q, std::size_t d, double* out) {
  for (std::size_t r = 0; r < count; ++r) out[r] = dot(rows + r * d, q, d);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void relation_grad(double alpha, const double* s, const double* o, std::size_t ns, std::size_t nb, double* g) {
  const __m256d av = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= ns; i += 4) {
    __m256d so = _mm256_mul_pd(_mm256_loadu_pd(s + i), _mm256_loadu_pd(o + i));
    _mm256_storeu_pd(g + i, _mm256_fmadd_pd(av, so, _mm256_loadu_pd(g + i)));
  }
  for (; i < ns; ++i) g[i] += alpha * s[i] * o[i];

  const __m256d sign = alternating_sign();
  std::size_t j = 0;
  for (; j + 2 <= nb; j += 2) {
    const std::size_t k = ns + 2 * j;
    __m256d sv = _mm256_loadu_pd(s + k);
    __m256d ov = _mm256_loadu_pd(o + k);
    __m256d same = _mm256_mul_pd(sv, ov);
    __m256d cross = _mm256_mul_pd(_mm256_mul_pd(sv, _mm256_permute_pd(ov, 0b0101)), sign);
    // (s0o0 + s1o1, s1o0 - s0o1) per block
    __m256d grad = _mm256_hadd_pd(same, cross);
    _mm256_storeu_pd(g + k, _mm256_fmadd_pd(av, grad, _mm256_loadu_pd(g + k)));
  }
  for (; j < nb; ++j) {
    const std::size_t k = ns + 2 * j;
    g[k] += alpha * (s[k] * o[k] + s[k + 1] * o[k + 1]);
    g[k + 1] += alpha * (s[k + 1] * o[k] - s[k] * o[k + 1]);
  }
}

}  // namespace

const KernelTable* avx2_table() {
  static const KernelTable table{
      "avx2", dot, bilinear, apply, apply_transpose, score_rows, axpy, relation_grad,
  };
  return &table;
}

}  // namespace itere::kernels
