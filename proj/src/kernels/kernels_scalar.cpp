#include "kernels_internal.hpp"

namespace itere::kernels {

namespace {

double dot(const double* x, const double* y, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += x[i] * y[i];
  return sum;
}

double bilinear(const double* s, const double* m, const double* o, std::size_t ns, std::size_t nb) {
  double sum = 0.0;
  for (std::size_t i = 0; i < ns; ++i) sum += s[i] * m[i] * o[i];
  for (std::size_t j = 0; j < nb; ++j) {
    const std::size_t k = ns + 2 * j;
    const double a = m[k], b = m[k + 1];
    const double s0 = s[k], s1 = s[k + 1];
    const double o0 = o[k], o1 = o[k + 1];
    sum += a * (s0 * o0 + s1 * o1) + b * (s1 * o0 - s0 * o1);
  }
  return sum;
}

void apply(const double* m, const double* v, std::size_t ns, std::size_t nb, double* out) {
  for (std::size_t i = 0; i < ns; ++i) out[i] = m[i] * v[i];
  for (std::size_t j = 0; j < nb; ++j) {
    const std::size_t k = ns + 2 * j;
    const double a = m[k], b = m[k + 1];
    const double v0 = v[k], v1 = v[k + 1];
    out[k] = a * v0 - b * v1;
    out[k + 1] = b * v0 + a * v1;
  }
}

void apply_transpose(const double* m, const double* v, std::size_t ns, std::size_t nb, double* out) {
  for (std::size_t i = 0; i < ns; ++i) out[i] = m[i] * v[i];
  for (std::size_t j = 0; j < nb; ++j) {
    const std::size_t k = ns + 2 * j;
    const double a = m[k], b = m[k + 1];
    const double v0 = v[k], v1 = v[k + 1];
    out[k] = a * v0 + b * v1;
    out[k + 1] = a * v1 - b * v0;
  }
}

void score_rows(const double* rows, std::size_t count, const double* q, std::size_t d, double* out) {
  for (std::size_t i = 0; i < count; ++i) out[i] = dot(rows + i * d, q, d);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void relation_grad(double alpha, const double* s, const double* o, std::size_t ns, std::size_t nb, double* g) {
  for (std::size_t i = 0; i < ns; ++i) g[i] += alpha * s[i] * o[i];
  for (std::size_t j = 0; j < nb; ++j) {
    const std::size_t k = ns + 2 * j;
    const double s0 = s[k], s1 = s[k + 1];
    const double o0 = o[k], o1 = o[k + 1];
    g[k] += alpha * (s0 * o0 + s1 * o1);
    g[k + 1] += alpha * (s1 * o0 - s0 * o1);
  }
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{
      "scalar", dot, bilinear, apply, apply_transpose, score_rows, axpy, relation_grad,
  };
  return table;
}

}  // namespace itere::kernels
