#pragma once

// Inner-loop kernels over block-diagonal relation coefficients.
//
// A relation is `ns` scalars followed by `nb` interleaved (a, b) pairs, and entity
// vectors use the matching coordinate order. Every kernel has a scalar reference
// implementation; vectorized tables must agree with it to rounding.

#include <cstddef>
#include <span>
#include <string_view>

namespace itere::kernels {

struct KernelTable {
  std::string_view name;

  double (*dot)(const double* x, const double* y, std::size_t n);

  /// v_s^T M v_o.
  double (*bilinear)(const double* s, const double* m, const double* o, std::size_t ns, std::size_t nb);

  /// out = M v.
  void (*apply)(const double* m, const double* v, std::size_t ns, std::size_t nb, double* out);

  /// out = M^T v.
  void (*apply_transpose)(const double* m, const double* v, std::size_t ns, std::size_t nb, double* out);

  /// out[i] = rows[i * d .. i * d + d) . q
  void (*score_rows)(const double* rows, std::size_t count, const double* q, std::size_t d, double* out);

  /// y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);

  /// g += alpha * d(v_s^T M v_o)/dM, laid out like the relation coefficients.
  void (*relation_grad)(double alpha, const double* s, const double* o, std::size_t ns, std::size_t nb,
                        double* g);
};

const KernelTable& scalar_table();

/// Tables compiled in and supported by the running CPU, scalar first.
std::span<const KernelTable* const> available();

/// The table used by the library. Picks the widest available table on first use;
/// the ITERE_KERNELS environment variable ("scalar", "avx2") overrides.
const KernelTable& active();

/// Switches the active table by name. Returns false if it is not available.
bool select(std::string_view name);

}  // namespace itere::kernels
