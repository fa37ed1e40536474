#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "itere/kg_store.hpp"

namespace itere {

/// Shape of a block-diagonal relation matrix: `scalars` 1x1 diagonal entries followed
/// by `blocks` 2x2 rotation-scale blocks [[a, -b], [b, a]].
struct BlockLayout {
  std::size_t scalars = 0;
  std::size_t blocks = 0;

  std::size_t dim() const noexcept { return scalars + 2 * blocks; }
  friend bool operator==(const BlockLayout&, const BlockLayout&) = default;
};

struct Rotation {
  double a = 0.0;
  double b = 0.0;
};

/// Relation matrix stored as `dim()` coefficients: the scalars, then the (a, b) pair of
/// each block interleaved. The same coefficient order is used by the model tables and
/// the SIMD kernels.
class BlockDiagMatrix {
 public:
  BlockDiagMatrix() = default;
  explicit BlockDiagMatrix(BlockLayout layout);
  BlockDiagMatrix(BlockLayout layout, std::span<const double> coeffs);

  static BlockDiagMatrix identity(BlockLayout layout);

  BlockLayout layout() const noexcept { return layout_; }
  std::span<const double> coeffs() const noexcept { return coeffs_; }
  std::span<double> coeffs() noexcept { return coeffs_; }

  double scalar(std::size_t i) const { return coeffs_[i]; }
  void set_scalar(std::size_t i, double value) { coeffs_[i] = value; }
  Rotation rotation(std::size_t j) const {
    return {coeffs_[layout_.scalars + 2 * j], coeffs_[layout_.scalars + 2 * j + 1]};
  }
  void set_rotation(std::size_t j, Rotation r) {
    coeffs_[layout_.scalars + 2 * j] = r.a;
    coeffs_[layout_.scalars + 2 * j + 1] = r.b;
  }

 private:
  BlockLayout layout_;
  std::vector<double> coeffs_;
};

/// Product M1 * M2; scalars multiply, rotations compose like complex numbers.
BlockDiagMatrix block_multiply(const BlockDiagMatrix& lhs, const BlockDiagMatrix& rhs);

/// ||M1 - M2||_F computed from the coefficients (each block entry counts twice).
double block_frobenius_diff(const BlockDiagMatrix& lhs, const BlockDiagMatrix& rhs);

/// Row-major dim x dim expansion.
std::vector<double> block_to_dense(const BlockDiagMatrix& m);

}  // namespace itere
