#include "itere/block_diag.hpp"

#include <cmath>
#include <string>

namespace itere {

namespace {

void require_same_layout(const BlockDiagMatrix& lhs, const BlockDiagMatrix& rhs, const char* op) {
  if (!(lhs.layout() == rhs.layout())) {
    throw Error(std::string(op) + ": layout mismatch (" + std::to_string(lhs.layout().scalars) + "+" +
                std::to_string(lhs.layout().blocks) + " vs " + std::to_string(rhs.layout().scalars) + "+" +
                std::to_string(rhs.layout().blocks) + ")");
  }
}

}  // namespace

BlockDiagMatrix::BlockDiagMatrix(BlockLayout layout) : layout_(layout), coeffs_(layout.dim(), 0.0) {}

BlockDiagMatrix::BlockDiagMatrix(BlockLayout layout, std::span<const double> coeffs)
    : layout_(layout), coeffs_(coeffs.begin(), coeffs.end()) {
  if (coeffs_.size() != layout.dim()) throw Error("BlockDiagMatrix: coefficient count does not match layout");
}

BlockDiagMatrix BlockDiagMatrix::identity(BlockLayout layout) {
  BlockDiagMatrix m(layout);
  for (std::size_t i = 0; i < layout.scalars; ++i) m.set_scalar(i, 1.0);
  for (std::size_t j = 0; j < layout.blocks; ++j) m.set_rotation(j, {1.0, 0.0});
  return m;
}

BlockDiagMatrix block_multiply(const BlockDiagMatrix& lhs, const BlockDiagMatrix& rhs) {
  require_same_layout(lhs, rhs, "block_multiply");
  const auto layout = lhs.layout();
  BlockDiagMatrix out(layout);
  for (std::size_t i = 0; i < layout.scalars; ++i) out.set_scalar(i, lhs.scalar(i) * rhs.scalar(i));
  for (std::size_t j = 0; j < layout.blocks; ++j) {
    auto [a1, b1] = lhs.rotation(j);
    auto [a2, b2] = rhs.rotation(j);
    out.set_rotation(j, {a1 * a2 - b1 * b2, a1 * b2 + b1 * a2});
  }
  return out;
}

double block_frobenius_diff(const BlockDiagMatrix& lhs, const BlockDiagMatrix& rhs) {
  require_same_layout(lhs, rhs, "block_frobenius_diff");
  const auto layout = lhs.layout();
  double sum = 0.0;
  for (std::size_t i = 0; i < layout.scalars; ++i) {
    double d = lhs.scalar(i) - rhs.scalar(i);
    sum += d * d;
  }
  for (std::size_t j = 0; j < layout.blocks; ++j) {
    double da = lhs.rotation(j).a - rhs.rotation(j).a;
    double db = lhs.rotation(j).b - rhs.rotation(j).b;
    sum += 2.0 * (da * da + db * db);
  }
  return std::sqrt(sum);
}

std::vector<double> block_to_dense(const BlockDiagMatrix& m) {
  const auto layout = m.layout();
  const std::size_t d = layout.dim();
  std::vector<double> dense(d * d, 0.0);
  for (std::size_t i = 0; i < layout.scalars; ++i) dense[i * d + i] = m.scalar(i);
  for (std::size_t j = 0; j < layout.blocks; ++j) {
    const std::size_t k = layout.scalars + 2 * j;
    auto [a, b] = m.rotation(j);
    dense[k * d + k] = a;
    dense[k * d + k + 1] = -b;
    dense[(k + 1) * d + k] = b;
    dense[(k + 1) * d + k + 1] = a;
  }
  return dense;
}

}  // namespace itere
