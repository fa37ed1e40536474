#include <doctest.h>

#include <cmath>
#include <random>

#include "itere/block_diag.hpp"
#include "oracles.hpp"

using namespace itere;

namespace {

BlockDiagMatrix random_matrix(std::mt19937_64& rng, BlockLayout layout) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  BlockDiagMatrix m(layout);
  for (auto& c : m.coeffs()) c = u(rng);
  return m;
}

std::vector<double> coeffs_of(const BlockDiagMatrix& m) { return {m.coeffs().begin(), m.coeffs().end()}; }

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

}  // namespace

TEST_CASE("dense expansion places scalars and blocks on the diagonal") {
  BlockLayout layout{1, 1};
  BlockDiagMatrix m(layout);
  m.set_scalar(0, 2.0);
  m.set_rotation(0, {3.0, 4.0});
  CHECK(block_to_dense(m) == std::vector<double>{2, 0, 0, 0, 3, -4, 0, 4, 3});

  BlockLayout l{2, 3};
  CHECK(block_to_dense(BlockDiagMatrix::identity(l)) == oracle::identity(8));
  CHECK(block_to_dense(BlockDiagMatrix(l)) == std::vector<double>(64, 0.0));
}

TEST_CASE("block_multiply composes rotations like complex numbers") {
  BlockLayout layout{0, 1};
  BlockDiagMatrix i(layout);
  i.set_rotation(0, {0.0, 1.0});
  auto sq = block_multiply(i, i);
  CHECK(sq.rotation(0).a == -1.0);
  CHECK(sq.rotation(0).b == 0.0);

  std::mt19937_64 rng(11);
  BlockLayout l{3, 2};
  auto m = random_matrix(rng, l);
  CHECK(coeffs_of(block_multiply(m, BlockDiagMatrix::identity(l))) == coeffs_of(m));

  // commutative, modulus multiplicative
  auto n = random_matrix(rng, l);
  auto mn = block_multiply(m, n), nm = block_multiply(n, m);
  CHECK(max_abs_diff(coeffs_of(mn), coeffs_of(nm)) == 0.0);
  for (std::size_t j = 0; j < l.blocks; ++j) {
    auto mod = [](Rotation r) { return std::hypot(r.a, r.b); };
    CHECK(mod(mn.rotation(j)) == doctest::Approx(mod(m.rotation(j)) * mod(n.rotation(j))).epsilon(1e-12));
  }
}

TEST_CASE("block operations agree with dense oracles") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> half(0, 8);
  for (int c = 0; c < 100; ++c) {
    const std::size_t nb = half(rng) % 9;
    const std::size_t ns = std::uniform_int_distribution<std::size_t>(0, 16 - 2 * nb)(rng);
    BlockLayout l{ns, nb};
    if (l.dim() == 0) continue;
    auto a = random_matrix(rng, l), b = random_matrix(rng, l);
    const auto da = oracle::dense_of(l, coeffs_of(a)), db = oracle::dense_of(l, coeffs_of(b));
    CHECK(block_to_dense(a) == da);
    CHECK(max_abs_diff(block_to_dense(block_multiply(a, b)), oracle::matmul(da, db, l.dim())) < 1e-10);
    CHECK(std::abs(block_frobenius_diff(a, b) - oracle::frobenius_diff(da, db)) < 1e-10);
  }
}

TEST_CASE("frobenius difference on small cases") {
  BlockLayout l{0, 1};
  CHECK(block_frobenius_diff(BlockDiagMatrix::identity(l), BlockDiagMatrix(l)) == doctest::Approx(std::sqrt(2.0)));
  std::mt19937_64 rng(1);
  auto m = random_matrix(rng, BlockLayout{2, 2});
  CHECK(block_frobenius_diff(m, m) == 0.0);
}

TEST_CASE("layout mismatches are rejected") {
  BlockDiagMatrix a(BlockLayout{2, 1}), b(BlockLayout{0, 2});
  CHECK_THROWS_AS(block_multiply(a, b), Error);
  CHECK_THROWS_AS(block_frobenius_diff(a, b), Error);
  std::vector<double> short_coeffs(3);
  CHECK_THROWS_AS(BlockDiagMatrix(BlockLayout{2, 1}, short_coeffs), Error);
}
