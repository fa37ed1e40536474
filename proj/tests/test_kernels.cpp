#include <doctest.h>

#include <cmath>
#include <random>
#include <string>

#include "itere/kernels.hpp"
#include "oracles.hpp"

using namespace itere;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

bool close(double a, double b) { return std::abs(a - b) <= 1e-12 * (1.0 + std::abs(a) + std::abs(b)); }

}  // namespace

TEST_CASE("scalar kernels match the dense expansion") {
  const auto& k = kernels::scalar_table();
  std::mt19937_64 rng(2);
  for (std::size_t ns : {0u, 1u, 3u, 4u}) {
    for (std::size_t nb : {0u, 1u, 2u, 5u}) {
      const std::size_t d = ns + 2 * nb;
      if (d == 0) continue;
      BlockLayout l{ns, nb};
      auto m = random_vec(rng, d), s = random_vec(rng, d), o = random_vec(rng, d);
      auto dense = oracle::dense_of(l, m);
      CHECK(close(k.bilinear(s.data(), m.data(), o.data(), ns, nb), oracle::bilinear(s, dense, o)));
      std::vector<double> mv(d), mtv(d);
      k.apply(m.data(), o.data(), ns, nb, mv.data());
      k.apply_transpose(m.data(), s.data(), ns, nb, mtv.data());
      for (std::size_t i = 0; i < d; ++i) {
        double row = 0.0, col = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
          row += dense[i * d + j] * o[j];
          col += dense[j * d + i] * s[j];
        }
        CHECK(close(mv[i], row));
        CHECK(close(mtv[i], col));
      }
      // d(s^T M o)/dM by finite differences on each coefficient (exact: linear in M)
      std::vector<double> g(d, 0.0);
      k.relation_grad(1.0, s.data(), o.data(), ns, nb, g.data());
      for (std::size_t i = 0; i < d; ++i) {
        auto up = m;
        up[i] += 1.0;
        const double diff = oracle::bilinear(s, oracle::dense_of(l, up), o) - oracle::bilinear(s, dense, o);
        CHECK(close(g[i], diff));
      }
    }
  }
}

TEST_CASE("every available kernel table agrees with the scalar reference") {
  const auto& ref = kernels::scalar_table();
  std::mt19937_64 rng(9);
  for (const auto* table : kernels::available()) {
    CAPTURE(std::string(table->name));
    for (std::size_t ns : {0u, 1u, 2u, 5u, 8u, 16u}) {
      for (std::size_t nb : {0u, 1u, 2u, 3u, 4u, 7u, 8u}) {
        const std::size_t d = ns + 2 * nb;
        if (d == 0) continue;
        auto m = random_vec(rng, d), s = random_vec(rng, d), o = random_vec(rng, d);
        CHECK(close(table->dot(s.data(), o.data(), d), ref.dot(s.data(), o.data(), d)));
        CHECK(close(table->bilinear(s.data(), m.data(), o.data(), ns, nb),
                    ref.bilinear(s.data(), m.data(), o.data(), ns, nb)));

        std::vector<double> a(d), b(d);
        table->apply(m.data(), o.data(), ns, nb, a.data());
        ref.apply(m.data(), o.data(), ns, nb, b.data());
        for (std::size_t i = 0; i < d; ++i) CHECK(close(a[i], b[i]));
        table->apply_transpose(m.data(), s.data(), ns, nb, a.data());
        ref.apply_transpose(m.data(), s.data(), ns, nb, b.data());
        for (std::size_t i = 0; i < d; ++i) CHECK(close(a[i], b[i]));

        auto y1 = random_vec(rng, d), y2 = y1;
        table->axpy(0.37, s.data(), y1.data(), d);
        ref.axpy(0.37, s.data(), y2.data(), d);
        for (std::size_t i = 0; i < d; ++i) CHECK(close(y1[i], y2[i]));

        auto g1 = random_vec(rng, d), g2 = g1;
        table->relation_grad(-0.8, s.data(), o.data(), ns, nb, g1.data());
        ref.relation_grad(-0.8, s.data(), o.data(), ns, nb, g2.data());
        for (std::size_t i = 0; i < d; ++i) CHECK(close(g1[i], g2[i]));

        const std::size_t rows = 13;
        auto table_rows = random_vec(rng, rows * d);
        std::vector<double> r1(rows), r2(rows);
        table->score_rows(table_rows.data(), rows, o.data(), d, r1.data());
        ref.score_rows(table_rows.data(), rows, o.data(), d, r2.data());
        for (std::size_t i = 0; i < rows; ++i) CHECK(close(r1[i], r2[i]));
      }
    }
  }
}

TEST_CASE("kernel selection by name") {
  const std::string before(kernels::active().name);
  CHECK(kernels::select("scalar"));
  CHECK(kernels::active().name == "scalar");
  CHECK_FALSE(kernels::select("no-such-kernel"));
  CHECK(kernels::select(before));
  CHECK(kernels::available().front()->name == "scalar");
}
