#include <catch2/catch_amalgamated.hpp>

#include "gcl/complex.hpp"

using namespace gcl;

namespace {

// Closed-form cubical count: sum over axis subsets of size p.
long long expected_cells(int dim, const std::vector<int>& n, int p) {
  long long total = 0;
  for (unsigned m = 0; m < (1u << dim); ++m) {
    if (popcount4(m) != p) continue;
    long long c = 1;
    for (int a = 0; a < dim; ++a) c *= ((m >> a) & 1u) ? n[a] : n[a] + 1;
    total += c;
  }
  return total;
}

}  // namespace

TEST_CASE("unit cube cell counts") {
  auto cx = build_complex(3, {1, 1, 1}, {1.0, 1.0, 1.0});
  CHECK(cx.cell_count(0) == 8);
  CHECK(cx.cell_count(1) == 12);
  CHECK(cx.cell_count(2) == 6);
  CHECK(cx.cell_count(3) == 1);
  CHECK(cx.euler_characteristic() == 1);
}

TEST_CASE("2x2x2 cell counts match direct formula") {
  auto cx = build_complex(3, {2, 2, 2}, {1.0, 1.0, 1.0});
  CHECK(cx.cell_count(0) == 27);
  CHECK(cx.cell_count(1) == 54);
  CHECK(cx.cell_count(2) == 36);
  CHECK(cx.cell_count(3) == 8);
  for (int p = 0; p <= 3; ++p) CHECK(cx.cell_count(p) == expected_cells(3, {2, 2, 2}, p));
}

TEST_CASE("cell counts for assorted extents") {
  const std::vector<std::vector<int>> grids = {{3, 1, 2}, {5, 4, 3}, {16, 16, 16}, {7, 2, 9}};
  for (const auto& n : grids) {
    auto cx = build_complex(3, n, {0.5, 1.0, 2.0});
    for (int p = 0; p <= 3; ++p) CHECK(cx.cell_count(p) == expected_cells(3, n, p));
    CHECK(cx.euler_characteristic() == 1);
  }
}

TEST_CASE("4D oracle complex is contractible") {
  auto cx = build_complex(4, {2, 2, 2, 2}, {1.0, 1.0, 1.0, 1.0});
  CHECK(cx.euler_characteristic() == 1);
  for (int p = 0; p <= 4; ++p) CHECK(cx.cell_count(p) == expected_cells(4, {2, 2, 2, 2}, p));
}

TEST_CASE("build_complex rejects bad arguments") {
  CHECK_THROWS_AS(build_complex(3, {0, 1, 1}, {1, 1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(build_complex(3, {1, 1, 1}, {1, -1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(build_complex(3, {1, 1, 1}, {1, 0, 1}), std::invalid_argument);
  CHECK_THROWS_AS(build_complex(2, {1, 1}, {1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(build_complex(4, {5, 1, 1, 1}, {1, 1, 1, 1}), std::invalid_argument);
}

TEST_CASE("1D stencil of d on 0-forms") {
  // Single cube: the x-aligned edge from (0,0,0) to (1,0,0) carries the
  // fundamental-theorem stencil [-1, +1].
  auto cx = build_complex(3, {1, 1, 1}, {1, 1, 1});
  auto d0 = exterior_derivative(cx, 0);
  std::array<int, kMaxDim> p0{0, 0, 0, 0}, p1{1, 0, 0, 0};
  const index_t v0 = cx.cell_id(0, 0u, p0);
  const index_t v1 = cx.cell_id(0, 0u, p1);
  const index_t e = cx.cell_id(1, 1u, p0);
  int s0 = 0, s1 = 0;
  for (int s = 0; s < d0.row_width(); ++s) {
    if (d0.col(e, s) == v0) s0 = d0.sign(e, s);
    if (d0.col(e, s) == v1) s1 = d0.sign(e, s);
  }
  CHECK(s0 == -1);
  CHECK(s1 == 1);
}

TEST_CASE("d after d vanishes in integer arithmetic") {
  for (const auto& n : {std::vector<int>{2, 2, 2}, {4, 3, 2}, {16, 16, 16}}) {
    auto cx = build_complex(3, n, {1.0, 0.5, 2.0});
    for (int p = 0; p + 1 < 3; ++p) {
      auto dp = exterior_derivative(cx, p);
      auto dn = exterior_derivative(cx, p + 1);
      CHECK(IncidenceOperator::compose_max_abs(dn, dp) == 0);
    }
  }
  for (const auto& n : {std::vector<int>{2, 2, 2, 2}, {3, 3, 3, 3}}) {
    auto cx = build_complex(4, n, {1, 1, 1, 1});
    for (int p = 0; p + 1 < 4; ++p) {
      auto dp = exterior_derivative(cx, p);
      auto dn = exterior_derivative(cx, p + 1);
      CHECK(IncidenceOperator::compose_max_abs(dn, dp) == 0);
    }
  }
}

TEST_CASE("d after d vanishes on periodic complexes") {
  auto cx = CubicalComplex::torus(3, {4, 3, 5}, {1.0, 1.0, 1.0});
  for (int p = 0; p + 1 < 3; ++p) {
    auto dp = exterior_derivative(cx, p);
    auto dn = exterior_derivative(cx, p + 1);
    CHECK(IncidenceOperator::compose_max_abs(dn, dp) == 0);
  }
  // 3-torus: equal counts per degree triple, Euler characteristic zero.
  CHECK(cx.cell_count(0) == 60);
  CHECK(cx.cell_count(3) == 60);
  CHECK(cx.euler_characteristic() == 0);
}

TEST_CASE("face rows of d on 1-forms have four signed entries") {
  auto cx = build_complex(3, {2, 2, 2}, {1, 1, 1});
  auto d1 = exterior_derivative(cx, 1);
  REQUIRE(d1.row_width() == 4);
  for (index_t r = 0; r < d1.rows(); ++r) {
    int nz = 0;
    for (int s = 0; s < 4; ++s) {
      CHECK((d1.sign(r, s) == 1 || d1.sign(r, s) == -1));
      ++nz;
    }
    CHECK(nz == 4);
  }
}

TEST_CASE("enumeration is deterministic") {
  auto a = build_complex(3, {3, 4, 5}, {0.1, 0.2, 0.3});
  auto b = build_complex(3, {3, 4, 5}, {0.1, 0.2, 0.3});
  for (int p = 0; p < 3; ++p) {
    auto da = exterior_derivative(a, p);
    auto db = exterior_derivative(b, p);
    REQUIRE(da.rows() == db.rows());
    for (index_t r = 0; r < da.rows(); ++r)
      for (int s = 0; s < da.row_width(); ++s) {
        CHECK(da.col(r, s) == db.col(r, s));
        CHECK(da.sign(r, s) == db.sign(r, s));
      }
  }
}

TEST_CASE("exterior_derivative rejects out-of-range degree") {
  auto cx = build_complex(3, {2, 2, 2}, {1, 1, 1});
  CHECK_THROWS_AS(exterior_derivative(cx, 3), std::invalid_argument);
  CHECK_THROWS_AS(exterior_derivative(cx, -1), std::invalid_argument);
}

TEST_CASE("boundary flags") {
  auto cx = build_complex(3, {2, 2, 2}, {1, 1, 1});
  index_t interior = 0;
  for (index_t v = 0; v < cx.cell_count(0); ++v)
    if (!cx.is_boundary(0, v)) ++interior;
  CHECK(interior == 1);  // only the center vertex
  // every 3-cell is interior (no node coordinates at all)
  for (index_t c = 0; c < cx.cell_count(3); ++c) CHECK(!cx.is_boundary(3, c));
  // periodic complexes have no boundary
  auto tx = CubicalComplex::torus(3, {3, 3, 3}, {1, 1, 1});
  for (int p = 0; p <= 3; ++p)
    for (index_t i = 0; i < tx.cell_count(p); ++i) CHECK(!tx.is_boundary(p, i));
}

TEST_CASE("measures respect anisotropic spacing") {
  auto cx = build_complex(3, {2, 2, 2}, {2.0, 1.0, 1.0});
  CHECK(cx.cell_measure(1u) == Catch::Approx(2.0));   // x-edge length
  CHECK(cx.dual_measure(1u) == Catch::Approx(1.0));   // dual face area of an x-edge
  CHECK(cx.dual_measure(0u) == Catch::Approx(2.0));   // dual volume of a vertex
  CHECK(cx.cell_measure(7u) == Catch::Approx(2.0));   // cell volume
}

TEST_CASE("transpose application matches direct transpose") {
  auto cx = build_complex(3, {3, 2, 4}, {1, 1, 1});
  auto d1 = exterior_derivative(cx, 1);
  std::vector<double> x(static_cast<size_t>(d1.rows()));
  for (size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>((i * 7919) % 23) - 11.0;
  std::vector<double> y(static_cast<size_t>(d1.cols()), 0.0), yref(y.size(), 0.0);
  d1.apply_transpose(x.data(), y.data());
  for (index_t r = 0; r < d1.rows(); ++r)
    for (int s = 0; s < d1.row_width(); ++s)
      yref[static_cast<size_t>(d1.col(r, s))] += d1.sign(r, s) * x[static_cast<size_t>(r)];
  for (size_t i = 0; i < y.size(); ++i) CHECK(y[i] == Catch::Approx(yref[i]));
}
