#include <catch2/catch_amalgamated.hpp>

#include "gcl/spacetime.hpp"

using namespace gcl;

TEST_CASE("split classification on the unit 4-cube grid") {
  auto cx = build_complex(4, {1, 1, 1, 1}, {1, 1, 1, 1});
  auto sp = spacetime_split(cx);
  CHECK(sp.timelike_count[1] + sp.spacelike_count[1] == cx.cell_count(1));
  CHECK(cx.cell_count(1) == 32);
  CHECK(sp.timelike_count[1] == 8);
  CHECK(sp.spacelike_count[1] == 24);
  // points have no extent; every 4-cube spans time
  CHECK(sp.timelike_count[0] == 0);
  CHECK(sp.spacelike_count[4] == 0);
  CHECK(sp.timelike_count[4] == cx.cell_count(4));
}

TEST_CASE("split partitions every degree") {
  auto cx = build_complex(4, {2, 3, 2, 2}, {1, 1, 1, 1});
  auto sp = spacetime_split(cx);
  for (int p = 0; p <= 4; ++p) {
    CHECK(sp.timelike_count[p] + sp.spacelike_count[p] == cx.cell_count(p));
    index_t tl = 0;
    for (auto f : sp.timelike[p]) tl += f;
    CHECK(tl == sp.timelike_count[p]);
  }
}

TEST_CASE("split rejects 3D complexes") {
  auto cx = build_complex(3, {2, 2, 2}, {1, 1, 1});
  CHECK_THROWS_AS(spacetime_split(cx), std::invalid_argument);
}

TEST_CASE("4D derivative equals its space/time split exactly") {
  for (int n : {2, 3}) {
    auto cx = build_complex(4, {n, n, n, n}, {1, 1, 1, 1});
    auto rep = verify_4d_decomposition(cx, 100, 20190813u);
    INFO("extent " << n);
    CHECK(rep.pass());
    for (int p = 0; p <= 3; ++p) CHECK(rep.max_discrepancy[p] == 0);
  }
}

TEST_CASE("space-like rows vanish for purely time-like cochains") {
  auto cx = build_complex(4, {2, 2, 2, 2}, {1, 1, 1, 1});
  auto sp = spacetime_split(cx);
  for (int p = 1; p <= 3; ++p) {
    std::vector<long long> x(static_cast<size_t>(cx.cell_count(p)), 0);
    for (index_t i = 0; i < cx.cell_count(p); ++i)
      if (sp.timelike[p][static_cast<size_t>(i)]) x[static_cast<size_t>(i)] = 1 + (i % 5);
    auto d = exterior_derivative(cx, p);
    std::vector<long long> y(static_cast<size_t>(cx.cell_count(p + 1)));
    d.apply_int(x.data(), y.data());
    for (index_t r = 0; r < cx.cell_count(p + 1); ++r)
      if (!sp.timelike[p + 1][static_cast<size_t>(r)]) CHECK(y[static_cast<size_t>(r)] == 0);
  }
}
