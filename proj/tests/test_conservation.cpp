#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "gcl/conservation.hpp"

using namespace gcl;

namespace {

// Independent transcription of the displayed 8x8 law, row by row.
struct Entry {
  const char* row;
  const char* col;
  BlockKind kind;
  int sign;
};
const Entry kLaw[] = {
    {"G3s", "f3s", BlockKind::dt, +1},           {"G3s", "F2s", BlockKind::ds, -1},
    {"g3s", "F3s", BlockKind::star_dt_star, +1}, {"g3s", "f2s", BlockKind::ds, +1},
    {"G1s", "f1s", BlockKind::dt, +1},           {"G1s", "F2s", BlockKind::star_ds_star, +1},
    {"G1s", "F0", BlockKind::ds, -1},            {"g1s", "F1s", BlockKind::star_dt_star, +1},
    {"g1s", "f2s", BlockKind::star_ds_star, +1}, {"g1s", "f0", BlockKind::ds, +1},
    {"G2s", "F3s", BlockKind::star_ds_star, +1}, {"G2s", "F1s", BlockKind::ds, -1},
    {"G2s", "f2s", BlockKind::dt, +1},           {"g2s", "f3s", BlockKind::star_ds_star, +1},
    {"g2s", "f1s", BlockKind::ds, +1},           {"g2s", "F2s", BlockKind::star_dt_star, -1},
    {"G0", "F1s", BlockKind::star_ds_star, +1},  {"G0", "f0", BlockKind::dt, +1},
    {"g0", "f1s", BlockKind::star_ds_star, +1},  {"g0", "F0", BlockKind::star_dt_star, -1},
};

std::vector<BlockSpec> law_fixture() {
  std::vector<BlockSpec> out;
  for (const Entry& e : kLaw) {
    BlockSpec b;
    b.row = row_from_label(e.row);
    b.col = slot_from_label(e.col);
    b.kind = e.kind;
    b.sign = e.sign;
    out.push_back(b);
  }
  return out;
}

TimeDerivative zero_time(const BlockOperator& op, int fiber) {
  return [&op, fiber](Slot s) {
    return Cochain(op.complex(), slot_degree(s), fiber, op.slot_placement(s));
  };
}

}  // namespace

TEST_CASE("pattern lock against the independent transcription") {
  // Three distinct grids / material sets.
  auto cx1 = build_complex(3, {2, 2, 2}, {1, 1, 1});
  auto cx2 = build_complex(3, {4, 3, 2}, {0.5, 1.0, 2.0});
  auto cx3 = CubicalComplex::torus(3, {3, 3, 3}, {0.25, 0.25, 0.25});

  auto check_on = [&](const CubicalComplex& cx, const std::map<Slot, const HodgeMap*>& hs) {
    auto op = assemble_block_operator(cx, hs);
    CHECK(op.blocks().size() == 20);
    CHECK(check_pattern(op, law_fixture()).empty());
  };
  check_on(cx1, {});
  auto h1 = build_hodge(cx2, 1, MaterialField::constant(MaterialKind::permittivity, 3.0));
  auto h2 = build_hodge(cx2, 2, MaterialField::constant(MaterialKind::reluctivity, 0.5));
  check_on(cx2, {{Slot::F1, &h1}, {Slot::f2, &h2}});
  MaterialField percell = MaterialField::constant(MaterialKind::custom, 1.0);
  percell.per_cell.assign(static_cast<size_t>(cx3.cell_count(0)), 2.0);
  auto h0 = build_hodge(cx3, 0, percell);
  check_on(cx3, {{Slot::F0, &h0}});
}

TEST_CASE("single-sign fault injection is detected and named") {
  auto cx = build_complex(3, {2, 2, 2}, {1, 1, 1});
  auto op = assemble_block_operator(cx, {});
  const auto fixture = law_fixture();
  for (size_t i = 0; i < fixture.size(); ++i) {
    auto tampered = fixture;
    tampered[i].sign = -tampered[i].sign;
    auto bad = check_pattern(op, tampered);
    REQUIRE(bad.size() == 1);
    const std::string expect = std::string("(row ") + kRowLabel[static_cast<size_t>(fixture[i].row)] +
                               ", col " + slot_label(fixture[i].col) + ")";
    CHECK(bad[0].find("sign mismatch") != std::string::npos);
    CHECK(bad[0].find(expect) != std::string::npos);
  }
  // the spec's worked example: tampering (row g1s, col f2s)
  auto tampered = fixture;
  for (auto& b : tampered)
    if (b.row == row_from_label("g1s") && b.col == slot_from_label("f2s")) b.sign = -b.sign;
  auto bad = check_pattern(op, tampered);
  REQUIRE(bad.size() == 1);
  CHECK(bad[0].find("row g1s") != std::string::npos);
  CHECK(bad[0].find("col f2s") != std::string::npos);
  // kind tampering is detected too
  tampered = fixture;
  tampered[0].kind = BlockKind::ds;
  CHECK(!check_pattern(op, tampered).empty());
}

TEST_CASE("block degree bookkeeping is consistent") {
  auto cx = build_complex(3, {2, 2, 2}, {1, 1, 1});
  auto op = assemble_block_operator(cx, {});
  for (const BlockSpec& b : op.blocks()) {
    const int q = slot_degree(b.col);
    const int r = kRowDegree[static_cast<size_t>(b.row)];
    switch (b.kind) {
      case BlockKind::dt:
      case BlockKind::star_dt_star: CHECK(r == q); break;
      case BlockKind::ds: CHECK(r == q + 1); break;
      case BlockKind::star_ds_star: CHECK(r == q - 1); break;
    }
  }
}

TEST_CASE("spatial blocks reproduce grad, curl and div") {
  // Anisotropic box; compare on interior rows where the truncated dual
  // stencils do not apply.
  auto cx = build_complex(3, {4, 3, 3}, {0.5, 1.0, 0.75});
  auto op = assemble_block_operator(cx, {});
  auto v = [](const std::array<double, 3>& x) {
    return std::array<double, 3>{0.5 * x[1] + x[2], 2.0 * x[0] - x[2], x[0] + x[1]};
  };
  const std::array<double, 3> curl_v{1.0 - (-1.0), 1.0 - 1.0, 2.0 - 0.5};
  const double div_v = 0.0;

  SECTION("star d star on a 2-form is the curl") {
    Cochain b = project_vector_proxy(cx, 2, v);
    auto blk = *op.find_block(row_from_label("g1s"), Slot::f2);
    Cochain y = op.apply_block(blk, b);
    Cochain expect = project_vector_proxy(
        cx, 1, [&](const std::array<double, 3>&) { return curl_v; });
    for (index_t e = 0; e < cx.cell_count(1); ++e) {
      if (cx.is_boundary(1, e)) continue;
      CHECK(y.at(e) == Catch::Approx(expect.at(e)).margin(1e-12));
    }
  }
  SECTION("star d star on a 1-form is the divergence") {
    Cochain e = project_vector_proxy(cx, 1, v);
    auto blk = *op.find_block(row_from_label("G0"), Slot::F1);
    Cochain y = op.apply_block(blk, e);
    for (index_t vtx = 0; vtx < cx.cell_count(0); ++vtx) {
      if (cx.is_boundary(0, vtx)) continue;
      CHECK(y.at(vtx) == Catch::Approx(div_v).margin(1e-12));
    }
  }
  SECTION("star d star on a 3-form is the gradient") {
    Cochain w = project_scalar(
        cx, 3, [](const std::array<double, 3>& x) { return 2.0 * x[0] - 3.0 * x[1] + x[2]; });
    auto blk = *op.find_block(row_from_label("g2s"), Slot::f3);
    Cochain y = op.apply_block(blk, w);
    Cochain expect = project_vector_proxy(cx, 2, [](const std::array<double, 3>&) {
      return std::array<double, 3>{2.0, -3.0, 1.0};
    });
    for (index_t f = 0; f < cx.cell_count(2); ++f) {
      if (cx.is_boundary(2, f)) continue;
      CHECK(y.at(f) == Catch::Approx(expect.at(f)).margin(1e-12));
    }
  }
  SECTION("material factors scale the starred blocks") {
    auto hnu = build_hodge(cx, 2, MaterialField::constant(MaterialKind::reluctivity, 2.5));
    auto opm = assemble_block_operator(cx, {{Slot::f2, &hnu}});
    Cochain b = project_vector_proxy(cx, 2, v);
    auto blk = *opm.find_block(row_from_label("g1s"), Slot::f2);
    Cochain y = opm.apply_block(blk, b);
    Cochain expect = project_vector_proxy(
        cx, 1, [&](const std::array<double, 3>&) {
          return std::array<double, 3>{2.5 * curl_v[0], 2.5 * curl_v[1], 2.5 * curl_v[2]};
        });
    for (index_t e = 0; e < cx.cell_count(1); ++e) {
      if (cx.is_boundary(1, e)) continue;
      CHECK(y.at(e) == Catch::Approx(expect.at(e)).margin(1e-12));
    }
  }
}

TEST_CASE("dual-placement blocks") {
  auto cx = build_complex(3, {3, 3, 3}, {0.5, 0.5, 0.5});
  std::array<Placement, kNumSlots> pl = kAllPrimal;
  pl[static_cast<size_t>(slot_index(Slot::f3))] = Placement::dual;
  pl[static_cast<size_t>(slot_index(Slot::F2))] = Placement::dual;
  auto op = assemble_block_operator(cx, {}, pl);

  SECTION("derivative of a dual 2-form lands on dual 3-cells as +D0^T") {
    std::mt19937 rng(3);
    Cochain x(cx, 2, 1, Placement::dual);
    for (auto& w : x.values) w = (static_cast<double>(rng()) / 4294967296.0 - 0.5);
    auto blk = *op.find_block(row_from_label("G3s"), Slot::F2);  // displayed sign -1
    Cochain y = op.apply_block(blk, x);
    CHECK(y.placement == Placement::dual);
    CHECK(y.cells() == cx.cell_count(0));
    auto d0 = exterior_derivative(cx, 0);
    std::vector<double> expect(static_cast<size_t>(cx.cell_count(0)));
    d0.apply_transpose(x.values.data(), expect.data());
    for (index_t i = 0; i < y.cells(); ++i)
      CHECK(y.at(i) == Catch::Approx(expect[static_cast<size_t>(i)]).margin(1e-14));
  }
  SECTION("star d star of a dual 3-form is the vertex gradient pushed to edges") {
    Cochain w = project_scalar(
        cx, 3, [](const std::array<double, 3>& x) { return x[0] + 2.0 * x[1] - x[2]; },
        Placement::dual);
    auto blk = *op.find_block(row_from_label("g2s"), Slot::f3);
    Cochain y = op.apply_block(blk, w);
    CHECK(y.placement == Placement::dual);
    CHECK(y.cells() == cx.cell_count(1));
    // value on an edge's dual face: (difference of vertex densities) * (dual area / length)
    auto d0 = exterior_derivative(cx, 0);
    const double grad[3] = {1.0, 2.0, -1.0};
    for (index_t e = 0; e < cx.cell_count(1); ++e) {
      const CellRef c = cx.decode(1, e);
      int axis = 0;
      while (!((c.axes >> axis) & 1u)) ++axis;
      const double expect =
          grad[axis] * cx.spacing(axis) * cx.dual_measure(c.axes) / cx.cell_measure(c.axes);
      CHECK(y.at(e) == Catch::Approx(expect).margin(1e-12));
    }
  }
}

TEST_CASE("evaluate_residual basics") {
  auto cx = CubicalComplex::torus(3, {3, 3, 3}, {1, 1, 1});
  auto op = assemble_block_operator(cx, {});
  auto f = zero_field(cx, 1);
  auto g = zero_sources(cx, 1);

  SECTION("zero in, zero out") {
    auto res = op.evaluate_residual(f, g, zero_time(op, 1));
    CHECK(res.total_norm_max() == 0.0);
  }
  SECTION("constant 2-form lies in the kernel of d on a torus") {
    f[Slot::f2] = project_vector_proxy(cx, 2, [](const std::array<double, 3>&) {
      return std::array<double, 3>{0.8, -0.3, 1.1};
    });
    auto res = op.evaluate_residual(f, g, zero_time(op, 1));
    REQUIRE(res.primal[static_cast<size_t>(row_from_label("g3s"))].has_value());
    CHECK(res.row_norm_max(row_from_label("g3s")) == 0.0);
  }
  SECTION("exactness inheritance: b = d a makes the g3s row vanish identically") {
    std::mt19937 rng(11);
    Cochain a(cx, 1, 1);
    for (auto& v : a.values) v = static_cast<double>(static_cast<int>(rng() % 19) - 9);
    auto d1 = exterior_derivative(cx, 1);
    f[Slot::f2] = Cochain(cx, 2, 1);
    d1.apply(a.values.data(), f[Slot::f2].values.data());
    auto res = op.evaluate_residual(f, g, zero_time(op, 1));
    CHECK(res.row_norm_max(row_from_label("g3s")) == 0.0);  // integer-exact
  }
  SECTION("residual is homogeneous in the field") {
    std::mt19937 rng(13);
    for (int i = 0; i < kNumSlots; ++i)
      for (double& v : f.at(i).values) v = (static_cast<double>(rng()) / 4294967296.0 - 0.5);
    auto res1 = op.evaluate_residual(f, g, zero_time(op, 1));
    auto f2 = field_arithmetic(f, f, 2.0, 0.0);
    auto res2 = op.evaluate_residual(f2, g, zero_time(op, 1));
    for (int r = 0; r < kNumSlots; ++r)
      CHECK(res2.row_norm2(r) == Catch::Approx(2.0 * res1.row_norm2(r)).margin(1e-12));
  }
  SECTION("sources subtract") {
    g.at(2).at(0) = 1.5;
    auto res = op.evaluate_residual(f, g, zero_time(op, 1));
    CHECK(res.row_norm_max(2) == Catch::Approx(1.5));
  }
  SECTION("time blocks demand a derivative rule") {
    CHECK_THROWS_AS(op.evaluate_residual(f, g, TimeDerivative{}), std::invalid_argument);
  }
}

TEST_CASE("assembly validation") {
  auto cx = build_complex(3, {2, 2, 2}, {1, 1, 1});
  auto h2 = build_hodge(cx, 2, MaterialField::constant(MaterialKind::reluctivity, 1.0));
  // Hodge degree must match the slot's index set.
  CHECK_THROWS_AS(assemble_block_operator(cx, {{Slot::F1, &h2}}), std::invalid_argument);
  auto cx4 = build_complex(4, {2, 2, 2, 2}, {1, 1, 1, 1});
  CHECK_THROWS_AS(assemble_block_operator(cx4, {}), std::invalid_argument);
}
