// Space/time split of 4D complexes (time = axis 0) and the integer oracle
// checking that the full 4D derivative equals its split form: on space-like
// rows the spatial derivative at a fixed time node, on time-like rows the
// time difference of the caps minus the spatial derivative of the time part.
#pragma once

#include <random>
#include <vector>

#include "gcl/complex.hpp"

namespace gcl {

struct SpacetimeSplit {
  // Per degree p: 1 = time-like (spans a time edge), 0 = space-like.
  std::array<std::vector<std::uint8_t>, kMaxDim + 1> timelike;
  std::array<index_t, kMaxDim + 1> timelike_count{};
  std::array<index_t, kMaxDim + 1> spacelike_count{};
};

inline SpacetimeSplit spacetime_split(const CubicalComplex& cx) {
  require(cx.dim() == 4, "spacetime split requires a 4D complex");
  SpacetimeSplit out;
  for (int p = 0; p <= 4; ++p) {
    const index_t n = cx.cell_count(p);
    out.timelike[p].assign(static_cast<size_t>(n), 0);
    for (index_t id = 0; id < n; ++id) {
      const bool t = (cx.decode(p, id).axes & 1u) != 0;
      out.timelike[p][static_cast<size_t>(id)] = t ? 1 : 0;
      (t ? out.timelike_count[p] : out.spacelike_count[p])++;
    }
  }
  return out;
}

// The 3D complex underlying the spatial slices of a 4D complex.
inline CubicalComplex spatial_complex(const CubicalComplex& cx4) {
  require(cx4.dim() == 4, "spatial slice requires a 4D complex");
  std::vector<int> ext;
  std::vector<double> sp;
  std::vector<bool> per;
  for (int a = 1; a < 4; ++a) {
    ext.push_back(cx4.extent(a));
    sp.push_back(cx4.spacing(a));
    per.push_back(cx4.periodic(a));
  }
  return CubicalComplex(3, ext, sp, per);
}

struct DecompositionReport {
  int trials = 0;
  std::array<long long, 4> max_discrepancy{};  // per source degree p = 0..3
  std::array<index_t, 4> rows_checked{};
  bool pass() const {
    for (long long d : max_discrepancy)
      if (d != 0) return false;
    return true;
  }
};

inline DecompositionReport verify_4d_decomposition(const CubicalComplex& cx4, int trials,
                                                   std::uint32_t seed) {
  require(cx4.dim() == 4, "decomposition oracle requires a 4D complex");
  const CubicalComplex cx3 = spatial_complex(cx4);
  const int nt_nodes = cx4.axis_size(0u, 0);
  const int nt_cells = cx4.extent(0);

  std::array<IncidenceOperator, 4> d4{IncidenceOperator(cx4, 0), IncidenceOperator(cx4, 1),
                                      IncidenceOperator(cx4, 2), IncidenceOperator(cx4, 3)};
  std::array<IncidenceOperator, 3> d3{IncidenceOperator(cx3, 0), IncidenceOperator(cx3, 1),
                                      IncidenceOperator(cx3, 2)};

  std::mt19937 rng(seed);
  DecompositionReport rep;
  rep.trials = trials;

  for (int trial = 0; trial < trials; ++trial) {
    for (int p = 0; p <= 3; ++p) {
      std::vector<long long> x(static_cast<size_t>(cx4.cell_count(p)));
      for (auto& v : x) v = static_cast<long long>(rng() % 19) - 9;
      std::vector<long long> y(static_cast<size_t>(cx4.cell_count(p + 1)));
      d4[p].apply_int(x.data(), y.data());

      // Gather per-time slices of the space-like and time-like components.
      std::vector<std::vector<long long>> xs(static_cast<size_t>(nt_nodes)),
          ds_xs(static_cast<size_t>(nt_nodes));
      for (int t = 0; t < nt_nodes; ++t) {
        xs[t].assign(static_cast<size_t>(cx3.cell_count(p)), 0);
        for (index_t id3 = 0; id3 < cx3.cell_count(p); ++id3) {
          CellRef c3 = cx3.decode(p, id3);
          std::array<int, kMaxDim> pos4{t, c3.pos[0], c3.pos[1], c3.pos[2]};
          xs[t][static_cast<size_t>(id3)] = x[static_cast<size_t>(cx4.cell_id(p, c3.axes << 1, pos4))];
        }
        if (p < 3) {
          ds_xs[t].assign(static_cast<size_t>(cx3.cell_count(p + 1)), 0);
          d3[p].apply_int(xs[t].data(), ds_xs[t].data());
        }
      }
      std::vector<std::vector<long long>> ds_xt(static_cast<size_t>(nt_cells));
      if (p >= 1) {
        for (int tau = 0; tau < nt_cells; ++tau) {
          std::vector<long long> xt(static_cast<size_t>(cx3.cell_count(p - 1)));
          for (index_t id3 = 0; id3 < cx3.cell_count(p - 1); ++id3) {
            CellRef c3 = cx3.decode(p - 1, id3);
            std::array<int, kMaxDim> pos4{tau, c3.pos[0], c3.pos[1], c3.pos[2]};
            xt[static_cast<size_t>(id3)] =
                x[static_cast<size_t>(cx4.cell_id(p, (c3.axes << 1) | 1u, pos4))];
          }
          ds_xt[tau].assign(static_cast<size_t>(cx3.cell_count(p)), 0);
          d3[p - 1].apply_int(xt.data(), ds_xt[tau].data());
        }
      }

      for (index_t r = 0; r < cx4.cell_count(p + 1); ++r) {
        const CellRef c = cx4.decode(p + 1, r);
        long long expect = 0;
        if ((c.axes & 1u) == 0) {
          // Space-like row: purely the 3D spatial derivative at this time node.
          std::array<int, kMaxDim> p3{c.pos[1], c.pos[2], c.pos[3], 0};
          expect = ds_xs[c.pos[0]][static_cast<size_t>(cx3.cell_id(p + 1, c.axes >> 1, p3))];
        } else {
          // Time-like row: cap difference minus spatial derivative of the time part.
          const int tau = c.pos[0];
          const int tcap = (tau + 1 == nt_nodes) ? 0 : tau + 1;  // wraps on a periodic time axis
          std::array<int, kMaxDim> p3{c.pos[1], c.pos[2], c.pos[3], 0};
          const index_t id3 = cx3.cell_id(p, c.axes >> 1, p3);
          expect = xs[tcap][static_cast<size_t>(id3)] - xs[tau][static_cast<size_t>(id3)];
          if (p >= 1) expect -= ds_xt[tau][static_cast<size_t>(id3)];
        }
        const long long diff = std::llabs(y[static_cast<size_t>(r)] - expect);
        rep.max_discrepancy[p] = std::max(rep.max_discrepancy[p], diff);
        ++rep.rows_checked[p];
      }
    }
  }
  return rep;
}

}  // namespace gcl
