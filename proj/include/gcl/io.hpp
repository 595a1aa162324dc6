// File formats: diagnostics CSV, residual reports, cochain snapshots (CSV or
// flat binary), legacy-VTK structured-points field snapshots, per-cell
// material CSV, and the plain-text triplet dump of incidence operators.
// Numeric text output uses %.17g so equal doubles serialize identically.
#pragma once

#include <cstdio>
#include <cstring>
#include <fstream>
#include <filesystem>

#include "gcl/stepper.hpp"

namespace gcl {

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Diagnostics
// ---------------------------------------------------------------------------

inline void write_diagnostics_csv(const std::string& path, const RunResult& res) {
  std::ofstream out(path);
  require(out.good(), "cannot open " + path + " for writing");
  out << "step,time,energy,norm";
  for (const auto& c : res.probe_columns) out << "," << c;
  out << "\n";
  for (const DiagRow& r : res.rows) {
    out << r.step << "," << format_double(r.time) << "," << format_double(r.energy) << ","
        << format_double(r.norm);
    for (double v : r.probe_values) out << "," << format_double(v);
    out << "\n";
  }
  if (res.diverged) out << "DIVERGED," << res.diverged_step << ",,\n";
}

inline void write_run_summary(const std::string& path, const RunResult& res,
                              const SteppingPlan& plan) {
  std::ofstream out(path);
  require(out.good(), "cannot open " + path + " for writing");
  out << "steps = " << plan.steps << "\n";
  out << "dt = " << format_double(plan.dt) << "\n";
  out << "cfl_bound = " << format_double(plan.cfl) << "\n";
  out << "final_energy = " << format_double(res.final_energy) << "\n";
  out << "max_energy_drift = " << format_double(res.max_energy_drift) << "\n";
  out << "diverged = " << (res.diverged ? 1 : 0) << "\n";
  if (res.diverged) out << "diverged_step = " << res.diverged_step << "\n";
  out << "wall_seconds = " << format_double(res.wall_seconds) << "\n";
}

inline void write_residual_csv(const std::string& path, const Residual& res) {
  std::ofstream out(path);
  require(out.good(), "cannot open " + path + " for writing");
  out << "row,l2,max\n";
  for (int r = 0; r < kNumSlots; ++r)
    out << kRowLabel[static_cast<size_t>(r)] << "," << format_double(res.row_norm2(r)) << ","
        << format_double(res.row_norm_max(r)) << "\n";
}

// ---------------------------------------------------------------------------
// Cochain snapshots: "cell,c0[,c1,c2]" CSV with a descriptive header, or a
// flat little-endian binary with the same metadata.
// ---------------------------------------------------------------------------

inline void write_cochain_csv(const std::string& path, const Cochain& c) {
  std::ofstream out(path);
  require(out.good(), "cannot open " + path + " for writing");
  const CubicalComplex& cx = *c.cx;
  out << "# degree=" << c.degree
      << " placement=" << (c.placement == Placement::primal ? "primal" : "dual")
      << " fiber=" << c.fiber << " extents=";
  for (int a = 0; a < cx.dim(); ++a) out << (a ? " " : "") << cx.extent(a);
  out << " spacings=";
  for (int a = 0; a < cx.dim(); ++a) out << (a ? " " : "") << format_double(cx.spacing(a));
  out << "\n";
  for (index_t i = 0; i < c.cells(); ++i) {
    out << i;
    for (int k = 0; k < c.fiber; ++k) out << "," << format_double(c.at(i, k));
    out << "\n";
  }
}

inline void write_cochain_binary(const std::string& path, const Cochain& c) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), "cannot open " + path + " for writing");
  const char magic[4] = {'G', 'C', 'L', 'C'};
  out.write(magic, 4);
  auto put32 = [&](std::int32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
  put32(c.degree);
  put32(c.placement == Placement::primal ? 0 : 1);
  put32(c.fiber);
  put32(c.cx->dim());
  for (int a = 0; a < c.cx->dim(); ++a) put32(c.cx->extent(a));
  for (int a = 0; a < c.cx->dim(); ++a) {
    const double s = c.cx->spacing(a);
    out.write(reinterpret_cast<const char*>(&s), 8);
  }
  const std::int64_t n = static_cast<std::int64_t>(c.values.size());
  out.write(reinterpret_cast<const char*>(&n), 8);
  out.write(reinterpret_cast<const char*>(c.values.data()),
            static_cast<std::streamsize>(n * 8));
}

// Reads a binary snapshot back onto a compatible complex.
inline Cochain read_cochain_binary(const std::string& path, const CubicalComplex& cx) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  require(in.good() && std::memcmp(magic, "GCLC", 4) == 0, "not a cochain snapshot: " + path);
  auto get32 = [&]() {
    std::int32_t v;
    in.read(reinterpret_cast<char*>(&v), 4);
    return v;
  };
  const int degree = get32();
  const int placement = get32();
  const int fiber = get32();
  const int dim = get32();
  require(dim == cx.dim(), "snapshot dimension mismatch");
  for (int a = 0; a < dim; ++a) require(get32() == cx.extent(a), "snapshot extents mismatch");
  for (int a = 0; a < dim; ++a) {
    double s;
    in.read(reinterpret_cast<char*>(&s), 8);
    require(s == cx.spacing(a), "snapshot spacing mismatch");
  }
  std::int64_t n;
  in.read(reinterpret_cast<char*>(&n), 8);
  Cochain c(cx, degree, fiber, placement == 0 ? Placement::primal : Placement::dual);
  require(static_cast<std::int64_t>(c.values.size()) == n, "snapshot size mismatch");
  in.read(reinterpret_cast<char*>(c.values.data()), static_cast<std::streamsize>(n * 8));
  require(in.good(), "truncated snapshot: " + path);
  return c;
}

// ---------------------------------------------------------------------------
// Legacy-VTK structured points. One scalar or vector array per state slot;
// vertex-indexed data lands in POINT_DATA, everything else is averaged to
// cell centers as CELL_DATA. Values are converted back to the physics
// variable (slot scale removed, densities divided by measures).
// ---------------------------------------------------------------------------

namespace detail {

inline std::array<double, 3> cell_vector_from_edges(const CubicalComplex& cx, const Cochain& c,
                                                    const CellRef& cell, double measure_pow) {
  // average the 4 parallel edges of the cell per axis, scaled by 1/length (or
  // 1/dual-area for dual-placed data)
  std::array<double, 3> v{0, 0, 0};
  for (int a = 0; a < 3; ++a) {
    const unsigned axes = 1u << a;
    double acc = 0.0;
    int cnt = 0;
    for (int d1 = 0; d1 <= 1; ++d1)
      for (int d2 = 0; d2 <= 1; ++d2) {
        CellRef e;
        e.axes = axes;
        e.pos = cell.pos;
        int o = 0;
        for (int b = 0; b < 3; ++b) {
          if (b == a) continue;
          e.pos[b] += (o == 0 ? d1 : d2);
          ++o;
        }
        acc += c.at(cx.cell_id(1, axes, e.pos));
        ++cnt;
      }
    const double m = (measure_pow > 0) ? cx.cell_measure(axes) : cx.dual_measure(axes);
    v[a] = acc / (cnt * m);
  }
  return v;
}

inline std::array<double, 3> cell_vector_from_faces(const CubicalComplex& cx, const Cochain& c,
                                                    const CellRef& cell) {
  // average the opposing faces per axis; sorted 2-form basis maps back to the
  // proxy vector as (v_x, v_y, v_z) = (e_yz, -e_xz, e_xy)
  std::array<double, 3> flux{0, 0, 0};
  const unsigned masks[3] = {6u, 5u, 3u};  // yz, xz, xy
  const double sgn[3] = {1.0, -1.0, 1.0};
  for (int a = 0; a < 3; ++a) {
    const unsigned axes = masks[a];
    CellRef lo;
    lo.axes = axes;
    lo.pos = cell.pos;
    CellRef hi = lo;
    hi.pos[a] += 1;
    const double m = cx.cell_measure(axes);
    flux[a] = sgn[a] * 0.5 *
              (c.at(cx.cell_id(2, axes, lo.pos)) + c.at(cx.cell_id(2, axes, hi.pos))) / m;
  }
  return flux;
}

}  // namespace detail

inline void write_vtk_snapshot(const std::string& path, const Simulation& sim) {
  const CubicalComplex& cx = sim.complex();
  std::ofstream out(path);
  require(out.good(), "cannot open " + path + " for writing");
  const int nx = cx.extent(0), ny = cx.extent(1), nz = cx.extent(2);
  out << "# vtk DataFile Version 3.0\n";
  out << "gcl field snapshot step " << sim.step_index() << "\n";
  out << "ASCII\nDATASET STRUCTURED_POINTS\n";
  out << "DIMENSIONS " << nx + 1 << " " << ny + 1 << " " << nz + 1 << "\n";
  out << "ORIGIN 0 0 0\n";
  out << "SPACING " << format_double(cx.spacing(0)) << " " << format_double(cx.spacing(1)) << " "
      << format_double(cx.spacing(2)) << "\n";

  const ModelSpec& m = sim.model();
  // vertex-indexed slots first
  std::vector<Slot> point_slots, cell_slots;
  for (Slot s : m.state_slots)
    (sim.op().index_degree(s) == 0 ? point_slots : cell_slots).push_back(s);

  if (!point_slots.empty()) {
    out << "POINT_DATA " << cx.cell_count(0) << "\n";
    for (Slot s : point_slots) {
      const PhysVar* v = m.var_for(s);
      const Cochain& c = sim.field()[s];
      const bool vec = (m.fiber == 3);
      if (vec)
        out << "VECTORS " << v->name << " double\n";
      else
        out << "SCALARS " << v->name << " double 1\nLOOKUP_TABLE default\n";
      for (index_t i = 0; i < c.cells(); ++i) {
        double w = 1.0 / v->scale;
        if (c.placement == Placement::dual)  // stored as an integrated density
          w /= cx.dual_measure(cx.decode(0, i).axes);
        if (vec)
          out << format_double(c.at(i, 0) * w) << " " << format_double(c.at(i, 1) * w) << " "
              << format_double(c.at(i, 2) * w) << "\n";
        else
          out << format_double(c.at(i, 0) * w) << "\n";
      }
    }
  }
  if (!cell_slots.empty()) {
    out << "CELL_DATA " << cx.cell_count(3) << "\n";
    for (Slot s : cell_slots) {
      const PhysVar* v = m.var_for(s);
      const Cochain& c = sim.field()[s];
      const int ideg = sim.op().index_degree(s);
      const bool vector_like = (ideg == 1 || ideg == 2) && m.fiber == 1;
      if (m.fiber == 3 && ideg == 1) {
        // vector-valued 1-cochain: emit the fiber vector averaged over the
        // cell's edges of each axis, normalized by edge length
        out << "VECTORS " << v->name << " double\n";
        for (index_t cell = 0; cell < cx.cell_count(3); ++cell) {
          const CellRef cc = cx.decode(3, cell);
          std::array<double, 3> acc{0, 0, 0};
          int cnt = 0;
          for (int a = 0; a < 3; ++a) {
            const unsigned axes = 1u << a;
            for (int d1 = 0; d1 <= 1; ++d1)
              for (int d2 = 0; d2 <= 1; ++d2) {
                CellRef e;
                e.axes = axes;
                e.pos = cc.pos;
                int o = 0;
                for (int b = 0; b < 3; ++b) {
                  if (b == a) continue;
                  e.pos[b] += (o == 0 ? d1 : d2);
                  ++o;
                }
                const index_t eid = cx.cell_id(1, axes, e.pos);
                for (int k = 0; k < 3; ++k)
                  acc[k] += c.at(eid, k) / (cx.cell_measure(axes) * v->scale);
                ++cnt;
              }
          }
          out << format_double(acc[0] / cnt) << " " << format_double(acc[1] / cnt) << " "
              << format_double(acc[2] / cnt) << "\n";
        }
        continue;
      }
      if (vector_like) {
        out << "VECTORS " << v->name << " double\n";
        for (index_t cell = 0; cell < cx.cell_count(3); ++cell) {
          const CellRef cc = cx.decode(3, cell);
          std::array<double, 3> w =
              (ideg == 1) ? detail::cell_vector_from_edges(cx, c, cc,
                                                           c.placement == Placement::primal ? 1 : -1)
                          : detail::cell_vector_from_faces(cx, c, cc);
          out << format_double(w[0] / v->scale) << " " << format_double(w[1] / v->scale) << " "
              << format_double(w[2] / v->scale) << "\n";
        }
      } else {
        out << "SCALARS " << v->name << " double 1\nLOOKUP_TABLE default\n";
        for (index_t cell = 0; cell < cx.cell_count(3); ++cell) {
          const double density = c.at(cell, 0) / (cx.cell_measure(7u) * v->scale);
          out << format_double(density) << "\n";
        }
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Per-cell material CSV: "index,value" lines, one per p-cell in enumeration
// order; blank lines and '#' comments allowed.
// ---------------------------------------------------------------------------

inline std::vector<double> read_material_csv(const std::string& path, index_t expected_cells) {
  std::ifstream in(path);
  require(in.good(), "cannot open material file " + path);
  std::vector<double> vals(static_cast<size_t>(expected_cells),
                           std::numeric_limits<double>::quiet_NaN());
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    require(comma != std::string::npos, "material line is not 'index,value': " + line);
    const long long idx = std::stoll(line.substr(0, comma));
    require(idx >= 0 && idx < expected_cells, "material index out of range: " + line);
    vals[static_cast<size_t>(idx)] = std::stod(line.substr(comma + 1));
  }
  for (double v : vals) require(!std::isnan(v), "material file does not cover every cell");
  return vals;
}

// ---------------------------------------------------------------------------
// Incidence triplet dump: "row col value" per line.
// ---------------------------------------------------------------------------

inline void write_incidence_triplets(const std::string& path, const IncidenceOperator& d) {
  std::ofstream out(path);
  require(out.good(), "cannot open " + path + " for writing");
  for (index_t r = 0; r < d.rows(); ++r)
    for (int s = 0; s < d.row_width(); ++s)
      out << r << " " << d.col(r, s) << " " << static_cast<int>(d.sign(r, s)) << "\n";
}

}  // namespace gcl
