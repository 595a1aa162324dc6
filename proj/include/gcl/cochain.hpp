// Discrete differential forms (cochains) with scalar or vector fiber, and the
// 8-slot general-field / source-field containers of the split conservation law.
//
// Values are stored per cell with interleaved fiber components. A dual-placed
// degree-p cochain lives on the staggered dual complex and is indexed by the
// primal (3-p)-cells it is in bijection with.
#pragma once

#include <cmath>
#include <cstring>
#include <functional>
#include <optional>
#include <span>

#include "gcl/complex.hpp"

namespace gcl {

enum class Placement : std::uint8_t { primal, dual };

struct Cochain {
  int degree = 0;
  Placement placement = Placement::primal;
  int fiber = 1;
  const CubicalComplex* cx = nullptr;
  std::vector<double> values;

  Cochain() = default;
  Cochain(const CubicalComplex& c, int p, int fiber_dim, Placement pl = Placement::primal)
      : degree(p), placement(pl), fiber(fiber_dim), cx(&c) {
    require(p >= 0 && p <= c.dim(), "cochain degree out of range");
    require(fiber_dim == 1 || fiber_dim == 3, "fiber dimension must be 1 or 3");
    values.assign(static_cast<size_t>(c.cell_count(index_degree())) * fiber_dim, 0.0);
  }

  // Degree of the primal cells indexing the value array.
  int index_degree() const { return placement == Placement::primal ? degree : cx->dim() - degree; }
  index_t cells() const { return cx->cell_count(index_degree()); }

  double& at(index_t cell, int k = 0) { return values[static_cast<size_t>(cell) * fiber + k]; }
  double at(index_t cell, int k = 0) const { return values[static_cast<size_t>(cell) * fiber + k]; }

  double norm2() const {
    double s = 0.0;
    for (double v : values) s += v * v;
    return std::sqrt(s);
  }
  double norm_max() const {
    double s = 0.0;
    for (double v : values) s = std::max(s, std::fabs(v));
    return s;
  }
  bool finite() const {
    for (double v : values)
      if (!std::isfinite(v)) return false;
    return true;
  }

  static bool compatible(const Cochain& a, const Cochain& b) {
    return a.cx == b.cx && a.degree == b.degree && a.placement == b.placement &&
           a.fiber == b.fiber;
  }
};

// y += alpha * x, with exact shape agreement.
inline void axpy(double alpha, const Cochain& x, Cochain& y) {
  require(Cochain::compatible(x, y), "cochain shape mismatch");
  for (size_t i = 0; i < y.values.size(); ++i) y.values[i] += alpha * x.values[i];
}

inline void scale(Cochain& x, double alpha) {
  for (double& v : x.values) v *= alpha;
}

// ---------------------------------------------------------------------------
// Slot layout of the split conservation law. Column order is pinned to the
// display order [f3s, F3s, f1s, F1s, f2s, F2s, f0, F0]; lowercase slots are
// space parts of space-time forms, uppercase slots the space parts of their
// time components. Source rows mirror the layout.
// ---------------------------------------------------------------------------

enum class Slot : int { f3 = 0, F3 = 1, f1 = 2, F1 = 3, f2 = 4, F2 = 5, f0 = 6, F0 = 7 };

constexpr int kNumSlots = 8;
constexpr std::array<int, kNumSlots> kSlotDegree{3, 3, 1, 1, 2, 2, 0, 0};
constexpr std::array<const char*, kNumSlots> kSlotLabel{"f3s", "F3s", "f1s", "F1s",
                                                        "f2s", "F2s", "f0",  "F0"};
constexpr std::array<const char*, kNumSlots> kRowLabel{"G3s", "g3s", "G1s", "g1s",
                                                       "G2s", "g2s", "G0",  "g0"};
constexpr std::array<int, kNumSlots> kRowDegree{3, 3, 1, 1, 2, 2, 0, 0};

inline int slot_index(Slot s) { return static_cast<int>(s); }
inline int slot_degree(Slot s) { return kSlotDegree[static_cast<size_t>(slot_index(s))]; }
inline const char* slot_label(Slot s) { return kSlotLabel[static_cast<size_t>(slot_index(s))]; }

inline Slot slot_from_label(const std::string& name) {
  for (int i = 0; i < kNumSlots; ++i)
    if (name == kSlotLabel[static_cast<size_t>(i)]) return static_cast<Slot>(i);
  throw std::invalid_argument("unknown slot label: " + name);
}
inline int row_from_label(const std::string& name) {
  for (int i = 0; i < kNumSlots; ++i)
    if (name == kRowLabel[static_cast<size_t>(i)]) return i;
  throw std::invalid_argument("unknown row label: " + name);
}

namespace detail {

struct SlotBundle {
  std::array<Cochain, kNumSlots> slots;
  const CubicalComplex* cx = nullptr;
  int fiber = 1;

  SlotBundle() = default;
  SlotBundle(const CubicalComplex& c, int fiber_dim,
             const std::array<Placement, kNumSlots>& placement)
      : cx(&c), fiber(fiber_dim) {
    for (int i = 0; i < kNumSlots; ++i)
      slots[static_cast<size_t>(i)] =
          Cochain(c, kSlotDegree[static_cast<size_t>(i)], fiber_dim, placement[static_cast<size_t>(i)]);
  }

  Cochain& operator[](Slot s) { return slots[static_cast<size_t>(slot_index(s))]; }
  const Cochain& operator[](Slot s) const { return slots[static_cast<size_t>(slot_index(s))]; }
  Cochain& at(int i) { return slots[static_cast<size_t>(i)]; }
  const Cochain& at(int i) const { return slots[static_cast<size_t>(i)]; }

  bool finite() const {
    for (const auto& s : slots)
      if (!s.finite()) return false;
    return true;
  }
};

inline void check_pair(const SlotBundle& a, const SlotBundle& b) {
  require(a.cx == b.cx, "fields live on different complexes");
  require(a.fiber == b.fiber, "fields have different fiber dimensions");
  for (int i = 0; i < kNumSlots; ++i)
    require(a.at(i).placement == b.at(i).placement, "fields have different slot placements");
}

}  // namespace detail

constexpr std::array<Placement, kNumSlots> kAllPrimal{
    Placement::primal, Placement::primal, Placement::primal, Placement::primal,
    Placement::primal, Placement::primal, Placement::primal, Placement::primal};

struct GeneralField : detail::SlotBundle {
  using detail::SlotBundle::SlotBundle;
};

struct SourceField : detail::SlotBundle {
  using detail::SlotBundle::SlotBundle;
};

inline GeneralField zero_field(const CubicalComplex& cx, int fiber_dim,
                               const std::array<Placement, kNumSlots>& placement = kAllPrimal) {
  require(fiber_dim == 1 || fiber_dim == 3, "fiber dimension must be 1 or 3");
  return GeneralField(cx, fiber_dim, placement);
}

inline SourceField zero_sources(const CubicalComplex& cx, int fiber_dim,
                                const std::array<Placement, kNumSlots>& placement = kAllPrimal) {
  require(fiber_dim == 1 || fiber_dim == 3, "fiber dimension must be 1 or 3");
  return SourceField(cx, fiber_dim, placement);
}

// out = alpha * a + beta * b, slot-wise. Plain loops; no reassociation claims.
template <class Bundle>
Bundle field_arithmetic(const Bundle& a, const Bundle& b, double alpha, double beta) {
  detail::check_pair(a, b);
  Bundle out = a;
  for (int i = 0; i < kNumSlots; ++i) {
    auto& o = out.at(i).values;
    const auto& av = a.at(i).values;
    const auto& bv = b.at(i).values;
    for (size_t j = 0; j < o.size(); ++j) o[j] = alpha * av[j] + beta * bv[j];
  }
  return out;
}

// ---------------------------------------------------------------------------
// de Rham projection: point samples for 0-forms, midpoint-rule integrals
// (component value at the cell midpoint times the cell measure) for p >= 1.
// Component order follows the canonical subset order of the complex; for
// degree 2 that is [xy, xz, yz] with e_xz = -v_y for a proxy vector field v.
// ---------------------------------------------------------------------------

// f(x, out): writes one value per (form component, fiber component), fiber fastest.
using FormFunction = std::function<void(const std::array<double, 3>&, double*)>;

inline Cochain project_function(const CubicalComplex& cx, int p, int fiber_dim,
                                const FormFunction& f, Placement pl = Placement::primal) {
  Cochain out(cx, p, fiber_dim, pl);
  const int idx_deg = out.index_degree();
  const auto& form_subsets = cx.subsets(p);
  const unsigned full = (1u << cx.dim()) - 1u;
  std::vector<double> buf(form_subsets.size() * static_cast<size_t>(fiber_dim));
  for (index_t id = 0; id < out.cells(); ++id) {
    const CellRef c = cx.decode(idx_deg, id);
    const auto x = cx.midpoint(c);
    f(x, buf.data());
    // Which form component this cell carries: its own axes when primal, the
    // complementary axes when dual.
    const unsigned comp_axes = (pl == Placement::primal) ? c.axes : (full & ~c.axes);
    int comp = 0;
    for (size_t s = 0; s < form_subsets.size(); ++s)
      if (form_subsets[s] == comp_axes) comp = static_cast<int>(s);
    const double measure =
        (pl == Placement::primal) ? cx.cell_measure(c.axes) : cx.dual_measure(c.axes);
    for (int k = 0; k < fiber_dim; ++k)
      out.at(id, k) = buf[static_cast<size_t>(comp) * fiber_dim + k] * (p == 0 ? 1.0 : measure);
  }
  return out;
}

// Scalar density helper for degrees 0 and 3.
inline Cochain project_scalar(const CubicalComplex& cx, int p,
                              const std::function<double(const std::array<double, 3>&)>& f,
                              Placement pl = Placement::primal) {
  return project_function(
      cx, p, 1, [&f](const std::array<double, 3>& x, double* out) { out[0] = f(x); }, pl);
}

// Proxy-vector helper for degrees 1 and 2 (scalar fiber).
inline Cochain project_vector_proxy(const CubicalComplex& cx, int p,
                                    const std::function<std::array<double, 3>(const std::array<double, 3>&)>& v,
                                    Placement pl = Placement::primal) {
  require(p == 1 || p == 2, "vector proxy exists for degrees 1 and 2");
  return project_function(
      cx, p, 1,
      [&v, p](const std::array<double, 3>& x, double* out) {
        const auto w = v(x);
        if (p == 1) {
          out[0] = w[0];
          out[1] = w[1];
          out[2] = w[2];
        } else {  // sorted 2-form basis: [xy, xz, yz] = [v_z, -v_y, v_x]
          out[0] = w[2];
          out[1] = -w[1];
          out[2] = w[0];
        }
      },
      pl);
}

}  // namespace gcl
