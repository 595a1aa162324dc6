// Diagonal discrete Hodge operators with material weights, the double-Hodge
// sign rule, and the energy pairing. Constitutive material parameters live
// here and nowhere else; the exterior derivative stays metric-free.
//
// The vacuum weight of a p-cell is (measure of its staggered dual cell) /
// (measure of the cell). Full interior dual measures are used everywhere;
// boundary policy belongs to the stepper.
#pragma once

#include <cmath>

#include "gcl/cochain.hpp"

namespace gcl {

enum class MaterialKind : int {
  vacuum,
  permittivity,  // eps
  reluctivity,   // nu = 1/mu
  density,       // rho
  stiffness,     // isotropic Lame pair, vector-valued 1-cochains only
  quantum,       // hbar/2m
  custom
};

inline const char* material_name(MaterialKind k) {
  switch (k) {
    case MaterialKind::vacuum: return "vacuum";
    case MaterialKind::permittivity: return "eps";
    case MaterialKind::reluctivity: return "nu";
    case MaterialKind::density: return "rho";
    case MaterialKind::stiffness: return "C";
    case MaterialKind::quantum: return "hbar/2m";
    case MaterialKind::custom: return "custom";
  }
  return "?";
}

struct MaterialField {
  MaterialKind kind = MaterialKind::vacuum;
  double coefficient = 1.0;        // isotropic scalar, used when per_cell is empty
  std::vector<double> per_cell;    // optional per-p-cell coefficients
  double lame_lambda = 0.0;        // stiffness only
  double lame_mu = 0.0;

  static MaterialField constant(MaterialKind k, double c) {
    MaterialField m;
    m.kind = k;
    m.coefficient = c;
    return m;
  }
  static MaterialField lame(double lambda, double mu) {
    MaterialField m;
    m.kind = MaterialKind::stiffness;
    m.lame_lambda = lambda;
    m.lame_mu = mu;
    return m;
  }

  double value(index_t cell) const {
    return per_cell.empty() ? coefficient : per_cell[static_cast<size_t>(cell)];
  }
};

// (-1)^{p(n-p)+1} on the 4D Minkowski manifold, (-1)^{p(n-p)} in Euclidean 3D.
inline int double_hodge_sign(int n, int p) {
  require(n == 3 || n == 4, "double-Hodge sign defined for n = 3, 4");
  require(p >= 0 && p <= n, "degree out of range");
  const int e = p * (n - p) + (n == 4 ? 1 : 0);
  return (e % 2 == 0) ? 1 : -1;
}

class HodgeMap {
 public:
  HodgeMap() = default;

  // Diagonal Hodge on p-cells with an isotropic coefficient field.
  HodgeMap(const CubicalComplex& cx, int p, const MaterialField& mat)
      : cx_(&cx), degree_(p), kind_(mat.kind) {
    require(p >= 0 && p <= 3, "Hodge degree out of range");
    require(cx.dim() == 3, "discrete Hodge is built on 3D complexes");
    const index_t n = cx.cell_count(p);
    if (!mat.per_cell.empty())
      require(static_cast<index_t>(mat.per_cell.size()) == n,
              "material field must cover all p-cells");
    if (mat.kind == MaterialKind::stiffness) {
      require(p == 1, "stiffness Hodge acts on 1-cochains");
      require(mat.lame_mu > 0.0 && mat.lame_lambda + 2.0 * mat.lame_mu > 0.0,
              "Lame moduli must satisfy mu > 0 and lambda + 2 mu > 0");
      lame_lambda_ = mat.lame_lambda;
      lame_mu_ = mat.lame_mu;
      is_lame_ = true;
      build_lame_neighbors();
      // Diagonal weights still carry the geometric dual/primal ratio.
      weight_.resize(static_cast<size_t>(n));
      vacuum_.resize(static_cast<size_t>(n));
      for (index_t i = 0; i < n; ++i) {
        const CellRef c = cx.decode(p, i);
        vacuum_[static_cast<size_t>(i)] = cx.dual_measure(c.axes) / cx.cell_measure(c.axes);
        weight_[static_cast<size_t>(i)] = vacuum_[static_cast<size_t>(i)];
      }
      return;
    }
    weight_.resize(static_cast<size_t>(n));
    vacuum_.resize(static_cast<size_t>(n));
    for (index_t i = 0; i < n; ++i) {
      const double coeff = mat.value(i);
      require(coeff > 0.0, "material coefficient must be positive");
      const CellRef c = cx.decode(p, i);
      vacuum_[static_cast<size_t>(i)] = cx.dual_measure(c.axes) / cx.cell_measure(c.axes);
      weight_[static_cast<size_t>(i)] = coeff * vacuum_[static_cast<size_t>(i)];
    }
  }

  int degree() const { return degree_; }
  MaterialKind kind() const { return kind_; }
  bool is_lame() const { return is_lame_; }
  const std::vector<double>& weights() const { return weight_; }
  double weight(index_t i) const { return weight_[static_cast<size_t>(i)]; }
  double vacuum_weight(index_t i) const { return vacuum_[static_cast<size_t>(i)]; }

  // Diagonal pairing: a primal p-cochain maps to the dual (3-p)-cochain on the
  // same index set; a dual input maps back. With coefficient a and vacuum
  // ratio v, forward multiplies by a*v and backward by a/v, so star_a applied
  // twice gives a^2 (and the vacuum double application is the identity).
  Cochain apply(const Cochain& c, int threads = 1) const {
    require(c.index_degree() == degree_, "Hodge/cochain degree mismatch");
    if (is_lame_) {
      require(c.placement == Placement::primal && c.fiber == 3,
              "stiffness Hodge expects a primal vector-valued 1-cochain");
      Cochain out(*cx_, 2, 3, Placement::dual);
      apply_lame(c.values.data(), out.values.data(), threads);
      return out;
    }
    const bool forward = c.placement == Placement::primal;
    Cochain out(*cx_, cx_->dim() - c.degree, c.fiber,
                forward ? Placement::dual : Placement::primal);
    const int m = c.fiber;
    parallel_for(c.cells(), threads, [&](index_t i) {
      const size_t n = static_cast<size_t>(i);
      const double w = forward ? weight_[n] : weight_[n] / (vacuum_[n] * vacuum_[n]);
      for (int k = 0; k < m; ++k) out.at(i, k) = c.at(i, k) * w;
    });
    return out;
  }

  // Raw diagonal applications used by operator assembly (scalar materials).
  void mul(const double* x, double* y, int fiber, int threads = 1) const {
    parallel_for(static_cast<index_t>(weight_.size()), threads, [&](index_t i) {
      const double w = weight_[static_cast<size_t>(i)];
      for (int k = 0; k < fiber; ++k) y[i * fiber + k] = x[i * fiber + k] * w;
    });
  }
  void div(const double* x, double* y, int fiber, int threads = 1) const {
    parallel_for(static_cast<index_t>(weight_.size()), threads, [&](index_t i) {
      const double w = weight_[static_cast<size_t>(i)];
      for (int k = 0; k < fiber; ++k) y[i * fiber + k] = x[i * fiber + k] / w;
    });
  }
  // star_a on a dual-side cochain: coefficient times inverse vacuum ratio.
  void mul_dual(const double* x, double* y, int fiber, int threads = 1) const {
    parallel_for(static_cast<index_t>(weight_.size()), threads, [&](index_t i) {
      const size_t n = static_cast<size_t>(i);
      const double w = weight_[n] / (vacuum_[n] * vacuum_[n]);
      for (int k = 0; k < fiber; ++k) y[i * fiber + k] = x[i * fiber + k] * w;
    });
  }
  // Material coefficient alone (the vacuum ratios of star_out^-1 ∘ star_in cancel).
  void mul_coeff(const double* x, double* y, int fiber, int threads = 1) const {
    parallel_for(static_cast<index_t>(weight_.size()), threads, [&](index_t i) {
      const size_t n = static_cast<size_t>(i);
      const double w = weight_[n] / vacuum_[n];
      for (int k = 0; k < fiber; ++k) y[i * fiber + k] = x[i * fiber + k] * w;
    });
  }

  // Isotropic Lame map: strain cochain (vector-valued, edges) to stress fluxes
  // through the dual faces of the same edges. Cross-derivative components are
  // gathered from the four nearest parallel edges with weight 1/4 and zero
  // extension outside the grid, which keeps the operator symmetric.
  void apply_lame(const double* eps, double* sig, int threads = 1) const {
    const index_t n = cx_->cell_count(1);
    parallel_for(n, threads, [&](index_t e) {
      const size_t ne = static_cast<size_t>(e);
      const int j = edge_axis_[ne];
      const double hj = cx_->spacing(j);
      const double area = area_[ne];
      // Collocated gradient row g_{j,*}.
      double gj[3];
      for (int c = 0; c < 3; ++c) gj[c] = eps[e * 3 + c] / hj;
      // Averaged diagonal entries g_kk and cross entries g_{c,j} from
      // neighboring edges along the other two axes.
      double trace = gj[j];
      double gcj[3] = {0.0, 0.0, 0.0};
      for (int o = 0; o < 2; ++o) {
        const int k = other_axis_[ne][o];
        const double hk = cx_->spacing(k);
        double sum_kk = 0.0, sum_kj = 0.0;
        for (int q = 0; q < 4; ++q) {
          const index_t nb = neighbor_[(ne * 2 + o) * 4 + q];
          if (nb < 0) continue;
          sum_kk += eps[nb * 3 + k];
          sum_kj += eps[nb * 3 + j];
        }
        trace += 0.25 * sum_kk / hk;
        gcj[k] = 0.25 * sum_kj / hk;
      }
      for (int c = 0; c < 3; ++c) {
        const double sym = (c == j) ? 2.0 * gj[j] : (gj[c] + gcj[c]);
        const double s = (c == j ? lame_lambda_ * trace : 0.0) + lame_mu_ * sym;
        sig[e * 3 + c] = area * s;
      }
    });
  }

  double lame_lambda() const { return lame_lambda_; }
  double lame_mu() const { return lame_mu_; }

 private:
  void build_lame_neighbors() {
    const index_t n = cx_->cell_count(1);
    edge_axis_.resize(static_cast<size_t>(n));
    other_axis_.resize(static_cast<size_t>(n));
    area_.resize(static_cast<size_t>(n));
    neighbor_.assign(static_cast<size_t>(n) * 8, -1);
    for (index_t e = 0; e < n; ++e) {
      const CellRef c = cx_->decode(1, e);
      int j = 0;
      while (!((c.axes >> j) & 1u)) ++j;
      const size_t ne = static_cast<size_t>(e);
      edge_axis_[ne] = j;
      area_[ne] = cx_->dual_measure(c.axes);
      int o = 0;
      for (int k = 0; k < 3; ++k) {
        if (k == j) continue;
        other_axis_[ne][o] = k;
        int q = 0;
        for (int dj = 0; dj <= 1; ++dj) {
          for (int dk = -1; dk <= 0; ++dk) {
            CellRef nb;
            nb.axes = 1u << k;
            nb.pos = c.pos;
            nb.pos[j] += dj;  // node coordinate along the edge axis
            nb.pos[k] += dk;  // cell coordinate along the neighbor axis
            bool ok = true;
            if (cx_->periodic(j)) {
              if (nb.pos[j] >= cx_->axis_size(nb.axes, j)) nb.pos[j] = 0;
            } else if (nb.pos[j] > cx_->extent(j)) {
              ok = false;
            }
            if (cx_->periodic(k)) {
              if (nb.pos[k] < 0) nb.pos[k] = cx_->extent(k) - 1;
            } else if (nb.pos[k] < 0) {
              ok = false;
            }
            if (ok) neighbor_[(ne * 2 + o) * 4 + q] = cx_->cell_id(1, nb.axes, nb.pos);
            ++q;
          }
        }
        ++o;
      }
    }
  }

  const CubicalComplex* cx_ = nullptr;
  int degree_ = 0;
  MaterialKind kind_ = MaterialKind::vacuum;
  std::vector<double> weight_;
  std::vector<double> vacuum_;
  bool is_lame_ = false;
  double lame_lambda_ = 0.0, lame_mu_ = 0.0;
  std::vector<int> edge_axis_;
  std::vector<std::array<int, 2>> other_axis_;
  std::vector<double> area_;
  std::vector<index_t> neighbor_;
};

inline HodgeMap build_hodge(const CubicalComplex& cx, int p, const MaterialField& mat) {
  return HodgeMap(cx, p, mat);
}

inline Cochain apply_hodge(const HodgeMap& h, const Cochain& c) { return h.apply(c); }

// (1/2) sum over slots of <x, star x> with the fiber trace as the Euclidean
// dot product. Dual-placed slots pair through the inverse weight.
inline double energy(const GeneralField& f, const std::array<const HodgeMap*, kNumSlots>& hodges) {
  double total = 0.0;
  for (int i = 0; i < kNumSlots; ++i) {
    const Cochain& x = f.at(i);
    double nrm = 0.0;
    for (double v : x.values) nrm += std::fabs(v);
    if (nrm == 0.0) continue;
    const HodgeMap* h = hodges[static_cast<size_t>(i)];
    require(h != nullptr, std::string("missing Hodge for nonzero slot ") +
                              kSlotLabel[static_cast<size_t>(i)]);
    require(h->degree() == x.index_degree(), "Hodge degree does not match slot index set");
    if (h->is_lame()) {
      std::vector<double> sig(x.values.size());
      h->apply_lame(x.values.data(), sig.data());
      double acc = 0.0;
      for (size_t k = 0; k < sig.size(); ++k) acc += x.values[k] * sig[k];
      total += 0.5 * acc;
      continue;
    }
    double acc = 0.0;
    const int m = x.fiber;
    for (index_t c = 0; c < x.cells(); ++c) {
      const double v = h->vacuum_weight(c);
      const double w = (x.placement == Placement::primal) ? h->weight(c) : h->weight(c) / (v * v);
      double dot = 0.0;
      for (int k = 0; k < m; ++k) dot += x.at(c, k) * x.at(c, k);
      acc += dot * w;
    }
    total += 0.5 * acc;
  }
  return total;
}

}  // namespace gcl
