// Axis-aligned cubical cell complexes (3D production, small 4D oracle) with
// canonical lexicographic cell enumeration and integer incidence operators.
//
// A p-cell is identified by the set of axes it spans (bitmask, ascending
// bitmask value = lexicographic subset order) and an integer position: cell
// index along spanned axes, node index along the rest. Axis 0 varies fastest
// in the linear enumeration. Orientation is the positive axis direction.
#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "gcl/core.hpp"
#include "gcl/parallel.hpp"

namespace gcl {

struct CellRef {
  unsigned axes = 0;                  // spanned-axis bitmask
  std::array<int, kMaxDim> pos{};     // per-axis position
};

class CubicalComplex {
 public:
  CubicalComplex(int dim, const std::vector<int>& extents, const std::vector<double>& spacings,
                 const std::vector<bool>& periodic_axes)
      : dim_(dim) {
    require(dim == 3 || dim == 4, "complex dimension must be 3 or 4");
    require(static_cast<int>(extents.size()) == dim, "extents must have one entry per axis");
    require(static_cast<int>(spacings.size()) == dim, "spacings must have one entry per axis");
    require(periodic_axes.empty() || static_cast<int>(periodic_axes.size()) == dim,
            "periodic flags must be empty or one per axis");
    for (int a = 0; a < dim; ++a) {
      require(extents[a] >= 1, "extents must be positive");
      require(spacings[a] > 0.0, "spacings must be positive");
      // 4D complexes exist only as the decomposition oracle; keep them tiny.
      if (dim == 4) require(extents[a] <= 4, "4D oracle complexes are capped at extent 4 per axis");
      extents_[a] = extents[a];
      spacing_[a] = spacings[a];
      periodic_[a] = periodic_axes.empty() ? false : static_cast<bool>(periodic_axes[a]);
    }
    enumerate();
    flag_boundaries();
  }

  static CubicalComplex box(int dim, const std::vector<int>& extents,
                            const std::vector<double>& spacings) {
    return CubicalComplex(dim, extents, spacings, {});
  }

  static CubicalComplex torus(int dim, const std::vector<int>& extents,
                              const std::vector<double>& spacings) {
    return CubicalComplex(dim, extents, spacings, std::vector<bool>(dim, true));
  }

  int dim() const { return dim_; }
  int extent(int axis) const { return extents_[axis]; }
  double spacing(int axis) const { return spacing_[axis]; }
  bool periodic(int axis) const { return periodic_[axis]; }
  bool any_periodic() const {
    for (int a = 0; a < dim_; ++a)
      if (periodic_[a]) return true;
    return false;
  }

  index_t cell_count(int p) const {
    require(p >= 0 && p <= dim_, "degree out of range");
    return counts_[p];
  }

  // Subset masks of cardinality p in canonical order.
  const std::vector<unsigned>& subsets(int p) const {
    require(p >= 0 && p <= dim_, "degree out of range");
    return subsets_[p];
  }

  // Number of positions along `axis` for cells spanning `axes`.
  int axis_size(unsigned axes, int axis) const {
    if (axes & (1u << axis)) return extents_[axis];
    return periodic_[axis] ? extents_[axis] : extents_[axis] + 1;
  }

  index_t cell_id(int p, unsigned axes, const std::array<int, kMaxDim>& pos) const {
    const int si = subset_index_[p][axes];
    index_t off = 0, stride = 1;
    for (int a = 0; a < dim_; ++a) {
      off += stride * pos[a];
      stride *= axis_size(axes, a);
    }
    return base_[p][si] + off;
  }

  CellRef decode(int p, index_t id) const {
    const auto& bases = base_[p];
    int si = static_cast<int>(subsets_[p].size()) - 1;
    while (si > 0 && id < bases[si]) --si;
    CellRef c;
    c.axes = subsets_[p][si];
    index_t rem = id - bases[si];
    for (int a = 0; a < dim_; ++a) {
      const int n = axis_size(c.axes, a);
      c.pos[a] = static_cast<int>(rem % n);
      rem /= n;
    }
    return c;
  }

  bool is_boundary(int p, index_t id) const { return boundary_[p][static_cast<size_t>(id)] != 0; }
  const std::vector<std::uint8_t>& boundary_flags(int p) const { return boundary_[p]; }

  // Measure of the primal cell: product of spanned spacings (1 for vertices).
  double cell_measure(unsigned axes) const {
    double m = 1.0;
    for (int a = 0; a < dim_; ++a)
      if (axes & (1u << a)) m *= spacing_[a];
    return m;
  }

  // Measure of the staggered dual cell: product of unspanned spacings.
  double dual_measure(unsigned axes) const {
    double m = 1.0;
    for (int a = 0; a < dim_; ++a)
      if (!(axes & (1u << a))) m *= spacing_[a];
    return m;
  }

  // Midpoint of the cell in physical coordinates.
  std::array<double, 3> midpoint(const CellRef& c) const {
    std::array<double, 3> x{0.0, 0.0, 0.0};
    for (int a = 0; a < dim_ && a < 3; ++a)
      x[a] = spacing_[a] * (c.pos[a] + ((c.axes >> a) & 1u ? 0.5 : 0.0));
    return x;
  }

  long long euler_characteristic() const {
    long long chi = 0;
    for (int p = 0; p <= dim_; ++p) chi += (p % 2 == 0 ? 1 : -1) * counts_[p];
    return chi;
  }

 private:
  void enumerate() {
    for (int p = 0; p <= dim_; ++p) {
      subsets_[p].clear();
      base_[p].clear();
      index_t total = 0;
      for (unsigned m = 0; m < (1u << dim_); ++m) {
        if (popcount4(m) != p) continue;
        subsets_[p].push_back(m);
        subset_index_[p][m] = static_cast<int>(subsets_[p].size()) - 1;
        base_[p].push_back(total);
        index_t block = 1;
        for (int a = 0; a < dim_; ++a) block *= axis_size(m, a);
        total += block;
      }
      counts_[p] = total;
    }
  }

  void flag_boundaries() {
    for (int p = 0; p <= dim_; ++p) {
      boundary_[p].assign(static_cast<size_t>(counts_[p]), 0);
      for (index_t id = 0; id < counts_[p]; ++id) {
        const CellRef c = decode(p, id);
        bool bnd = false;
        for (int a = 0; a < dim_; ++a) {
          if ((c.axes >> a) & 1u) continue;  // spanned axes have no node coordinate
          if (periodic_[a]) continue;
          if (c.pos[a] == 0 || c.pos[a] == extents_[a]) bnd = true;
        }
        boundary_[p][static_cast<size_t>(id)] = bnd ? 1 : 0;
      }
    }
  }

  int dim_;
  Extents extents_{};
  Spacing spacing_{};
  std::array<bool, kMaxDim> periodic_{};
  std::array<index_t, kMaxDim + 1> counts_{};
  std::array<std::vector<unsigned>, kMaxDim + 1> subsets_;
  std::array<std::array<int, 16>, kMaxDim + 1> subset_index_{};
  std::array<std::vector<index_t>, kMaxDim + 1> base_;
  std::array<std::vector<std::uint8_t>, kMaxDim + 1> boundary_;
};

// Signed incidence matrix taking p-cochains to (p+1)-cochains. Every row has
// exactly 2(p+1) entries with signs in {-1,+1}; composition with the next
// operator vanishes identically in integer arithmetic.
class IncidenceOperator {
 public:
  IncidenceOperator(const CubicalComplex& cx, int p) : degree_(p) {
    require(p >= 0 && p < cx.dim(), "exterior derivative degree out of range");
    rows_ = cx.cell_count(p + 1);
    cols_ = cx.cell_count(p);
    width_ = 2 * (p + 1);
    cols_idx_.resize(static_cast<size_t>(rows_) * width_);
    signs_.resize(static_cast<size_t>(rows_) * width_);
    for (index_t r = 0; r < rows_; ++r) {
      const CellRef c = cx.decode(p + 1, r);
      int slot = 0, j = 0;
      for (int a = 0; a < cx.dim(); ++a) {
        if (!((c.axes >> a) & 1u)) continue;
        const unsigned face_axes = c.axes & ~(1u << a);
        const int sign_high = (j % 2 == 0) ? 1 : -1;
        CellRef lo = c;
        lo.axes = face_axes;
        CellRef hi = lo;
        hi.pos[a] = lo.pos[a] + 1;
        if (cx.periodic(a) && hi.pos[a] == cx.axis_size(face_axes, a)) hi.pos[a] = 0;
        const size_t base = static_cast<size_t>(r) * width_;
        cols_idx_[base + slot] = cx.cell_id(p, face_axes, lo.pos);
        signs_[base + slot] = static_cast<std::int8_t>(-sign_high);
        ++slot;
        cols_idx_[base + slot] = cx.cell_id(p, face_axes, hi.pos);
        signs_[base + slot] = static_cast<std::int8_t>(sign_high);
        ++slot;
        ++j;
      }
    }
    build_transpose();
  }

  int degree() const { return degree_; }
  index_t rows() const { return rows_; }
  index_t cols() const { return cols_; }
  int row_width() const { return width_; }

  // y = D x on cochains with `fiber` interleaved components per cell.
  void apply(const double* x, double* y, int fiber = 1, int threads = 1) const {
    parallel_for(rows_, threads, [&](index_t r) {
      const size_t base = static_cast<size_t>(r) * width_;
      for (int k = 0; k < fiber; ++k) {
        double acc = 0.0;
        for (int s = 0; s < width_; ++s)
          acc += signs_[base + s] * x[cols_idx_[base + s] * fiber + k];
        y[r * fiber + k] = acc;
      }
    });
  }

  // y = D^T x (dual-complex derivative up to sign).
  void apply_transpose(const double* x, double* y, int fiber = 1, int threads = 1) const {
    parallel_for(cols_, threads, [&](index_t c) {
      const index_t lo = t_offset_[static_cast<size_t>(c)];
      const index_t hi = t_offset_[static_cast<size_t>(c) + 1];
      for (int k = 0; k < fiber; ++k) {
        double acc = 0.0;
        for (index_t s = lo; s < hi; ++s)
          acc += t_sign_[static_cast<size_t>(s)] * x[t_row_[static_cast<size_t>(s)] * fiber + k];
        y[c * fiber + k] = acc;
      }
    });
  }

  // y += alpha * D x
  void apply_accumulate(const double* x, double* y, double alpha, int fiber = 1,
                        int threads = 1) const {
    parallel_for(rows_, threads, [&](index_t r) {
      const size_t base = static_cast<size_t>(r) * width_;
      for (int k = 0; k < fiber; ++k) {
        double acc = 0.0;
        for (int s = 0; s < width_; ++s)
          acc += signs_[base + s] * x[cols_idx_[base + s] * fiber + k];
        y[r * fiber + k] += alpha * acc;
      }
    });
  }

  // y += alpha * D^T x
  void apply_transpose_accumulate(const double* x, double* y, double alpha, int fiber = 1,
                                  int threads = 1) const {
    parallel_for(cols_, threads, [&](index_t c) {
      const index_t lo = t_offset_[static_cast<size_t>(c)];
      const index_t hi = t_offset_[static_cast<size_t>(c) + 1];
      for (int k = 0; k < fiber; ++k) {
        double acc = 0.0;
        for (index_t s = lo; s < hi; ++s)
          acc += t_sign_[static_cast<size_t>(s)] * x[t_row_[static_cast<size_t>(s)] * fiber + k];
        y[c * fiber + k] += alpha * acc;
      }
    });
  }

  void apply_int(const long long* x, long long* y) const {
    for (index_t r = 0; r < rows_; ++r) {
      const size_t base = static_cast<size_t>(r) * width_;
      long long acc = 0;
      for (int s = 0; s < width_; ++s) acc += signs_[base + s] * x[cols_idx_[base + s]];
      y[r] = acc;
    }
  }

  index_t col(index_t r, int s) const { return cols_idx_[static_cast<size_t>(r) * width_ + s]; }
  int sign(index_t r, int s) const { return signs_[static_cast<size_t>(r) * width_ + s]; }

  // Max |entry| of the integer product D_next * this; zero iff d∘d = 0.
  static long long compose_max_abs(const IncidenceOperator& next, const IncidenceOperator& d) {
    require(next.degree_ == d.degree_ + 1, "operators are not consecutive degrees");
    long long worst = 0;
    std::vector<long long> acc(static_cast<size_t>(d.cols_), 0);
    std::vector<index_t> touched;
    for (index_t r = 0; r < next.rows_; ++r) {
      touched.clear();
      for (int s = 0; s < next.width_; ++s) {
        const index_t mid = next.col(r, s);
        const int sgn = next.sign(r, s);
        for (int t = 0; t < d.width_; ++t) {
          const index_t c = d.col(mid, t);
          if (acc[static_cast<size_t>(c)] == 0) touched.push_back(c);
          acc[static_cast<size_t>(c)] += sgn * d.sign(mid, t);
        }
      }
      for (index_t c : touched) {
        worst = std::max(worst, std::llabs(acc[static_cast<size_t>(c)]));
        acc[static_cast<size_t>(c)] = 0;
      }
    }
    return worst;
  }

 private:
  void build_transpose() {
    t_offset_.assign(static_cast<size_t>(cols_) + 1, 0);
    for (size_t i = 0; i < cols_idx_.size(); ++i) ++t_offset_[static_cast<size_t>(cols_idx_[i]) + 1];
    for (size_t c = 0; c < static_cast<size_t>(cols_); ++c) t_offset_[c + 1] += t_offset_[c];
    t_row_.resize(cols_idx_.size());
    t_sign_.resize(cols_idx_.size());
    std::vector<index_t> cursor(t_offset_.begin(), t_offset_.end() - 1);
    for (index_t r = 0; r < rows_; ++r) {
      const size_t base = static_cast<size_t>(r) * width_;
      for (int s = 0; s < width_; ++s) {
        const index_t c = cols_idx_[base + s];
        const index_t at = cursor[static_cast<size_t>(c)]++;
        t_row_[static_cast<size_t>(at)] = r;
        t_sign_[static_cast<size_t>(at)] = signs_[base + s];
      }
    }
  }

  int degree_;
  index_t rows_, cols_;
  int width_;
  std::vector<index_t> cols_idx_;
  std::vector<std::int8_t> signs_;
  std::vector<index_t> t_offset_, t_row_;
  std::vector<std::int8_t> t_sign_;
};

inline CubicalComplex build_complex(int dim, const std::vector<int>& extents,
                                    const std::vector<double>& spacings) {
  return CubicalComplex::box(dim, extents, spacings);
}

inline IncidenceOperator exterior_derivative(const CubicalComplex& cx, int p) {
  return IncidenceOperator(cx, p);
}

}  // namespace gcl
