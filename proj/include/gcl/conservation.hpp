// The assembled general conservation law: an 8x8 grid of block descriptors
// over the split field slots. Spatial blocks are concrete sparse maps built
// from the incidence operators and Hodge weights; time-derivative blocks stay
// symbolic and are bound to a finite difference at evaluation time.
//
// Block kinds and the discrete realization on a degree-q column:
//   dt            : d/dt                         (degree q -> q, same placement)
//   ds            : exterior derivative          (q -> q+1); on dual-placed
//                   columns this is the dual-complex derivative (-1)^(q+1) D^T
//   star_ds_star  : star d star with the column's material Hodge inside;
//                   primal form: (-1)^q H_(q-1)^-1 D_(q-1)^T H_q  (q -> q-1)
//   star_dt_star  : star d/dt star; with static materials this reduces to the
//                   material coefficient times d/dt
// The sign column of the golden table is the displayed sign of the law; the
// (-1)^q factors above are part of the discrete operators themselves.
#pragma once

#include <map>
#include <optional>
#include <sstream>

#include "gcl/hodge.hpp"

namespace gcl {

enum class BlockKind : int { dt, ds, star_ds_star, star_dt_star };

inline const char* block_kind_name(BlockKind k) {
  switch (k) {
    case BlockKind::dt: return "dt";
    case BlockKind::ds: return "ds";
    case BlockKind::star_ds_star: return "star_ds_star";
    case BlockKind::star_dt_star: return "star_dt_star";
  }
  return "?";
}

inline BlockKind block_kind_from_name(const std::string& s) {
  if (s == "dt") return BlockKind::dt;
  if (s == "ds") return BlockKind::ds;
  if (s == "star_ds_star") return BlockKind::star_ds_star;
  if (s == "star_dt_star") return BlockKind::star_dt_star;
  throw std::invalid_argument("unknown block kind: " + s);
}

struct BlockSpec {
  int row = 0;  // 0..7 in source order [G3s g3s G1s g1s G2s g2s G0 g0]
  Slot col = Slot::f3;
  BlockKind kind = BlockKind::dt;
  int sign = 1;
};

// Versioned text asset pinning the sparsity/sign pattern of the law.
inline const char* golden_pattern_text() {
  return "# conservation-law block pattern v1\n"
         "# row col kind sign\n"
         "G3s f3s dt +\n"
         "G3s F2s ds -\n"
         "g3s F3s star_dt_star +\n"
         "g3s f2s ds +\n"
         "G1s f1s dt +\n"
         "G1s F2s star_ds_star +\n"
         "G1s F0 ds -\n"
         "g1s F1s star_dt_star +\n"
         "g1s f2s star_ds_star +\n"
         "g1s f0 ds +\n"
         "G2s F3s star_ds_star +\n"
         "G2s F1s ds -\n"
         "G2s f2s dt +\n"
         "g2s f3s star_ds_star +\n"
         "g2s f1s ds +\n"
         "g2s F2s star_dt_star -\n"
         "G0 F1s star_ds_star +\n"
         "G0 f0 dt +\n"
         "g0 f1s star_ds_star +\n"
         "g0 F0 star_dt_star -\n";
}

inline std::vector<BlockSpec> parse_pattern(const std::string& text) {
  std::vector<BlockSpec> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string row, col, kind, sign;
    ls >> row >> col >> kind >> sign;
    require(!sign.empty() && (sign == "+" || sign == "-"), "bad sign in pattern line: " + line);
    BlockSpec b;
    b.row = row_from_label(row);
    b.col = slot_from_label(col);
    b.kind = block_kind_from_name(kind);
    b.sign = (sign == "+") ? 1 : -1;
    out.push_back(b);
  }
  return out;
}

// Residual of the law: a source-shaped container of per-row cochains. Rows
// can receive primal- and dual-placed contributions; they are kept apart
// (they index different cell sets).
struct Residual {
  std::array<std::optional<Cochain>, kNumSlots> primal;
  std::array<std::optional<Cochain>, kNumSlots> dual;

  double row_norm2(int r) const {
    double s = 0.0;
    if (primal[static_cast<size_t>(r)]) {
      for (double v : primal[static_cast<size_t>(r)]->values) s += v * v;
    }
    if (dual[static_cast<size_t>(r)]) {
      for (double v : dual[static_cast<size_t>(r)]->values) s += v * v;
    }
    return std::sqrt(s);
  }
  double row_norm_max(int r) const {
    double s = 0.0;
    if (primal[static_cast<size_t>(r)]) s = primal[static_cast<size_t>(r)]->norm_max();
    if (dual[static_cast<size_t>(r)])
      s = std::max(s, dual[static_cast<size_t>(r)]->norm_max());
    return s;
  }
  double total_norm_max() const {
    double s = 0.0;
    for (int r = 0; r < kNumSlots; ++r) s = std::max(s, row_norm_max(r));
    return s;
  }
};

// Supplies the finite-difference time derivative of a slot's value; built by
// the stepper (or a test) from two time levels and dt. May encode a model's
// constraint-based rebinding of time terms.
using TimeDerivative = std::function<Cochain(Slot)>;

class BlockOperator {
 public:
  BlockOperator(const CubicalComplex& cx,
                const std::map<Slot, const HodgeMap*>& slot_hodges,
                const std::array<Placement, kNumSlots>& placement = kAllPrimal, int threads = 1)
      : cx_(&cx), placement_(placement), threads_(threads) {
    require(cx.dim() == 3, "the block operator is assembled on 3D complexes");
    for (int p = 0; p < 3; ++p) d_[p].emplace(cx, p);
    for (int p = 0; p <= 3; ++p)
      vacuum_[p] = HodgeMap(cx, p, MaterialField::constant(MaterialKind::vacuum, 1.0));
    for (auto& [slot, h] : slot_hodges) {
      require(h != nullptr, "null Hodge supplied for slot");
      const int idx_deg = index_degree(slot);
      require(h->degree() == idx_deg,
              std::string("Hodge degree does not match slot ") + slot_label(slot));
      slot_hodge_[static_cast<size_t>(slot_index(slot))] = h;
    }
    blocks_ = parse_pattern(golden_pattern_text());
    for (const BlockSpec& b : blocks_) {
      const int q = slot_degree(b.col);
      const int r = kRowDegree[static_cast<size_t>(b.row)];
      switch (b.kind) {
        case BlockKind::dt:
        case BlockKind::star_dt_star: require(r == q, "time block degree mismatch"); break;
        case BlockKind::ds: require(r == q + 1, "derivative block degree mismatch"); break;
        case BlockKind::star_ds_star: require(r == q - 1, "codifferential block degree mismatch"); break;
      }
    }
  }

  const CubicalComplex& complex() const { return *cx_; }
  const std::vector<BlockSpec>& blocks() const { return blocks_; }
  const IncidenceOperator& derivative(int p) const { return *d_[p]; }
  const HodgeMap& vacuum_hodge(int p) const { return vacuum_[p]; }
  const HodgeMap* slot_hodge(Slot s) const {
    return slot_hodge_[static_cast<size_t>(slot_index(s))];
  }
  Placement slot_placement(Slot s) const {
    return placement_[static_cast<size_t>(slot_index(s))];
  }
  int threads() const { return threads_; }
  void set_threads(int t) { threads_ = t; }

  int index_degree(Slot s) const {
    const int q = slot_degree(s);
    return slot_placement(s) == Placement::primal ? q : 3 - q;
  }

  std::optional<BlockSpec> find_block(int row, Slot col) const {
    for (const auto& b : blocks_)
      if (b.row == row && b.col == col) return b;
    return std::nullopt;
  }

  // Apply one block to the column slot's value x. Time blocks take the
  // supplied derivative instead of x.
  Cochain apply_block(const BlockSpec& b, const Cochain& x) const {
    const int q = slot_degree(b.col);
    require(x.degree == q, "cochain degree does not match block column");
    require(x.placement == slot_placement(b.col), "cochain placement does not match operator");
    const int m = x.fiber;
    const HodgeMap* hm = slot_hodge(b.col);

    if (b.kind == BlockKind::dt) {
      Cochain y = x;
      if (b.sign < 0) scale(y, -1.0);
      return y;
    }
    if (b.kind == BlockKind::star_dt_star) {
      // Outer vacuum-inverse and inner vacuum ratio cancel; what remains is
      // the material coefficient (static materials commute with d/dt).
      Cochain y(*cx_, q, m, x.placement);
      if (hm != nullptr)
        hm->mul_coeff(x.values.data(), y.values.data(), m, threads_);
      else
        y.values = x.values;
      if (b.sign < 0) scale(y, -1.0);
      return y;
    }
    if (b.kind == BlockKind::ds) {
      if (x.placement == Placement::primal) {
        Cochain y(*cx_, q + 1, m, Placement::primal);
        d_[q]->apply(x.values.data(), y.values.data(), m, threads_);
        if (b.sign < 0) scale(y, -1.0);
        return y;
      }
      // Dual-complex derivative: (-1)^(q+1) D^T_(2-q).
      Cochain y(*cx_, q + 1, m, Placement::dual);
      d_[2 - q]->apply_transpose(x.values.data(), y.values.data(), m, threads_);
      const int s = b.sign * (((q + 1) % 2 == 0) ? 1 : -1);
      if (s < 0) scale(y, -1.0);
      return y;
    }
    // star_ds_star
    if (x.placement == Placement::primal) {
      std::vector<double> starred(x.values.size());
      if (hm != nullptr && hm->is_lame())
        hm->apply_lame(x.values.data(), starred.data(), threads_);
      else if (hm != nullptr)
        hm->mul(x.values.data(), starred.data(), m, threads_);
      else
        vacuum_[q].mul(x.values.data(), starred.data(), m, threads_);
      Cochain y(*cx_, q - 1, m, Placement::primal);
      std::vector<double> tmp(y.values.size());
      d_[q - 1]->apply_transpose(starred.data(), tmp.data(), m, threads_);
      vacuum_[q - 1].div(tmp.data(), y.values.data(), m, threads_);
      const int s = b.sign * ((q % 2 == 0) ? 1 : -1);
      if (s < 0) scale(y, -1.0);
      return y;
    }
    // Dual column: star maps to the primal side, the genuine primal
    // derivative applies, and the outer vacuum star maps back to dual.
    const int r = 3 - q;  // primal index degree
    std::vector<double> starred(x.values.size());
    if (hm != nullptr)
      hm->mul_dual(x.values.data(), starred.data(), m, threads_);
    else
      vacuum_[r].div(x.values.data(), starred.data(), m, threads_);
    Cochain y(*cx_, q - 1, m, Placement::dual);
    std::vector<double> tmp(y.values.size());
    d_[r]->apply(starred.data(), tmp.data(), m, threads_);
    vacuum_[r + 1].mul(tmp.data(), y.values.data(), m, threads_);
    if (b.sign < 0) scale(y, -1.0);
    return y;
  }

  // Row-wise L*field - source with all eight rows evaluated. Blocks listed in
  // `masked` (model-neglected terms) are skipped. Contributions accumulate per
  // placement; the source is subtracted from its own placement part.
  Residual evaluate_residual(const GeneralField& field, const SourceField& source,
                             const TimeDerivative& dfdt,
                             const std::vector<std::pair<int, Slot>>& masked = {}) const {
    require(field.cx == cx_ && source.cx == cx_, "field/source live on a different complex");
    Residual res;
    auto is_masked = [&](int row, Slot col) {
      for (const auto& m : masked)
        if (m.first == row && m.second == col) return true;
      return false;
    };
    auto accumulate = [&](int row, Cochain&& y, double sgn) {
      auto& part = (y.placement == Placement::primal) ? res.primal[static_cast<size_t>(row)]
                                                      : res.dual[static_cast<size_t>(row)];
      if (!part) {
        part = std::move(y);
        if (sgn < 0) scale(*part, -1.0);
      } else {
        require(Cochain::compatible(*part, y), "residual row shape mismatch");
        axpy(sgn, y, *part);
      }
    };
    for (const BlockSpec& b : blocks_) {
      if (is_masked(b.row, b.col)) continue;
      const bool timeblock = (b.kind == BlockKind::dt || b.kind == BlockKind::star_dt_star);
      const Cochain* x = &field[b.col];
      Cochain dx;
      if (timeblock) {
        require(static_cast<bool>(dfdt), "time blocks require a time-derivative rule");
        dx = dfdt(b.col);
        x = &dx;
      }
      // Skip identically-zero unassigned columns cheaply but still evaluate
      // every row: zero contributions do not change the accumulated rows.
      accumulate(b.row, apply_block(b, *x), 1.0);
    }
    // Subtract sources; materialize rows that received no block contribution.
    for (int r = 0; r < kNumSlots; ++r) {
      const Cochain& g = source.at(r);
      auto& part = (g.placement == Placement::primal) ? res.primal[static_cast<size_t>(r)]
                                                      : res.dual[static_cast<size_t>(r)];
      if (!part) {
        part = g;
        scale(*part, -1.0);
      } else {
        axpy(-1.0, g, *part);
      }
    }
    return res;
  }

 private:
  const CubicalComplex* cx_;
  std::array<Placement, kNumSlots> placement_;
  std::array<std::optional<IncidenceOperator>, 3> d_;
  std::array<HodgeMap, 4> vacuum_;
  std::array<const HodgeMap*, kNumSlots> slot_hodge_{};
  std::vector<BlockSpec> blocks_;
  int threads_ = 1;
};

inline BlockOperator assemble_block_operator(const CubicalComplex& cx,
                                             const std::map<Slot, const HodgeMap*>& hodges,
                                             const std::array<Placement, kNumSlots>& placement =
                                                 kAllPrimal,
                                             int threads = 1) {
  return BlockOperator(cx, hodges, placement, threads);
}

// Compares an operator's assembled pattern against a (possibly tampered)
// fixture; returns human-readable mismatch descriptions, empty iff identical.
inline std::vector<std::string> check_pattern(const BlockOperator& op,
                                              const std::vector<BlockSpec>& fixture) {
  std::vector<std::string> bad;
  const auto& blocks = op.blocks();
  auto describe = [](const BlockSpec& b) {
    std::ostringstream os;
    os << "(row " << kRowLabel[static_cast<size_t>(b.row)] << ", col " << slot_label(b.col) << ")";
    return os.str();
  };
  for (const BlockSpec& f : fixture) {
    bool found = false;
    for (const BlockSpec& b : blocks) {
      if (b.row == f.row && b.col == f.col) {
        found = true;
        if (b.kind != f.kind)
          bad.push_back("kind mismatch at " + describe(f) + ": assembled " +
                        block_kind_name(b.kind) + ", expected " + block_kind_name(f.kind));
        if (b.sign != f.sign) bad.push_back("sign mismatch at " + describe(f));
        break;
      }
    }
    if (!found) bad.push_back("missing block at " + describe(f));
  }
  for (const BlockSpec& b : blocks) {
    bool found = false;
    for (const BlockSpec& f : fixture)
      if (b.row == f.row && b.col == f.col) found = true;
    if (!found) bad.push_back("unexpected block at " + describe(b));
  }
  return bad;
}

}  // namespace gcl
