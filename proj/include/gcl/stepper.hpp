// Explicit staggered leapfrog over the assembled conservation law. Each model
// declares which rows advance which slots; the stepper solves those rows for
// the time term and leaves the metric-free rows exact by construction. Only
// the Hodge weights are approximate.
//
// Time staggering: targets of the first update rule live at half-integer
// levels, targets of the second at integer levels. A cycle advances the
// half-level slot from t - dt/2 to t + dt/2 using the integer-level state at
// t, then the integer-level slot to t + dt. Initial data is therefore sampled
// at t = -dt/2 for half-level slots and t = 0 for the rest.
#pragma once

#include <chrono>
#include <random>
#include <cstdio>

#include "gcl/models.hpp"

namespace gcl {

struct SteppingPlan {
  double dt = 0.0;
  long long steps = 0;
  double cfl = 0.0;  // bound the dt was derived from
  std::vector<UpdateRule> updates;
};

// Largest stable explicit step. Wave models use the standard staggered-grid
// bound dt = 1/(c_max sqrt(sum 1/dx_i^2)); the split Schrodinger leapfrog uses
// dt = alpha / (hbar/2m * sum 4/dx_i^2 + V_max/hbar) with alpha = 0.9.
inline double cfl_bound(const ModelSpec& m, const CubicalComplex& cx) {
  if (m.cfl == CflKind::wave) {
    double s = 0.0;
    for (int a = 0; a < cx.dim(); ++a) s += 1.0 / (cx.spacing(a) * cx.spacing(a));
    return 1.0 / (m.max_wave_speed * std::sqrt(s));
  }
  double lap = 0.0;
  for (int a = 0; a < cx.dim(); ++a) lap += 4.0 / (cx.spacing(a) * cx.spacing(a));
  double vmax = 0.0;
  if (m.potential) {
    for (index_t v = 0; v < cx.cell_count(0); ++v) {
      CellRef c = cx.decode(0, v);
      vmax = std::max(vmax, std::fabs(m.potential(cx.midpoint(c))));
    }
  }
  constexpr double alpha = 0.9;
  return alpha / (m.hbar / (2.0 * m.mass) * lap + vmax / m.hbar);
}

inline SteppingPlan plan_stepping(const ModelSpec& m, const CubicalComplex& cx, double dt,
                                  long long steps) {
  require(dt != 0.0, "time step must be nonzero");
  require(steps >= 0, "step count must be nonnegative");
  SteppingPlan p;
  p.dt = dt;
  p.steps = steps;
  p.cfl = cfl_bound(m, cx);
  p.updates = m.updates;
  return p;
}

class Simulation {
 public:
  Simulation(ModelSpec spec, const CubicalComplex& cx, int threads = 1)
      : spec_(std::move(spec)),
        cx_(&cx),
        threads_(threads),
        op_(make_operator(spec_, cx, hodges_, threads)),
        cur_(cx, spec_.fiber, spec_.placement),
        prev_(cx, spec_.fiber, spec_.placement) {
    if (spec_.potential) {
      vh_.resize(static_cast<size_t>(cx.cell_count(0)));
      for (index_t v = 0; v < cx.cell_count(0); ++v)
        vh_[static_cast<size_t>(v)] =
            -spec_.potential(cx.midpoint(cx.decode(0, v))) / spec_.hbar;
    }
    for (Slot s : spec_.clamp_slots) {
      const int deg = op_.index_degree(s);
      clamp_[s] = cx.boundary_flags(deg);
    }
    compile_updates();
  }

  const ModelSpec& model() const { return spec_; }
  const CubicalComplex& complex() const { return *cx_; }
  const BlockOperator& op() const { return op_; }
  GeneralField& field() { return cur_; }
  const GeneralField& field() const { return cur_; }
  const GeneralField& prev_field() const { return prev_; }
  long long step_index() const { return step_; }
  double time() const { return t_; }
  int threads() const { return threads_; }

  const HodgeMap* pairing_hodge(Slot s) const {
    if (const HodgeMap* h = op_.slot_hodge(s)) return h;
    return &op_.vacuum_hodge(op_.index_degree(s));
  }

  // Set a physics variable from analytic data; the slot scale is folded in.
  // `f` writes one value per (form component, fiber component) at a point.
  void set_var(const std::string& name, const FormFunction& f) {
    const PhysVar* v = nullptr;
    for (const auto& pv : spec_.vars)
      if (pv.name == name) v = &pv;
    require(v != nullptr, "model has no variable named " + name);
    Cochain c = project_function(*cx_, slot_degree(v->slot), spec_.fiber, f,
                                 op_.slot_placement(v->slot));
    scale(c, v->scale);
    cur_[v->slot] = std::move(c);
    apply_clamp(v->slot, cur_);
    prev_[v->slot] = cur_[v->slot];
  }

  void set_var_scalar(const std::string& name, const ScalarFn& f) {
    set_var(name, [&f](const std::array<double, 3>& x, double* out) { out[0] = f(x); });
  }

  void set_var_vector(const std::string& name, const VectorFn& f) {
    const PhysVar* v = nullptr;
    for (const auto& pv : spec_.vars)
      if (pv.name == name) v = &pv;
    require(v != nullptr, "model has no variable named " + name);
    const int p = slot_degree(v->slot);
    if (spec_.fiber == 3 && p == 0) {
      set_var(name, [&f](const std::array<double, 3>& x, double* out) {
        auto w = f(x);
        out[0] = w[0];
        out[1] = w[1];
        out[2] = w[2];
      });
      return;
    }
    require(p == 1 || p == 2, "vector initialization needs a proxy degree of 1 or 2");
    set_var(name, [&f, p](const std::array<double, 3>& x, double* out) {
      auto w = f(x);
      if (p == 1) {
        out[0] = w[0];
        out[1] = w[1];
        out[2] = w[2];
      } else {
        out[0] = w[2];
        out[1] = -w[1];
        out[2] = w[0];
      }
    });
  }

  // Seeded uniform perturbation of the evolved state (test fixtures, e.g.
  // exciting every mode for stability probes). Clamps are re-applied.
  void perturb_state(double amplitude, unsigned seed) {
    std::mt19937 rng(seed);
    for (Slot s : spec_.state_slots) {
      Cochain& c = cur_[s];
      for (double& v : c.values)
        v += amplitude * (static_cast<double>(rng()) / 4294967296.0 * 2.0 - 1.0);
      apply_clamp(s, cur_);
      prev_[s] = c;
    }
  }

  // One full leapfrog cycle (all update rules in order). dt < 0 runs the
  // reversed cycle, which is the exact inverse of the forward map.
  void step(double dt) {
    if (dt >= 0.0) {
      for (size_t i = 0; i < rules_.size(); ++i) advance(rules_[i], dt);
      t_ += dt;
    } else {
      for (size_t i = rules_.size(); i-- > 0;) advance(rules_[i], dt);
      t_ += dt;
    }
    ++step_;
    if (step_ % divergence_check_every_ == 0 && !cur_.finite()) throw DivergedError(step_);
  }

  void check_finite() const {
    if (!cur_.finite()) throw DivergedError(step_);
  }

  // Exactly conserved staggered invariant: half-level slots pair with
  // themselves, integer-level slots pair across the step.
  double invariant() const {
    double total = 0.0;
    for (size_t i = 0; i < rules_.size(); ++i) {
      const Slot s = rules_[i].rule.target;
      const bool half = (i == 0);
      total += 0.5 * pair_dot(s, half ? cur_[s] : prev_[s], cur_[s]);
    }
    return total;
  }

  // Instantaneous Hodge-weighted norm of the state.
  double state_norm() const {
    double total = 0.0;
    for (Slot s : spec_.state_slots) total += pair_dot(s, cur_[s], cur_[s]);
    return std::sqrt(std::max(0.0, total));
  }

  // Residual view: integer-level slots at the previous level, half-level
  // slots current, derived slots rematerialized. The time closure implements
  // any constraint-based rebinding declared by the model's update rules.
  GeneralField residual_view() const {
    GeneralField view = cur_;
    for (size_t i = 0; i < rules_.size(); ++i)
      if (i != 0) view[rules_[i].rule.target] = prev_[rules_[i].rule.target];
    materialize_derived(view);
    return view;
  }

  TimeDerivative residual_time_rule(double dt) const {
    return [this, dt](Slot s) -> Cochain {
      for (const auto& cr : rules_) {
        if (cr.time_slot != s) continue;
        const Slot series = cr.rule.target;
        Cochain d = cur_[series];
        axpy(-1.0, prev_[series], d);
        scale(d, 1.0 / dt);
        if (cr.time_slot == series) return d;
        // Constraint rebinding: d/dt of the block's slot expressed through
        // the evolving series.
        Cochain out(*cx_, slot_degree(s), spec_.fiber, op_.slot_placement(s));
        const int m = spec_.fiber;
        for (index_t c = 0; c < out.cells(); ++c)
          for (int k = 0; k < m; ++k) out.at(c, k) = cr.rebind[static_cast<size_t>(c)] * d.at(c, k);
        return out;
      }
      // Slots without an update rule have no time variation in this scheme.
      return Cochain(*cx_, slot_degree(s), spec_.fiber, op_.slot_placement(s));
    };
  }

  SourceField residual_sources(double t) const {
    GeneralField view = residual_view();
    return materialize_sources(view, t);
  }

  Residual residual(double dt, double t) const {
    GeneralField view = residual_view();
    SourceField src = materialize_sources(view, t);
    return op_.evaluate_residual(view, src, residual_time_rule(dt), spec_.masked_blocks);
  }

  // One source row for a state view (state couplings and external terms);
  // model sign conventions and any star_s application are absorbed here.
  Cochain materialize_source_row(int row, const GeneralField& view, double t) const {
    const int deg = kRowDegree[static_cast<size_t>(row)];
    const Placement pl = spec_.placement[static_cast<size_t>(row)];
    for (const auto& ps : potential_sources_) {
      if (ps.first != row) continue;
      const Cochain& from = view[ps.second];
      Cochain g(*cx_, deg, spec_.fiber, pl);
      const int m = spec_.fiber;
      for (index_t c = 0; c < from.cells(); ++c)
        for (int k = 0; k < m; ++k) g.at(c, k) = vh_[static_cast<size_t>(c)] * from.at(c, k);
      return g;
    }
    for (const auto& ms : mirror_sources_) {
      if (ms.row != row) continue;
      Cochain g = view[ms.slot];
      scale(g, ms.scale);
      return g;
    }
    double sv_sign = 1.0;
    for (const SourceVar& sv : spec_.source_vars)
      if (sv.row == row) sv_sign = sv.sign;
    if (auto it = spec_.scalar_sources.find(row); it != spec_.scalar_sources.end()) {
      require(deg == 0 || deg == 3, "scalar source bound to a vector-degree row");
      const auto& fn = it->second;
      Cochain g = project_scalar(
          *cx_, deg, [&](const std::array<double, 3>& x) { return fn(x, t); }, pl);
      scale(g, sv_sign);
      return g;
    }
    if (auto it = spec_.vector_sources.find(row); it != spec_.vector_sources.end()) {
      const auto& fn = it->second;
      Cochain g;
      if (spec_.fiber == 3) {
        g = project_function(
            *cx_, deg, 3,
            [&](const std::array<double, 3>& x, double* out) {
              auto w = fn(x, t);
              out[0] = w[0];
              out[1] = w[1];
              out[2] = w[2];
            },
            pl);
      } else {
        require(deg == 1 || deg == 2, "vector source bound to a scalar-degree row");
        g = project_vector_proxy(
            *cx_, deg, [&](const std::array<double, 3>& x) { return fn(x, t); }, pl);
      }
      scale(g, sv_sign);
      return g;
    }
    return Cochain(*cx_, deg, spec_.fiber, pl);
  }

  SourceField materialize_sources(const GeneralField& view, double t) const {
    SourceField src(*cx_, spec_.fiber, spec_.placement);
    for (int r = 0; r < kNumSlots; ++r) src.at(r) = materialize_source_row(r, view, t);
    return src;
  }

  void materialize_derived(GeneralField& f) const {
    for (const auto& dr : derived_rules_) {
      BlockSpec b;
      b.row = 0;
      b.col = dr.from;
      b.kind = dr.kind;
      b.sign = 1;
      Cochain y = op_.apply_block(b, f[dr.from]);
      scale(y, dr.scale);
      f[dr.target] = std::move(y);
    }
  }

 private:
  // A spatial block lowered to flat passes: x -> inner weights -> D or D^T ->
  // per-output scale, accumulated into the rule's right-hand side.
  struct CompiledBlock {
    Slot col = Slot::f0;
    const IncidenceOperator* dop = nullptr;
    bool transpose = false;
    double alpha = 1.0;                // direct accumulate factor (ds blocks)
    const std::vector<double>* inner = nullptr;  // weights before D (K blocks)
    std::vector<double> inner_owned;             // owned variant (dual K)
    std::vector<double> outer;                   // per-output scale, alpha folded in
    const HodgeMap* lame = nullptr;
  };
  struct CompiledRule {
    UpdateRule rule;
    Slot time_slot = Slot::f0;            // column carrying the row's time block
    std::vector<double> inv_coeff;        // d(target)/dt = inv_coeff ⊙ rhs
    std::vector<double> rebind;           // d(time_slot)/dt = rebind ⊙ d(target)/dt
    std::vector<CompiledBlock> spatial;   // unmasked non-time blocks on live slots
    std::vector<double> rhs;              // scratch, row index cells x fiber
    bool has_source = false;
    int source_row = -1;
  };
  struct DerivedRule {
    Slot target, from;
    BlockKind kind;
    double scale;
  };

  static BlockOperator make_operator(const ModelSpec& spec, const CubicalComplex& cx,
                                     std::map<Slot, HodgeMap>& hodges, int threads) {
    std::map<Slot, const HodgeMap*> ptrs;
    for (const auto& [slot, mat] : spec.materials) {
      const int q = slot_degree(slot);
      const int idx =
          spec.placement[static_cast<size_t>(slot_index(slot))] == Placement::primal ? q : 3 - q;
      hodges.emplace(slot, HodgeMap(cx, idx, mat));
      ptrs[slot] = &hodges.at(slot);
    }
    return BlockOperator(cx, ptrs, spec.placement, threads);
  }

  void compile_updates() {
    // Schrodinger-style state couplings derive from the model tables.
    if (spec_.potential) {
      for (const SourceVar& sv : spec_.source_vars) {
        // Potential terms couple a row to the slot holding the same component.
        if (sv.name == "V phi_R") potential_sources_.push_back({sv.row, Slot::F0});
        if (sv.name == "V phi_I") potential_sources_.push_back({sv.row, Slot::f3});
      }
    }
    for (Slot d : spec_.derived_slots) {
      if (d == Slot::f1)
        derived_rules_.push_back(
            {Slot::f1, Slot::F0, BlockKind::ds, -spec_.hbar / (2.0 * spec_.mass)});
      if (d == Slot::F2)
        derived_rules_.push_back(
            {Slot::F2, Slot::f3, BlockKind::star_ds_star, spec_.hbar / (2.0 * spec_.mass)});
    }
    for (Slot d : spec_.derived_slots) {
      const PhysVar* v = spec_.var_for(d);
      for (const SourceVar& sv : spec_.source_vars)
        if (v != nullptr && sv.name == v->name) mirror_sources_.push_back({sv.row, d, 1.0 / v->scale});
    }

    for (const UpdateRule& r : spec_.updates) {
      CompiledRule cr;
      cr.rule = r;
      const index_t n = cur_[r.target].cells();
      cr.inv_coeff.resize(static_cast<size_t>(n));
      const HodgeMap& vac0 = op_.vacuum_hodge(0);
      for (index_t i = 0; i < n; ++i) {
        double c = r.sign;
        switch (r.coeff) {
          case CoeffKind::unit: break;
          case CoeffKind::material: {
            const HodgeMap* h = op_.slot_hodge(r.target);
            require(h != nullptr && !h->is_lame(), "material update coefficient needs a scalar Hodge");
            c *= h->weight(i) / h->vacuum_weight(i);
            break;
          }
          case CoeffKind::dual_volume: c *= vac0.weight(i); break;
          case CoeffKind::inv_dual_volume: c /= vac0.weight(i); break;
        }
        cr.inv_coeff[static_cast<size_t>(i)] = 1.0 / c;
      }
      bool time_found = false;
      for (const BlockSpec& b : op_.blocks()) {
        if (b.row != r.row) continue;
        if (is_masked(r.row, b.col)) continue;
        const bool timeblock = (b.kind == BlockKind::dt || b.kind == BlockKind::star_dt_star);
        if (timeblock) {
          require(!time_found, "update row has more than one live time block");
          time_found = true;
          cr.time_slot = b.col;
          if (b.col != r.target) {
            // d(time_slot)/dt = rebind ⊙ d(target)/dt, fixed by equating the
            // block's time term with the rule's declared coefficient.
            cr.rebind.resize(static_cast<size_t>(n));
            const HodgeMap* h = op_.slot_hodge(b.col);
            for (index_t i = 0; i < n; ++i) {
              double block_coeff =
                  b.sign * (h != nullptr ? h->weight(i) / h->vacuum_weight(i) : 1.0);
              cr.rebind[static_cast<size_t>(i)] =
                  (1.0 / cr.inv_coeff[static_cast<size_t>(i)]) / block_coeff;
            }
          }
          continue;
        }
        if (live_slot(b.col)) cr.spatial.push_back(compile_block(b));
      }
      require(time_found, "update row has no time block");
      cr.source_row = r.row;
      cr.rhs.assign(static_cast<size_t>(cur_[cr.rule.target].cells()) * spec_.fiber, 0.0);
      cr.has_source = source_bound(r.row);
      rules_.push_back(std::move(cr));
    }
    index_t scratch = 0;
    for (int p = 0; p <= 3; ++p) scratch = std::max(scratch, cx_->cell_count(p));
    scratch_a_.resize(static_cast<size_t>(scratch) * spec_.fiber);
    scratch_b_.resize(static_cast<size_t>(scratch) * spec_.fiber);
  }

  bool source_bound(int row) const {
    for (const auto& ps : potential_sources_)
      if (ps.first == row) return true;
    for (const auto& ms : mirror_sources_)
      if (ms.row == row) return true;
    return spec_.scalar_sources.count(row) > 0 || spec_.vector_sources.count(row) > 0;
  }

  // Lower a spatial block into flat array passes. The accumulate factor
  // carries the displayed sign, the discrete (-1)^q factors, and the minus of
  // "rhs = source - blocks".
  CompiledBlock compile_block(const BlockSpec& b) {
    CompiledBlock cb;
    cb.col = b.col;
    const int q = slot_degree(b.col);
    const double into_rhs = -static_cast<double>(b.sign);
    const HodgeMap* hm = op_.slot_hodge(b.col);
    if (b.kind == BlockKind::ds) {
      if (op_.slot_placement(b.col) == Placement::primal) {
        cb.dop = &op_.derivative(q);
        cb.transpose = false;
        cb.alpha = into_rhs;
      } else {
        cb.dop = &op_.derivative(2 - q);
        cb.transpose = true;
        cb.alpha = into_rhs * (((q + 1) % 2 == 0) ? 1.0 : -1.0);
      }
      return cb;
    }
    require(b.kind == BlockKind::star_ds_star, "unexpected block kind in update row");
    if (op_.slot_placement(b.col) == Placement::primal) {
      if (hm != nullptr && hm->is_lame())
        cb.lame = hm;
      else
        cb.inner = (hm != nullptr) ? &hm->weights() : &op_.vacuum_hodge(q).weights();
      cb.dop = &op_.derivative(q - 1);
      cb.transpose = true;
      const double s = into_rhs * ((q % 2 == 0) ? 1.0 : -1.0);
      const HodgeMap& vout = op_.vacuum_hodge(q - 1);
      cb.outer.resize(static_cast<size_t>(cx_->cell_count(q - 1)));
      for (index_t i = 0; i < cx_->cell_count(q - 1); ++i)
        cb.outer[static_cast<size_t>(i)] = s / vout.weight(i);
    } else {
      const int r = 3 - q;
      cb.inner_owned.resize(static_cast<size_t>(cx_->cell_count(r)));
      const HodgeMap& vin = op_.vacuum_hodge(r);
      for (index_t i = 0; i < cx_->cell_count(r); ++i) {
        const double v = vin.vacuum_weight(i);
        cb.inner_owned[static_cast<size_t>(i)] =
            (hm != nullptr) ? hm->weight(i) / (v * v) : 1.0 / v;
      }
      cb.dop = &op_.derivative(r);
      cb.transpose = false;
      const HodgeMap& vout = op_.vacuum_hodge(r + 1);
      cb.outer.resize(static_cast<size_t>(cx_->cell_count(r + 1)));
      for (index_t i = 0; i < cx_->cell_count(r + 1); ++i)
        cb.outer[static_cast<size_t>(i)] = into_rhs * vout.weight(i);
    }
    return cb;
  }

  bool is_masked(int row, Slot col) const {
    for (const auto& m : spec_.masked_blocks)
      if (m.first == row && m.second == col) return true;
    return false;
  }

  bool live_slot(Slot s) const {
    if (spec_.slot_assigned(s)) return true;
    return false;
  }

  void advance(CompiledRule& cr, double dt) {
    if (!derived_rules_.empty()) materialize_derived(cur_);
    const int m = spec_.fiber;
    // rhs = source - sum of spatial blocks.
    if (cr.has_source) {
      Cochain src = materialize_source_row(cr.source_row, cur_, source_time(cr, dt));
      std::copy(src.values.begin(), src.values.end(), cr.rhs.begin());
    } else {
      std::fill(cr.rhs.begin(), cr.rhs.end(), 0.0);
    }
    for (const CompiledBlock& cb : cr.spatial) {
      const double* x = cur_[cb.col].values.data();
      if (cb.outer.empty()) {  // plain derivative block
        if (cb.transpose)
          cb.dop->apply_transpose_accumulate(x, cr.rhs.data(), cb.alpha, m, threads_);
        else
          cb.dop->apply_accumulate(x, cr.rhs.data(), cb.alpha, m, threads_);
        continue;
      }
      // starred block: inner weights, derivative, per-output scale
      if (cb.lame != nullptr) {
        cb.lame->apply_lame(x, scratch_a_.data(), threads_);
      } else {
        const std::vector<double>& w = cb.inner_owned.empty() ? *cb.inner : cb.inner_owned;
        const index_t n = static_cast<index_t>(w.size());
        parallel_for(n, threads_, [&](index_t i) {
          for (int k = 0; k < m; ++k)
            scratch_a_[static_cast<size_t>(i * m + k)] = w[static_cast<size_t>(i)] * x[i * m + k];
        });
      }
      if (cb.transpose)
        cb.dop->apply_transpose(scratch_a_.data(), scratch_b_.data(), m, threads_);
      else
        cb.dop->apply(scratch_a_.data(), scratch_b_.data(), m, threads_);
      const index_t rows = static_cast<index_t>(cb.outer.size());
      parallel_for(rows, threads_, [&](index_t i) {
        for (int k = 0; k < m; ++k)
          cr.rhs[static_cast<size_t>(i * m + k)] +=
              cb.outer[static_cast<size_t>(i)] * scratch_b_[static_cast<size_t>(i * m + k)];
      });
    }
    // write the advanced level into the previous-level buffer, then swap
    Cochain& target = cur_[cr.rule.target];
    Cochain& previous = prev_[cr.rule.target];
    const double* ic = cr.inv_coeff.data();
    const double* cu = target.values.data();
    double* nw = previous.values.data();
    const double* rhs = cr.rhs.data();
    parallel_for(target.cells(), threads_, [&](index_t i) {
      for (int k = 0; k < m; ++k) nw[i * m + k] = cu[i * m + k] + dt * ic[i] * rhs[i * m + k];
    });
    target.values.swap(previous.values);
    apply_clamp(cr.rule.target, cur_);
  }

  double source_time(const CompiledRule& cr, double dt) const {
    // Sources are sampled at the time level of the row they feed: the
    // half-level update reads integer-level data (time t), the integer-level
    // update reads half-level data (time t + dt/2).
    const bool first = (&cr == &rules_.front());
    return first ? t_ : t_ + 0.5 * dt;
  }

  void apply_clamp(Slot s, GeneralField& f) {
    auto it = clamp_.find(s);
    if (it == clamp_.end()) return;
    Cochain& c = f[s];
    const auto& mask = it->second;
    const int m = c.fiber;
    for (index_t i = 0; i < c.cells(); ++i)
      if (mask[static_cast<size_t>(i)])
        for (int k = 0; k < m; ++k) c.at(i, k) = 0.0;
  }

  double pair_dot(Slot s, const Cochain& a, const Cochain& b) const {
    const HodgeMap* h = pairing_hodge(s);
    if (h->is_lame()) {
      std::vector<double> sb(b.values.size());
      h->apply_lame(b.values.data(), sb.data(), threads_);
      double acc = 0.0;
      for (size_t i = 0; i < sb.size(); ++i) acc += a.values[i] * sb[i];
      return acc;
    }
    double acc = 0.0;
    const int m = a.fiber;
    for (index_t c = 0; c < a.cells(); ++c) {
      const double v = h->vacuum_weight(c);
      const double w =
          (a.placement == Placement::primal) ? h->weight(c) : h->weight(c) / (v * v);
      for (int k = 0; k < m; ++k) acc += a.at(c, k) * b.at(c, k) * w;
    }
    return acc;
  }

  ModelSpec spec_;
  const CubicalComplex* cx_;
  int threads_;
  std::map<Slot, HodgeMap> hodges_;
  BlockOperator op_;
  GeneralField cur_, prev_;
  long long step_ = 0;
  double t_ = 0.0;
  long long divergence_check_every_ = 16;
  std::map<Slot, std::vector<std::uint8_t>> clamp_;
  std::vector<double> vh_;  // -V/hbar at vertices
  std::vector<std::pair<int, Slot>> potential_sources_;
  struct MirrorSource {
    int row;
    Slot slot;
    double scale;
  };
  std::vector<MirrorSource> mirror_sources_;
  std::vector<CompiledRule> rules_;
  std::vector<DerivedRule> derived_rules_;
  std::vector<double> scratch_a_, scratch_b_;
};

// ---------------------------------------------------------------------------
// run(): batch time loop with diagnostics, probes, and snapshot callbacks.
// ---------------------------------------------------------------------------

struct Probe {
  std::array<double, 3> x{0.5, 0.5, 0.5};
};

struct DiagRow {
  long long step = 0;
  double time = 0.0;
  double energy = 0.0;  // conserved staggered invariant
  double norm = 0.0;    // instantaneous Hodge-weighted norm
  std::vector<double> probe_values;
};

struct RunResult {
  std::vector<std::string> probe_columns;
  std::vector<DiagRow> rows;
  bool diverged = false;
  long long diverged_step = -1;
  double wall_seconds = 0.0;
  double initial_energy = 0.0;
  double final_energy = 0.0;
  double max_energy_drift = 0.0;  // max |E - E0| / max(|E0|, eps)
};

struct RunOptions {
  long long diagnostics_every = 1;
  long long snapshot_every = 0;  // 0 = never
  std::vector<Probe> probes;
  std::function<void(const Simulation&, long long)> snapshot_hook;
};

namespace detail {

struct ProbeIndex {
  std::string column;
  Slot slot;
  index_t cell;
  int fiber_comp;
};

inline std::vector<ProbeIndex> build_probes(const Simulation& sim,
                                            const std::vector<Probe>& probes) {
  std::vector<ProbeIndex> out;
  const CubicalComplex& cx = sim.complex();
  const ModelSpec& m = sim.model();
  for (size_t pi = 0; pi < probes.size(); ++pi) {
    for (Slot s : m.state_slots) {
      const PhysVar* v = m.var_for(s);
      const int ideg = sim.op().index_degree(s);
      for (unsigned axes : cx.subsets(ideg)) {
        // nearest cell of this orientation family
        index_t best = -1;
        double best_d = 0.0;
        for (index_t id = 0; id < cx.cell_count(ideg); ++id) {
          CellRef c = cx.decode(ideg, id);
          if (c.axes != axes) continue;
          auto xm = cx.midpoint(c);
          double d = 0.0;
          for (int a = 0; a < 3; ++a) d += (xm[a] - probes[pi].x[a]) * (xm[a] - probes[pi].x[a]);
          if (best < 0 || d < best_d) {
            best = id;
            best_d = d;
          }
        }
        for (int k = 0; k < m.fiber; ++k) {
          std::string col = "p" + std::to_string(pi) + "_" + v->name;
          if (popcount4(axes) > 0) {
            col += "_";
            for (int a = 0; a < 3; ++a)
              if ((axes >> a) & 1u) col += "xyz"[a];
          }
          if (m.fiber > 1) col += std::string("_") + "xyz"[k];
          out.push_back({col, s, best, k});
        }
      }
    }
  }
  return out;
}

}  // namespace detail

inline RunResult run(Simulation& sim, const SteppingPlan& plan, const RunOptions& opt = {}) {
  RunResult res;
  const auto probe_idx = detail::build_probes(sim, opt.probes);
  for (const auto& p : probe_idx) res.probe_columns.push_back(p.column);
  const auto t0 = std::chrono::steady_clock::now();

  auto record = [&](long long s) {
    DiagRow row;
    row.step = s;
    row.time = sim.time();
    row.energy = sim.invariant();
    row.norm = sim.state_norm();
    for (const auto& p : probe_idx) {
      const Cochain& c = sim.field()[p.slot];
      double raw = c.at(p.cell, p.fiber_comp);
      const PhysVar* v = sim.model().var_for(p.slot);
      row.probe_values.push_back(raw / v->scale);  // report the physics variable
    }
    res.rows.push_back(std::move(row));
  };

  try {
    record(0);
    for (long long s = 1; s <= plan.steps; ++s) {
      sim.step(plan.dt);
      if (opt.snapshot_every > 0 && s % opt.snapshot_every == 0 && opt.snapshot_hook)
        opt.snapshot_hook(sim, s);
      if (s % opt.diagnostics_every == 0 || s == plan.steps) record(s);
    }
    sim.check_finite();
  } catch (const DivergedError& e) {
    res.diverged = true;
    res.diverged_step = e.step;
  }
  const auto t1 = std::chrono::steady_clock::now();
  res.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
  if (!res.rows.empty()) {
    res.final_energy = res.rows.back().energy;
    // The invariant is the cross form of the staggered scheme; it is defined
    // from the first completed cycle onward, so drift is measured against the
    // first post-cycle row.
    double e0 = res.rows.back().energy;
    bool have_baseline = false;
    for (const auto& r : res.rows) {
      if (r.step < 1) continue;
      if (!have_baseline) {
        e0 = r.energy;
        res.initial_energy = e0;
        have_baseline = true;
        continue;
      }
      res.max_energy_drift = std::max(
          res.max_energy_drift, std::fabs(r.energy - e0) / std::max(std::fabs(e0), 1e-300));
    }
  }
  return res;
}

}  // namespace gcl
