// Physics models as slot-mapping tables over the general conservation law:
// slot assignments with signs and scales, material Hodge bindings, source
// bindings, active rows, masked (model-neglected) blocks, and the leapfrog
// update rules. All sign bookkeeping lives here; the block operator itself
// never special-cases a model.
#pragma once

#include <functional>
#include <iomanip>

#include "gcl/conservation.hpp"

namespace gcl {

struct PhysVar {
  Slot slot;
  std::string name;   // physics variable stored in the slot
  double scale;       // slot value = scale * variable (signs included)
};

struct SourceVar {
  int row;
  std::string name;
  double sign;
  bool star;  // displayed with a star_s applied (absorbed by projection)
};

enum class CoeffKind { unit, material, dual_volume, inv_dual_volume };

// One leapfrog half-update: the row's time term equals
// sign * coeff ⊙ d(target)/dt on the row's index set.
struct UpdateRule {
  int row = 0;
  Slot target = Slot::f2;
  CoeffKind coeff = CoeffKind::unit;
  double sign = 1.0;
};

enum class CflKind { wave, schrodinger };

using ScalarFn = std::function<double(const std::array<double, 3>&)>;
using VectorFn = std::function<std::array<double, 3>(const std::array<double, 3>&)>;

struct ModelSpec {
  std::string name;
  std::string note;
  int fiber = 1;
  std::array<Placement, kNumSlots> placement = kAllPrimal;

  std::vector<PhysVar> vars;
  std::vector<SourceVar> source_vars;
  std::map<Slot, MaterialField> materials;
  std::map<Slot, std::string> material_alias;       // display tag on starred blocks
  std::map<Slot, std::string> constitutive_alias;   // display of star_mat(var), e.g. sigma
  std::vector<int> active_rows;                     // 0-based row indices
  std::vector<std::pair<int, Slot>> masked_blocks;  // model-neglected blocks
  std::vector<UpdateRule> updates;                  // cycle order: half-level slot first
  std::vector<Slot> state_slots;                    // evolved state
  std::vector<Slot> derived_slots;                  // materialized from state each half-step
  std::vector<Slot> clamp_slots;                    // dirichlet-zero clamped
  std::vector<int> flip_display_rows;               // rows displayed sign-resolved

  CflKind cfl = CflKind::wave;
  double max_wave_speed = 1.0;
  double hbar = 1.0, mass = 1.0;
  ScalarFn potential;  // V(x), schrodinger only

  // External sources by row (projected with any star_s absorbed): scalar rows
  // take a density, vector rows a proxy vector; evaluated at (x, t).
  std::map<int, std::function<double(const std::array<double, 3>&, double)>> scalar_sources;
  std::map<int, std::function<std::array<double, 3>(const std::array<double, 3>&, double)>>
      vector_sources;

  const PhysVar* var_for(Slot s) const {
    for (const auto& v : vars)
      if (v.slot == s) return &v;
    return nullptr;
  }
  bool row_active(int r) const {
    for (int a : active_rows)
      if (a == r) return true;
    return false;
  }
  bool slot_assigned(Slot s) const { return var_for(s) != nullptr; }
};

// ---------------------------------------------------------------------------
// Built-in instantiations
// ---------------------------------------------------------------------------

inline ModelSpec maxwell_spec(double eps, double mu) {
  require(eps > 0.0 && mu > 0.0, "Maxwell materials must be positive");
  ModelSpec m;
  m.name = "maxwell";
  m.fiber = 1;
  m.vars = {{Slot::F1, "e", -1.0}, {Slot::f2, "b", 1.0}};
  m.source_vars = {{3, "j", 1.0, true}, {6, "q", -1.0, true}};
  m.materials[Slot::F1] = MaterialField::constant(MaterialKind::permittivity, eps);
  m.materials[Slot::f2] = MaterialField::constant(MaterialKind::reluctivity, 1.0 / mu);
  m.material_alias[Slot::F1] = "eps";
  m.material_alias[Slot::f2] = "nu";
  m.constitutive_alias[Slot::F1] = "d";  // d = star_eps e
  m.constitutive_alias[Slot::f2] = "h";  // h = star_nu b
  m.active_rows = {1, 3, 4, 6};
  m.updates = {{4, Slot::f2, CoeffKind::unit, 1.0},
               {3, Slot::F1, CoeffKind::material, 1.0}};
  m.state_slots = {Slot::f2, Slot::F1};
  m.clamp_slots = {Slot::F1};  // tangential e on the walls, perfect-conductor style
  m.cfl = CflKind::wave;
  m.max_wave_speed = 1.0 / std::sqrt(eps * mu);
  return m;
}

inline ModelSpec schrodinger_spec(double mass, double hbar, ScalarFn potential) {
  require(mass > 0.0, "mass must be positive");
  require(hbar > 0.0, "hbar must be positive");
  ModelSpec m;
  m.name = "schrodinger";
  m.fiber = 1;
  m.placement[slot_index(Slot::f3)] = Placement::dual;   // phi_I rides the dual complex,
  m.placement[slot_index(Slot::F2)] = Placement::dual;   // collocating both components
  m.vars = {{Slot::F0, "phi_R", hbar},
            {Slot::f3, "phi_I", hbar},
            {Slot::f1, "q_R", hbar / (2.0 * mass)},
            {Slot::F2, "q_I", hbar / (2.0 * mass)}};
  m.source_vars = {{2, "q_R", 1.0, false},
                   {5, "q_I", 1.0, false},
                   {7, "V phi_R", -1.0, false},
                   {0, "V phi_I", -1.0, false}};
  m.active_rows = {0, 2, 5, 7};
  m.masked_blocks = {{2, Slot::f1}, {5, Slot::F2}};  // d/dt q dropped by the model
  m.updates = {{7, Slot::f3, CoeffKind::inv_dual_volume, 1.0},
               {0, Slot::F0, CoeffKind::dual_volume, -1.0}};
  m.state_slots = {Slot::f3, Slot::F0};
  m.derived_slots = {Slot::f1, Slot::F2};
  m.clamp_slots = {Slot::F0, Slot::f3};
  m.cfl = CflKind::schrodinger;
  m.hbar = hbar;
  m.mass = mass;
  m.potential = std::move(potential);
  return m;
}

inline ModelSpec elasticity_spec(double rho, double lambda, double mu_shear) {
  require(rho > 0.0, "density must be positive");
  require(mu_shear > 0.0 && lambda + 2.0 * mu_shear > 0.0, "invalid Lame moduli");
  ModelSpec m;
  m.name = "elasticity";
  m.fiber = 3;
  m.vars = {{Slot::F0, "u", 1.0}, {Slot::f1, "eps", 1.0}};
  m.source_vars = {{7, "f_v", -1.0, true}};
  m.materials[Slot::F0] = MaterialField::constant(MaterialKind::density, rho);
  m.materials[Slot::f1] = MaterialField::lame(lambda, mu_shear);
  m.material_alias[Slot::F0] = "rho";
  m.material_alias[Slot::f1] = "C";
  m.constitutive_alias[Slot::f1] = "sigma";
  m.active_rows = {2, 5, 7};
  m.flip_display_rows = {7};  // displayed as rho dt u - div sigma = f_v
  m.updates = {{2, Slot::f1, CoeffKind::unit, 1.0},
               {7, Slot::F0, CoeffKind::material, -1.0}};
  m.state_slots = {Slot::f1, Slot::F0};
  m.clamp_slots = {Slot::F0};
  m.cfl = CflKind::wave;
  m.max_wave_speed = std::sqrt((lambda + 2.0 * mu_shear) / rho);
  return m;
}

// With a trivial connection the Yang-Mills system coincides with Maxwell's;
// the non-abelian case (End(E)-valued forms, a^1 ∧ a^1 curvature term) is out
// of scope, so this is an alias with a note.
inline ModelSpec yang_mills_spec(double eps, double mu) {
  ModelSpec m = maxwell_spec(eps, mu);
  m.name = "yang-mills";
  m.note =
      "trivial-connection alias of maxwell; the non-abelian case (nontrivial "
      "connection, curvature term a1^a1) is out of scope";
  return m;
}

inline ModelSpec make_model(const std::string& name, double eps, double mu, double rho,
                            double lambda, double mu_shear, double mass, double hbar,
                            ScalarFn potential) {
  if (name == "maxwell") return maxwell_spec(eps, mu);
  if (name == "yang-mills") return yang_mills_spec(eps, mu);
  if (name == "schrodinger") return schrodinger_spec(mass, hbar, std::move(potential));
  if (name == "elasticity") return elasticity_spec(rho, lambda, mu_shear);
  throw std::invalid_argument("unknown model: " + name +
                              " (available: maxwell, schrodinger, elasticity, yang-mills)");
}

// ---------------------------------------------------------------------------
// Row tables: exterior-calculus form and the grad/curl/div proxy form.
// Terms are rendered in column order, matching the displayed law.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string fmt_scale(double s, const std::string& var) {
  if (s == 1.0) return var;
  if (s == -1.0) return "-" + var;
  std::ostringstream os;
  os << s << " " << var;
  return os.str();
}

struct Term {
  double sign;      // +1/-1 after folding the slot scale's sign
  std::string body;
};

inline std::string join_terms(const std::vector<Term>& terms, const std::string& rhs) {
  std::string out;
  for (size_t i = 0; i < terms.size(); ++i) {
    if (i == 0)
      out += (terms[i].sign < 0 ? "-" : "");
    else
      out += (terms[i].sign < 0 ? " - " : " + ");
    out += terms[i].body;
  }
  if (out.empty()) out = "0";
  return out + " = " + rhs;
}

}  // namespace detail

// One row of the law instantiated for a model, e.g. "d^s e + dt b = 0".
inline std::string render_row(const ModelSpec& m, const BlockOperator& op, int row,
                              bool proxy) {
  std::vector<detail::Term> terms;
  for (const BlockSpec& b : op.blocks()) {
    if (b.row != row) continue;
    const PhysVar* v = m.var_for(b.col);
    if (v == nullptr) continue;
    bool masked = false;
    for (const auto& mb : m.masked_blocks)
      if (mb.first == row && mb.second == b.col) masked = true;
    if (masked) continue;
    double sgn = b.sign * (v->scale < 0 ? -1.0 : 1.0);
    const std::string mag =
        std::fabs(v->scale) == 1.0
            ? v->name
            : ([&] {
                std::ostringstream os;
                os << std::fabs(v->scale) << " " << v->name;
                return os.str();
              })();
    const int q = slot_degree(b.col);
    std::string alias;
    if (auto it = m.material_alias.find(b.col); it != m.material_alias.end()) alias = it->second;
    std::string body;
    if (!proxy) {
      const std::string star_in = alias.empty() ? "star_s" : "star_" + alias;
      switch (b.kind) {
        case BlockKind::dt: body = "dt " + mag; break;
        case BlockKind::ds: body = "d^s " + mag; break;
        case BlockKind::star_ds_star: body = "star_s d^s " + star_in + " " + mag; break;
        case BlockKind::star_dt_star: body = "star_s dt " + star_in + " " + mag; break;
      }
    } else {
      const char* dsname[4] = {"grad", "curl", "div", "?"};        // on degree q
      const char* codiffname[4] = {"?", "div", "curl", "grad"};    // on degree q
      // For the Lame stiffness there is no scalar factor to display; use the
      // constitutive alias (div sigma). Scalar materials print inline (curl nu b).
      bool lame = false;
      if (auto it = m.materials.find(b.col); it != m.materials.end())
        lame = it->second.kind == MaterialKind::stiffness;
      std::string con;
      if (auto it = m.constitutive_alias.find(b.col); it != m.constitutive_alias.end())
        con = it->second;
      switch (b.kind) {
        case BlockKind::dt: body = "dt " + mag; break;
        case BlockKind::ds: body = std::string(dsname[q]) + " " + mag; break;
        case BlockKind::star_ds_star:
          if (lame && !con.empty())
            body = std::string(codiffname[q]) + " " + con;
          else
            body = std::string(codiffname[q]) + " " + (alias.empty() ? "" : alias + " ") + mag;
          break;
        case BlockKind::star_dt_star:
          body = "dt " + (alias.empty() ? "" : alias + " ") + mag;
          break;
      }
    }
    terms.push_back({sgn, body});
  }
  bool flip = false;
  for (int fr : m.flip_display_rows)
    if (fr == row) flip = true;
  if (flip) {
    std::reverse(terms.begin(), terms.end());
    for (auto& t : terms) t.sign = -t.sign;
  }
  std::string rhs = "0";
  for (const SourceVar& s : m.source_vars) {
    if (s.row != row) continue;
    std::string body = s.name;
    if (!proxy && s.star) body = "star_s " + body;
    double sg = flip ? -s.sign : s.sign;
    rhs = (sg < 0 ? "-" : "") + body;
  }
  return detail::join_terms(terms, rhs);
}

// Which rows are active and which physics equation each reduces to.
inline std::string row_map(const ModelSpec& m, const BlockOperator& op) {
  std::ostringstream os;
  os << "model: " << m.name << " (fiber " << m.fiber << ")\n";
  if (!m.note.empty()) os << "note: " << m.note << "\n";
  os << "slots:";
  for (const auto& v : m.vars)
    os << " " << slot_label(v.slot) << " = " << detail::fmt_scale(v.scale, v.name);
  os << "\n";
  os << "active rows:\n";
  for (int r : m.active_rows) {
    os << "  row " << (r + 1) << " (" << kRowLabel[static_cast<size_t>(r)]
       << "): " << render_row(m, op, r, /*proxy=*/false) << "\n";
  }
  return os.str();
}

// The same rows in classical vector analysis with the alpha substitutions.
inline std::string vector_proxy_table(const ModelSpec& m, const BlockOperator& op) {
  std::ostringstream os;
  os << "model: " << m.name << " (vector-calculus proxy)\n";
  for (int r : m.active_rows) {
    os << "  row " << (r + 1) << " (" << kRowLabel[static_cast<size_t>(r)]
       << "): " << render_row(m, op, r, /*proxy=*/true) << "\n";
  }
  return os.str();
}

}  // namespace gcl
