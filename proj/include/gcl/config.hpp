// Plain-text run configuration: [section] headers with key = value lines and
// '#' comments. Every field has a default except the model name and the grid
// extents. parse -> serialize -> parse is the identity.
#pragma once

#include <fstream>
#include <memory>
#include <sstream>

#include "gcl/expr.hpp"
#include "gcl/io.hpp"

namespace gcl {

struct RunConfig {
  // [model]
  std::string model_name;  // required: maxwell | schrodinger | elasticity | yang-mills
  double eps = 1.0, mu = 1.0;
  double rho = 1.0, lambda = 1.0, mu_shear = 1.0;
  double mass = 1.0, hbar = 1.0;
  std::string potential = "0";
  std::string eps_csv, mu_csv, rho_csv;

  // [grid]
  std::vector<int> extents;        // required
  std::vector<double> spacings;    // default: 1/extent per axis (unit box)
  std::string boundary = "periodic";  // periodic | dirichlet | three per-axis words

  // [time]
  double dt = 0.0;  // 0 = auto from cfl_factor
  double cfl_factor = 0.5;
  long long steps = 100;

  // [initial] / [sources]: expression strings keyed by variable component
  std::vector<std::pair<std::string, std::string>> initial;
  std::vector<std::pair<std::string, std::string>> sources;
  double noise = 0.0;  // seeded uniform perturbation added to the state slots

  // [probes]
  std::vector<std::array<double, 3>> probes;

  // [output]
  std::string out_dir = "out";
  long long diagnostics_every = 1;
  long long snapshot_every = 0;
  std::string snapshot_format = "vtk";  // vtk | csv | bin

  // [run]
  unsigned seed = 1234;
  int threads = 0;  // 0 = all hardware threads

  bool operator==(const RunConfig&) const = default;

  static RunConfig parse(const std::string& text);
  static RunConfig load(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
  }
  std::string serialize() const;
  void validate() const;
};

namespace detail {

inline std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  size_t b = s.find_last_not_of(" \t\r\n");
  return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

}  // namespace detail

inline RunConfig RunConfig::parse(const std::string& text) {
  RunConfig c;
  std::istringstream in(text);
  std::string line, section;
  bool have_spacings = false;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      section = detail::trim(line.substr(1, line.size() - 2));
      require(section == "model" || section == "grid" || section == "time" ||
                  section == "initial" || section == "sources" || section == "probes" ||
                  section == "output" || section == "run",
              "unknown config section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    require(eq != std::string::npos, "expected 'key = value', got: " + line);
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string val = detail::trim(line.substr(eq + 1));
    require(!section.empty(), "key '" + key + "' appears before any [section]");

    if (section == "model") {
      if (key == "name") c.model_name = val;
      else if (key == "eps") c.eps = std::stod(val);
      else if (key == "mu") c.mu = std::stod(val);
      else if (key == "rho") c.rho = std::stod(val);
      else if (key == "lambda") c.lambda = std::stod(val);
      else if (key == "mu_shear") c.mu_shear = std::stod(val);
      else if (key == "mass") c.mass = std::stod(val);
      else if (key == "hbar") c.hbar = std::stod(val);
      else if (key == "potential") c.potential = val;
      else if (key == "eps_csv") c.eps_csv = val;
      else if (key == "mu_csv") c.mu_csv = val;
      else if (key == "rho_csv") c.rho_csv = val;
      else throw std::invalid_argument("unknown [model] key: " + key);
    } else if (section == "grid") {
      if (key == "extents") {
        c.extents.clear();
        for (const auto& t : detail::split_ws(val)) c.extents.push_back(std::stoi(t));
      } else if (key == "spacings") {
        c.spacings.clear();
        for (const auto& t : detail::split_ws(val)) c.spacings.push_back(std::stod(t));
        have_spacings = true;
      } else if (key == "boundary") {
        c.boundary = val;
      } else {
        throw std::invalid_argument("unknown [grid] key: " + key);
      }
    } else if (section == "time") {
      if (key == "dt") c.dt = (val == "auto") ? 0.0 : std::stod(val);
      else if (key == "cfl_factor") c.cfl_factor = std::stod(val);
      else if (key == "steps") c.steps = std::stoll(val);
      else throw std::invalid_argument("unknown [time] key: " + key);
    } else if (section == "initial") {
      if (key == "noise")
        c.noise = std::stod(val);
      else
        c.initial.emplace_back(key, val);
    } else if (section == "sources") {
      c.sources.emplace_back(key, val);
    } else if (section == "probes") {
      if (key == "points") {
        c.probes.clear();
        std::istringstream ps(val);
        std::string group;
        while (std::getline(ps, group, ';')) {
          auto toks = detail::split_ws(group);
          if (toks.empty()) continue;
          require(toks.size() == 3, "probe point needs three coordinates: " + group);
          c.probes.push_back({std::stod(toks[0]), std::stod(toks[1]), std::stod(toks[2])});
        }
      } else {
        throw std::invalid_argument("unknown [probes] key: " + key);
      }
    } else if (section == "output") {
      if (key == "dir") c.out_dir = val;
      else if (key == "diagnostics_every") c.diagnostics_every = std::stoll(val);
      else if (key == "snapshot_every") c.snapshot_every = std::stoll(val);
      else if (key == "snapshot_format") c.snapshot_format = val;
      else throw std::invalid_argument("unknown [output] key: " + key);
    } else if (section == "run") {
      if (key == "seed") c.seed = static_cast<unsigned>(std::stoul(val));
      else if (key == "threads") c.threads = std::stoi(val);
      else throw std::invalid_argument("unknown [run] key: " + key);
    }
  }
  if (!have_spacings && !c.extents.empty()) {
    for (int n : c.extents) c.spacings.push_back(n > 0 ? 1.0 / n : 1.0);
  }
  c.validate();
  return c;
}

inline void RunConfig::validate() const {
  require(!model_name.empty(), "[model] name is required");
  require(model_name == "maxwell" || model_name == "schrodinger" || model_name == "elasticity" ||
              model_name == "yang-mills",
          "unknown model: " + model_name +
              " (available: maxwell, schrodinger, elasticity, yang-mills)");
  require(extents.size() == 3, "[grid] extents must list three per-axis counts");
  for (int n : extents) require(n >= 1, "grid extents must be positive");
  require(spacings.size() == 3, "[grid] spacings must list three per-axis lengths");
  for (double s : spacings) require(s > 0.0, "grid spacings must be positive");
  const auto toks = detail::split_ws(boundary);
  require(toks.size() == 1 || toks.size() == 3, "boundary must be one word or three per-axis words");
  for (const auto& t : toks)
    require(t == "periodic" || t == "dirichlet", "boundary words are periodic|dirichlet");
  require(dt >= 0.0, "dt must be positive or auto");
  require(cfl_factor > 0.0, "cfl_factor must be positive");
  require(steps >= 0, "steps must be nonnegative");
  require(diagnostics_every >= 1, "diagnostics_every must be at least 1");
  require(snapshot_every >= 0, "snapshot_every must be nonnegative");
  require(noise >= 0.0, "noise amplitude must be nonnegative");
  require(snapshot_format == "vtk" || snapshot_format == "csv" || snapshot_format == "bin",
          "snapshot_format is vtk|csv|bin");
  require(threads >= 0, "threads must be nonnegative");
  // expressions must parse
  (void)Expression::parse(potential);
  for (const auto& [k, v] : initial) (void)Expression::parse(v);
  for (const auto& [k, v] : sources) (void)Expression::parse(v);
}

inline std::string RunConfig::serialize() const {
  std::ostringstream o;
  o << "[model]\n";
  o << "name = " << model_name << "\n";
  o << "eps = " << format_double(eps) << "\n";
  o << "mu = " << format_double(mu) << "\n";
  o << "rho = " << format_double(rho) << "\n";
  o << "lambda = " << format_double(lambda) << "\n";
  o << "mu_shear = " << format_double(mu_shear) << "\n";
  o << "mass = " << format_double(mass) << "\n";
  o << "hbar = " << format_double(hbar) << "\n";
  o << "potential = " << potential << "\n";
  if (!eps_csv.empty()) o << "eps_csv = " << eps_csv << "\n";
  if (!mu_csv.empty()) o << "mu_csv = " << mu_csv << "\n";
  if (!rho_csv.empty()) o << "rho_csv = " << rho_csv << "\n";
  o << "\n[grid]\n";
  o << "extents =";
  for (int n : extents) o << " " << n;
  o << "\nspacings =";
  for (double s : spacings) o << " " << format_double(s);
  o << "\nboundary = " << boundary << "\n";
  o << "\n[time]\n";
  o << "dt = " << (dt == 0.0 ? std::string("auto") : format_double(dt)) << "\n";
  o << "cfl_factor = " << format_double(cfl_factor) << "\n";
  o << "steps = " << steps << "\n";
  if (!initial.empty() || noise != 0.0) {
    o << "\n[initial]\n";
    for (const auto& [k, v] : initial) o << k << " = " << v << "\n";
    if (noise != 0.0) o << "noise = " << format_double(noise) << "\n";
  }
  if (!sources.empty()) {
    o << "\n[sources]\n";
    for (const auto& [k, v] : sources) o << k << " = " << v << "\n";
  }
  if (!probes.empty()) {
    o << "\n[probes]\npoints =";
    for (size_t i = 0; i < probes.size(); ++i) {
      if (i) o << " ;";
      for (double v : probes[i]) o << " " << format_double(v);
    }
    o << "\n";
  }
  o << "\n[output]\n";
  o << "dir = " << out_dir << "\n";
  o << "diagnostics_every = " << diagnostics_every << "\n";
  o << "snapshot_every = " << snapshot_every << "\n";
  o << "snapshot_format = " << snapshot_format << "\n";
  o << "\n[run]\n";
  o << "seed = " << seed << "\n";
  o << "threads = " << threads << "\n";
  return o.str();
}

// ---------------------------------------------------------------------------
// Configured run assembly
// ---------------------------------------------------------------------------

struct ConfiguredRun {
  std::unique_ptr<CubicalComplex> complex;
  ModelSpec model;
  std::unique_ptr<Simulation> sim;
  SteppingPlan plan;
  RunOptions options;
};

namespace detail {

inline std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// Which physics variable (and component) a config key addresses.
struct VarKey {
  const PhysVar* var = nullptr;
  int form_comp = 0;   // within the sorted component basis
  int fiber_comp = 0;
  double proxy_sign = 1.0;  // sorted 2-form basis carries e_xz = -v_y
};

inline VarKey resolve_var_key(const ModelSpec& m, const std::string& raw_key) {
  const std::string key = lower(raw_key);
  for (const PhysVar& v : m.vars) {
    std::string base = lower(v.name);
    base.erase(std::remove(base.begin(), base.end(), '_'), base.end());
    std::string k = key;
    k.erase(std::remove(k.begin(), k.end(), '_'), k.end());
    if (k.rfind(base, 0) != 0) continue;
    const std::string suffix = k.substr(base.size());
    const int deg = slot_degree(v.slot);
    VarKey out;
    out.var = &v;
    auto axis_of = [](char c) { return c == 'x' ? 0 : c == 'y' ? 1 : c == 'z' ? 2 : -1; };
    if (suffix.empty()) {
      require(deg == 0 || deg == 3, "variable " + v.name + " needs a component suffix");
      require(m.fiber == 1, "vector-valued variable " + v.name + " needs a component suffix");
      return out;
    }
    if (suffix.size() == 1 && m.fiber == 1 && (deg == 1 || deg == 2)) {
      const int a = axis_of(suffix[0]);
      require(a >= 0, "bad component suffix in " + raw_key);
      if (deg == 1) {
        out.form_comp = a;
      } else {  // sorted basis [xy, xz, yz] = [v_z, -v_y, v_x]
        out.form_comp = (a == 2) ? 0 : (a == 1 ? 1 : 2);
        out.proxy_sign = (a == 1) ? -1.0 : 1.0;
      }
      return out;
    }
    if (suffix.size() == 1 && m.fiber == 3 && deg == 0) {
      const int a = axis_of(suffix[0]);
      require(a >= 0, "bad component suffix in " + raw_key);
      out.fiber_comp = a;
      return out;
    }
    if (suffix.size() == 2 && m.fiber == 3 && deg == 1) {
      const int a = axis_of(suffix[0]);  // edge axis
      const int f = axis_of(suffix[1]);  // fiber component
      require(a >= 0 && f >= 0, "bad component suffix in " + raw_key);
      out.form_comp = a;
      out.fiber_comp = f;
      return out;
    }
    throw std::invalid_argument("component suffix '" + suffix + "' does not fit variable " +
                                v.name);
  }
  throw std::invalid_argument("no model variable matches initial key '" + raw_key + "'");
}

}  // namespace detail

inline ConfiguredRun configure(const RunConfig& cfg) {
  cfg.validate();
  ConfiguredRun out;

  auto btoks = detail::split_ws(cfg.boundary);
  std::vector<bool> periodic(3, true);
  for (int a = 0; a < 3; ++a) {
    const std::string& w = btoks.size() == 1 ? btoks[0] : btoks[static_cast<size_t>(a)];
    periodic[static_cast<size_t>(a)] = (w == "periodic");
  }
  out.complex =
      std::make_unique<CubicalComplex>(3, cfg.extents, cfg.spacings, periodic);
  const CubicalComplex& cx = *out.complex;

  ScalarFn potential;
  if (cfg.model_name == "schrodinger") {
    Expression vex = Expression::parse(cfg.potential);
    potential = [vex](const std::array<double, 3>& x) { return vex(x, 0.0); };
  }
  out.model = make_model(cfg.model_name, cfg.eps, cfg.mu, cfg.rho, cfg.lambda, cfg.mu_shear,
                         cfg.mass, cfg.hbar, std::move(potential));

  // per-cell material overrides
  auto override_cells = [&](Slot slot, const std::string& path, bool invert) {
    if (path.empty()) return;
    auto it = out.model.materials.find(slot);
    require(it != out.model.materials.end(), "model has no material on that slot");
    const int q = slot_degree(slot);
    auto vals = read_material_csv(path, cx.cell_count(q));
    if (invert)
      for (double& v : vals) v = 1.0 / v;
    it->second.per_cell = std::move(vals);
  };
  if (cfg.model_name == "maxwell" || cfg.model_name == "yang-mills") {
    override_cells(Slot::F1, cfg.eps_csv, false);
    override_cells(Slot::f2, cfg.mu_csv, true);  // stored as reluctivity
  } else if (cfg.model_name == "elasticity") {
    override_cells(Slot::F0, cfg.rho_csv, false);
  }

  // external sources: gather per-row component expressions, then bind
  std::map<int, std::shared_ptr<std::array<Expression, 3>>> vec_rows;
  for (const auto& [key, text] : cfg.sources) {
    Expression ex = Expression::parse(text);
    const std::string k = detail::lower(key);
    auto bind_vector = [&](int row, int comp) {
      auto& arr = vec_rows[row];
      if (!arr) arr = std::make_shared<std::array<Expression, 3>>();
      (*arr)[static_cast<size_t>(comp)] = std::move(ex);
    };
    if (cfg.model_name == "maxwell" || cfg.model_name == "yang-mills") {
      if (k == "q") {
        auto exp = std::make_shared<Expression>(std::move(ex));
        out.model.scalar_sources[6] = [exp](const std::array<double, 3>& x, double t) {
          return (*exp)(x, t);
        };
        continue;
      }
      if (k.size() == 3 && k.rfind("j_", 0) == 0 && (k[2] == 'x' || k[2] == 'y' || k[2] == 'z')) {
        bind_vector(3, k[2] - 'x');
        continue;
      }
    } else if (cfg.model_name == "elasticity") {
      if (k.size() == 4 && k.rfind("fv_", 0) == 0 && (k[3] == 'x' || k[3] == 'y' || k[3] == 'z')) {
        bind_vector(7, k[3] - 'x');
        continue;
      }
    }
    throw std::invalid_argument("unknown source key '" + key + "' for model " + cfg.model_name);
  }
  for (auto& [row, arr] : vec_rows) {
    auto exprs = arr;
    out.model.vector_sources[row] = [exprs](const std::array<double, 3>& x, double t) {
      std::array<double, 3> v{0, 0, 0};
      for (int k = 0; k < 3; ++k)
        if (!(*exprs)[static_cast<size_t>(k)].empty()) v[static_cast<size_t>(k)] = (*exprs)[static_cast<size_t>(k)](x, t);
      return v;
    };
  }

  const int threads = cfg.threads == 0 ? hardware_threads() : cfg.threads;
  out.sim = std::make_unique<Simulation>(out.model, cx, threads);

  const double bound = cfl_bound(out.model, cx);
  const double dt = (cfg.dt == 0.0) ? cfg.cfl_factor * bound : cfg.dt;
  out.plan = plan_stepping(out.model, cx, dt, cfg.steps);

  // initial conditions: half-level variables sample at t = -dt/2
  const Slot half_slot = out.model.updates.empty() ? Slot::f0 : out.model.updates[0].target;
  std::map<std::string, std::vector<std::pair<detail::VarKey, Expression>>> grouped;
  for (const auto& [key, text] : cfg.initial) {
    detail::VarKey vk = detail::resolve_var_key(out.model, key);
    grouped[vk.var->name].emplace_back(vk, Expression::parse(text));
  }
  for (auto& [name, comps] : grouped) {
    const PhysVar* var = comps.front().first.var;
    const double t_eval = (var->slot == half_slot) ? -0.5 * dt : 0.0;
    const int fiber = out.model.fiber;
    const int deg = slot_degree(var->slot);
    const int ncomp = (deg == 0 || deg == 3) ? 1 : 3;
    auto compsp = std::make_shared<std::vector<std::pair<detail::VarKey, Expression>>>(comps);
    out.sim->set_var(name,
                     [compsp, t_eval, fiber, ncomp](const std::array<double, 3>& x, double* o) {
                       for (int i = 0; i < ncomp * fiber; ++i) o[i] = 0.0;
                       for (const auto& [vk, ex] : *compsp)
                         o[vk.form_comp * fiber + vk.fiber_comp] += vk.proxy_sign * ex(x, t_eval);
                     });
  }

  if (cfg.noise > 0.0) out.sim->perturb_state(cfg.noise, cfg.seed);

  out.options.diagnostics_every = cfg.diagnostics_every;
  out.options.snapshot_every = cfg.snapshot_every;
  for (const auto& p : cfg.probes) out.options.probes.push_back(Probe{p});
  return out;
}

}  // namespace gcl
