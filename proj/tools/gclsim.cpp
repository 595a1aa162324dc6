// Batch command-line front end: verify | run | rows | dump-operators.
// Exit codes: 0 success, 1 check failure, 2 config error, 3 diverged run.
#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

#include "gcl/gcl.hpp"

namespace fs = std::filesystem;
using namespace gcl;

namespace {

struct CheckReport {
  std::vector<std::array<std::string, 3>> rows;  // check, result, detail
  bool all_pass = true;

  void add(const std::string& check, bool pass, const std::string& detail = "") {
    rows.push_back({check, pass ? "PASS" : "FAIL", detail});
    all_pass = all_pass && pass;
    std::cout << check << ": " << (pass ? "PASS" : "FAIL");
    if (!detail.empty()) std::cout << " (" << detail << ")";
    std::cout << "\n";
  }
  void write_csv(const std::string& path) const {
    std::ofstream out(path);
    out << "check,result,detail\n";
    for (const auto& r : rows) out << r[0] << "," << r[1] << "," << r[2] << "\n";
  }
};

int cmd_verify(const std::string& config_path, const std::string& out_dir,
               const std::string& tamper) {
  unsigned seed = 1234;
  std::vector<std::vector<int>> grids = {{4, 4, 4}, {8, 8, 8}, {16, 16, 16}};
  if (!config_path.empty()) {
    RunConfig cfg = RunConfig::load(config_path);
    seed = cfg.seed;
    grids.push_back(cfg.extents);
  }
  CheckReport rep;

  // exactness of the derivative complex
  for (const auto& n : grids) {
    auto cx = build_complex(3, n, {1.0 / n[0], 1.0 / n[1], 1.0 / n[2]});
    for (int p = 0; p + 1 < 3; ++p) {
      auto dp = exterior_derivative(cx, p);
      auto dn = exterior_derivative(cx, p + 1);
      const long long worst = IncidenceOperator::compose_max_abs(dn, dp);
      std::ostringstream name;
      name << "d.d=0 p=" << p << " grid " << n[0] << "x" << n[1] << "x" << n[2];
      rep.add(name.str(), worst == 0, worst == 0 ? "" : "max |entry| " + std::to_string(worst));
    }
  }

  // pattern lock on three distinct grids / material sets
  auto fixture = parse_pattern(golden_pattern_text());
  if (!tamper.empty()) {
    const auto colon = tamper.find(':');
    require(colon != std::string::npos, "--tamper expects ROW:COL, e.g. g1s:f2s");
    const int row = row_from_label(tamper.substr(0, colon));
    const Slot col = slot_from_label(tamper.substr(colon + 1));
    bool found = false;
    for (auto& b : fixture)
      if (b.row == row && b.col == col) {
        b.sign = -b.sign;
        found = true;
      }
    require(found, "no block at " + tamper);
  }
  {
    auto cx1 = build_complex(3, {2, 2, 2}, {1, 1, 1});
    auto cx2 = build_complex(3, {4, 3, 2}, {0.5, 1.0, 2.0});
    auto cx3 = CubicalComplex::torus(3, {3, 3, 3}, {0.25, 0.5, 0.125});
    auto heps = build_hodge(cx2, 1, MaterialField::constant(MaterialKind::permittivity, 2.0));
    auto hnu = build_hodge(cx2, 2, MaterialField::constant(MaterialKind::reluctivity, 0.5));
    auto hrho = build_hodge(cx3, 0, MaterialField::constant(MaterialKind::density, 3.0));
    int idx = 0;
    auto run_case = [&](const CubicalComplex& cx, const std::map<Slot, const HodgeMap*>& hs) {
      auto op = assemble_block_operator(cx, hs);
      auto bad = check_pattern(op, fixture);
      std::ostringstream name;
      name << "pattern lock (" << op.blocks().size() << " blocks, case " << ++idx << ")";
      rep.add(name.str(), bad.empty(), bad.empty() ? "" : bad.front());
    };
    run_case(cx1, {});
    run_case(cx2, {{Slot::F1, &heps}, {Slot::f2, &hnu}});
    run_case(cx3, {{Slot::F0, &hrho}});
  }

  // space/time decomposition oracle
  for (int n : {2, 3}) {
    auto cx4 = build_complex(4, {n, n, n, n}, {1, 1, 1, 1});
    auto orep = verify_4d_decomposition(cx4, 100, seed);
    long long worst = 0;
    for (long long d : orep.max_discrepancy) worst = std::max(worst, d);
    std::ostringstream name;
    name << "4D split oracle " << n << "^4 (100 trials)";
    rep.add(name.str(), orep.pass(), "max discrepancy " + std::to_string(worst));
  }

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    rep.write_csv((fs::path(out_dir) / "verify_report.csv").string());
  }
  return rep.all_pass ? 0 : 1;
}

int cmd_rows(const std::string& model_name) {
  ModelSpec m = make_model(model_name, 1, 1, 1, 1, 1, 1, 1,
                           [](const std::array<double, 3>&) { return 0.0; });
  auto cx = build_complex(3, {2, 2, 2}, {1, 1, 1});
  Simulation sim(m, cx);
  std::cout << row_map(m, sim.op());
  std::cout << "\n" << vector_proxy_table(m, sim.op());
  return 0;
}

int cmd_run(const std::string& config_path, const std::string& out_override, int threads_override,
            long long snapshot_override) {
  RunConfig cfg = RunConfig::load(config_path);
  if (!out_override.empty()) cfg.out_dir = out_override;
  if (threads_override >= 0) cfg.threads = threads_override;
  if (snapshot_override >= 0) cfg.snapshot_every = snapshot_override;

  ConfiguredRun cr = configure(cfg);
  fs::create_directories(cfg.out_dir);

  const std::string fmt = cfg.snapshot_format;
  const std::string out_dir = cfg.out_dir;
  cr.options.snapshot_hook = [&fmt, &out_dir](const Simulation& sim, long long step) {
    char tag[32];
    std::snprintf(tag, sizeof tag, "snapshot_%08lld", step);
    const fs::path base = fs::path(out_dir) / tag;
    if (fmt == "vtk") {
      write_vtk_snapshot(base.string() + ".vtk", sim);
      return;
    }
    for (Slot s : sim.model().state_slots) {
      const std::string file = base.string() + "_" + slot_label(s);
      if (fmt == "csv")
        write_cochain_csv(file + ".csv", sim.field()[s]);
      else
        write_cochain_binary(file + ".bin", sim.field()[s]);
    }
  };

  RunResult res = run(*cr.sim, cr.plan, cr.options);
  write_diagnostics_csv((fs::path(out_dir) / "diagnostics.csv").string(), res);
  write_run_summary((fs::path(out_dir) / "summary.txt").string(), res, cr.plan);

  std::cout << "model " << cr.model.name << ", " << cr.plan.steps << " steps, dt "
            << format_double(cr.plan.dt) << " (cfl bound " << format_double(cr.plan.cfl) << ")\n";
  if (res.diverged) {
    std::cout << "DIVERGED at step " << res.diverged_step << "\n";
    return 3;
  }
  std::cout << "final energy " << format_double(res.final_energy) << ", max drift "
            << format_double(res.max_energy_drift) << ", wall " << format_double(res.wall_seconds)
            << " s\n";
  return 0;
}

int cmd_dump(const std::string& config_path, const std::string& out_dir) {
  std::vector<int> extents{4, 4, 4};
  std::vector<double> spacings{0.25, 0.25, 0.25};
  if (!config_path.empty()) {
    RunConfig cfg = RunConfig::load(config_path);
    extents = cfg.extents;
    spacings = cfg.spacings;
  }
  fs::create_directories(out_dir);
  auto cx = build_complex(3, extents, spacings);
  for (int p = 0; p < 3; ++p) {
    auto d = exterior_derivative(cx, p);
    write_incidence_triplets(
        (fs::path(out_dir) / ("incidence_d" + std::to_string(p) + ".txt")).string(), d);
  }
  std::ofstream pat(fs::path(out_dir) / "pattern.txt");
  pat << golden_pattern_text();
  std::cout << "wrote incidence triplets and the block pattern to " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"discrete conservation-law engine (maxwell, schrodinger, elasticity)"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", tamper, model_name;
  int threads = -1;
  long long snapshot_every = -1;

  auto* verify = app.add_subcommand("verify", "structural checks: d.d=0, pattern lock, 4D split");
  verify->add_option("--config", config_path, "run configuration file");
  verify->add_option("--out", out_dir, "report directory");
  verify->add_option("--tamper", tamper,
                     "fault injection: flip the sign of block ROW:COL in the fixture");

  auto* runc = app.add_subcommand("run", "time-domain run from a configuration file");
  runc->add_option("--config", config_path, "run configuration file")->required();
  std::string run_out;
  runc->add_option("--out", run_out, "output directory (overrides [output] dir)");
  runc->add_option("--threads", threads, "worker threads (overrides [run] threads)");
  runc->add_option("--snapshot-every", snapshot_every, "snapshot cadence (overrides config)");

  auto* rows = app.add_subcommand("rows", "print the instantiation table of a model");
  rows->add_option("model", model_name, "maxwell | schrodinger | elasticity | yang-mills")
      ->required();

  auto* dump = app.add_subcommand("dump-operators", "write incidence triplets and the pattern");
  dump->add_option("--config", config_path, "grid source (optional)");
  dump->add_option("--out", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(verify)) return cmd_verify(config_path, out_dir, tamper);
    if (app.got_subcommand(runc)) return cmd_run(config_path, run_out, threads, snapshot_every);
    if (app.got_subcommand(rows)) return cmd_rows(model_name);
    if (app.got_subcommand(dump)) return cmd_dump(config_path, out_dir);
  } catch (const DivergedError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
