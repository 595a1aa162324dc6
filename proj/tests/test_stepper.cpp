#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "gcl/stepper.hpp"

using namespace gcl;

TEST_CASE("cfl bounds") {
  auto cx = build_complex(3, {4, 4, 4}, {1, 1, 1});
  CHECK(cfl_bound(maxwell_spec(1, 1), cx) == Catch::Approx(1.0 / std::sqrt(3.0)));
  // P-wave speed sqrt((lambda+2mu)/rho) = sqrt(3)
  CHECK(cfl_bound(elasticity_spec(1, 1, 1), cx) == Catch::Approx(1.0 / 3.0));
  auto cx2 = build_complex(3, {4, 4, 4}, {2, 2, 2});
  CHECK(cfl_bound(maxwell_spec(1, 1), cx2) ==
        Catch::Approx(2.0 * cfl_bound(maxwell_spec(1, 1), cx)));
  // split Schrodinger leapfrog: 0.9 / (hbar/2m * 12/dx^2 + Vmax/hbar)
  CHECK(cfl_bound(schrodinger_spec(1, 1, {}), cx) == Catch::Approx(0.9 / 6.0));
  auto withV = schrodinger_spec(1, 1, [](const std::array<double, 3>&) { return 2.0; });
  CHECK(cfl_bound(withV, cx) == Catch::Approx(0.9 / 8.0));
}

TEST_CASE("zero field stays zero") {
  auto cx = CubicalComplex::torus(3, {4, 4, 4}, {1, 1, 1});
  for (auto m : {maxwell_spec(1, 1), elasticity_spec(1, 1, 1), schrodinger_spec(1, 1, {})}) {
    Simulation sim(m, cx);
    const double dt = 0.5 * cfl_bound(m, cx);
    for (int s = 0; s < 20; ++s) sim.step(dt);
    for (int i = 0; i < kNumSlots; ++i) CHECK(sim.field().at(i).norm_max() == 0.0);
  }
}

TEST_CASE("maxwell 1D wave: kinematic row stays exact and energy is conserved") {
  const int n = 64;
  const double h = 1.0 / n;
  auto cx = CubicalComplex::torus(3, {n, 1, 1}, {h, 1, 1});
  auto m = maxwell_spec(1.0, 1.0);
  Simulation sim(m, cx);
  const double dt = 0.5 * cfl_bound(m, cx);
  const double k = 2.0 * M_PI;
  sim.set_var_vector("e", [&](const std::array<double, 3>& x) {
    return std::array<double, 3>{0.0, std::sin(k * x[0]), 0.0};
  });
  sim.set_var_vector("b", [&](const std::array<double, 3>& x) {
    return std::array<double, 3>{0.0, 0.0, std::sin(k * (x[0] + 0.5 * dt))};
  });

  auto div_b_max = [&]() {
    const Cochain& b = sim.field()[Slot::f2];
    auto d2 = exterior_derivative(cx, 2);
    Cochain db(cx, 3, 1);
    d2.apply(b.values.data(), db.values.data());
    return db.norm_max();
  };
  CHECK(div_b_max() <= 1e-14);

  double e0 = 0.0;
  for (int s = 0; s < 200; ++s) {
    sim.step(dt);
    if (s == 0) e0 = sim.invariant();
  }
  CHECK(div_b_max() <= 1e-13 * sim.field()[Slot::f2].norm_max());
  CHECK(sim.invariant() == Catch::Approx(e0).epsilon(1e-12));
  CHECK(sim.field()[Slot::F1].norm_max() > 0.5);  // the wave is alive
}

TEST_CASE("constant velocity produces no strain on a torus") {
  auto cx = CubicalComplex::torus(3, {4, 4, 4}, {0.5, 0.5, 0.5});
  auto m = elasticity_spec(1.0, 1.0, 1.0);
  Simulation sim(m, cx);
  sim.set_var_vector("u", [](const std::array<double, 3>&) {
    return std::array<double, 3>{0.7, -0.2, 0.1};
  });
  const double dt = 0.5 * cfl_bound(m, cx);
  for (int s = 0; s < 50; ++s) sim.step(dt);
  CHECK(sim.field()[Slot::f1].norm_max() == 0.0);
  CHECK(sim.invariant() == Catch::Approx(sim.invariant()));  // finite
  // zero strain energy for rigid motion
  std::array<const HodgeMap*, kNumSlots> hs{};
  hs[static_cast<size_t>(slot_index(Slot::f1))] = sim.pairing_hodge(Slot::f1);
  GeneralField strain_only = zero_field(cx, 3);
  strain_only[Slot::f1] = sim.field()[Slot::f1];
  CHECK(energy(strain_only, hs) == 0.0);
}

TEST_CASE("divergence is detected and reported with a step index") {
  const int n = 16;
  auto cx = CubicalComplex::torus(3, {n, n, n}, {1.0 / n, 1.0 / n, 1.0 / n});
  auto m = maxwell_spec(1.0, 1.0);
  Simulation sim(m, cx);
  std::mt19937 rng(17);
  for (double& v : sim.field()[Slot::F1].values)
    v = (static_cast<double>(rng()) / 4294967296.0 - 0.5) * 1e-3;
  const double dt = 1.2 * cfl_bound(m, cx);
  bool caught = false;
  try {
    for (int s = 0; s < 4000; ++s) sim.step(dt);
  } catch (const DivergedError& e) {
    caught = true;
    CHECK(e.step > 0);
  }
  CHECK(caught);
}

TEST_CASE("at the stability bound a smooth run stays bounded") {
  const int n = 16;
  auto cx = CubicalComplex::torus(3, {n, n, n}, {1.0 / n, 1.0 / n, 1.0 / n});
  auto m = maxwell_spec(1.0, 1.0);
  Simulation sim(m, cx);
  const double dt = cfl_bound(m, cx);
  const double k = 2.0 * M_PI;
  sim.set_var_vector("e", [&](const std::array<double, 3>& x) {
    return std::array<double, 3>{0.0, std::sin(k * x[0]), 0.0};
  });
  sim.set_var_vector("b", [&](const std::array<double, 3>& x) {
    return std::array<double, 3>{0.0, 0.0, std::sin(k * (x[0] + 0.5 * dt))};
  });
  const double m0 = std::max(sim.field()[Slot::F1].norm_max(), sim.field()[Slot::f2].norm_max());
  for (int s = 0; s < 2000; ++s) sim.step(dt);
  const double m1 = std::max(sim.field()[Slot::F1].norm_max(), sim.field()[Slot::f2].norm_max());
  CHECK(m1 <= 1.01 * m0);
}

TEST_CASE("leapfrog time reversal returns the initial field") {
  const int n = 12;
  auto cx = CubicalComplex::torus(3, {n, n, n}, {1.0 / n, 1.0 / n, 1.0 / n});
  auto m = maxwell_spec(1.0, 1.0);
  Simulation sim(m, cx);
  const double k = 2.0 * M_PI;
  sim.set_var_vector("e", [&](const std::array<double, 3>& x) {
    return std::array<double, 3>{std::sin(k * x[1]), std::sin(k * x[2]), std::sin(k * x[0])};
  });
  const GeneralField before = sim.field();
  const double dt = 0.4 * cfl_bound(m, cx);
  for (int s = 0; s < 50; ++s) sim.step(dt);
  for (int s = 0; s < 50; ++s) sim.step(-dt);
  for (Slot s : {Slot::F1, Slot::f2}) {
    const auto& a = before[s].values;
    const auto& b = sim.field()[s].values;
    double scale = 0.0, diff = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
      scale = std::max(scale, std::fabs(a[i]));
      diff = std::max(diff, std::fabs(a[i] - b[i]));
    }
    CHECK(diff <= 1e-10 * std::max(scale, 1.0));
  }
}

TEST_CASE("schrodinger staggered norm is conserved") {
  const int n = 48;
  const double L = 1.0, h = L / n;
  auto cx = CubicalComplex::torus(3, {n, 1, 1}, {h, 1, 1});
  auto m = schrodinger_spec(1.0, 1.0, {});
  Simulation sim(m, cx);
  sim.set_var_scalar("phi_R", [&](const std::array<double, 3>& x) {
    const double d = x[0] - 0.5;
    return std::exp(-d * d / 0.01) * std::cos(40.0 * x[0]);
  });
  sim.set_var_scalar("phi_I", [&](const std::array<double, 3>& x) {
    const double d = x[0] - 0.5;
    return std::exp(-d * d / 0.01) * std::sin(40.0 * x[0]);
  });
  const double dt = 0.5 * cfl_bound(m, cx);
  double n0 = 0.0;
  for (int s = 0; s < 500; ++s) {
    sim.step(dt);
    if (s == 0) n0 = sim.invariant();
  }
  CHECK(sim.invariant() == Catch::Approx(n0).epsilon(1e-12));
  CHECK(sim.state_norm() > 0.0);
}

TEST_CASE("thread count does not change results bitwise") {
  const int n = 12;
  auto cx = CubicalComplex::torus(3, {n, n, n}, {1.0 / n, 1.0 / n, 1.0 / n});
  auto m = elasticity_spec(1.0, 2.0, 0.5);
  auto init = [&](Simulation& sim) {
    sim.set_var_vector("u", [](const std::array<double, 3>& x) {
      return std::array<double, 3>{std::sin(2 * M_PI * x[0]), std::cos(2 * M_PI * x[1]),
                                   std::sin(2 * M_PI * (x[0] + x[2]))};
    });
  };
  Simulation s1(m, cx, 1), s4(m, cx, 4);
  init(s1);
  init(s4);
  const double dt = 0.5 * cfl_bound(m, cx);
  for (int s = 0; s < 25; ++s) {
    s1.step(dt);
    s4.step(dt);
  }
  for (int i = 0; i < kNumSlots; ++i) CHECK(s1.field().at(i).values == s4.field().at(i).values);
}

TEST_CASE("run() collects diagnostics and reports drift") {
  const int n = 16;
  auto cx = CubicalComplex::torus(3, {n, 1, 1}, {1.0 / n, 1, 1});
  auto m = maxwell_spec(1.0, 1.0);
  Simulation sim(m, cx);
  const double dt = 0.5 * cfl_bound(m, cx);
  sim.set_var_vector("e", [&](const std::array<double, 3>& x) {
    return std::array<double, 3>{0.0, std::sin(2 * M_PI * x[0]), 0.0};
  });
  sim.set_var_vector("b", [&](const std::array<double, 3>& x) {
    return std::array<double, 3>{0.0, 0.0, std::sin(2 * M_PI * (x[0] + 0.5 * dt))};
  });
  auto plan = plan_stepping(m, cx, dt, 200);
  RunOptions opt;
  opt.diagnostics_every = 10;
  opt.probes.push_back(Probe{{0.25, 0.5, 0.5}});
  auto res = run(sim, plan, opt);
  CHECK(!res.diverged);
  CHECK(res.rows.size() >= 20);
  CHECK(res.max_energy_drift < 1e-12);
  CHECK(!res.probe_columns.empty());
  // probe columns carry per-orientation values of both state variables
  bool found = false;
  for (const auto& c : res.probe_columns)
    if (c == "p0_e_y") found = true;
  CHECK(found);
}
