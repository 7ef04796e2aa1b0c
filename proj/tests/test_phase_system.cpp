#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "phasegraph/phase_system.hpp"
#include "phasegraph/solutions.hpp"

using namespace phasegraph;

namespace {
constexpr double kPi = std::numbers::pi;

PhaseSystem sine_lattice(int n, Boundary b = Boundary::free, double omega = 0.0) {
  return PhaseSystem({n, n, 1, b}, Coupling::sine(), omega);
}
}  // namespace

TEST_CASE("angle wrapping") {
  CHECK(wrap_angle(0.0) == 0.0);
  CHECK(wrap_angle(3.0 * kPi) == doctest::Approx(kPi));
  CHECK(wrap_angle(-kPi / 2.0) == doctest::Approx(-kPi / 2.0));
  CHECK(wrap_positive(-kPi / 2.0) == doctest::Approx(1.5 * kPi));
  CHECK(wrap_positive(2.0 * kPi) == 0.0);
}

TEST_CASE("zero lags solve the uniform sine system") {
  PhaseSystem sys = sine_lattice(7, Boundary::free, 1.3);
  Vector lags = Vector::Zero(sys.size());
  Vector res = phase_lag_residual(sys, lags, 1.3);
  CHECK(norm_linf(res) == 0.0);
}

TEST_CASE("a frequency offset shows up as a constant residual") {
  PhaseSystem sys = sine_lattice(6, Boundary::torus, 0.7);
  Vector lags = Vector::Zero(sys.size());
  Vector res = phase_lag_residual(sys, lags, 0.8);
  for (int v = 0; v < sys.size(); ++v) CHECK(res[v] == doctest::Approx(-0.1));
}

TEST_CASE("newton converges to the trivial branch from small noise") {
  PhaseSystem sys = sine_lattice(9, Boundary::free, 0.0);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> noise(-0.01, 0.01);
  Vector initial(sys.size());
  for (int v = 0; v < sys.size(); ++v) initial[v] = noise(rng);
  PhaseLockedSolution sol = solve_phase_locked(sys, initial);
  CHECK(sol.residual_inf < 1e-10);
  CHECK(sol.Omega == 0.0);
  for (int v = 0; v < sys.size(); ++v)
    CHECK(std::min(sol.lags[v], 2.0 * kPi - sol.lags[v]) < 1e-9);
}

TEST_CASE("newton recovers a manufactured nonuniform-frequency solution") {
  PhaseSystem base = sine_lattice(5, Boundary::torus, 0.0);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> amp(-0.2, 0.2);
  Vector target(base.size());
  for (int v = 0; v < base.size(); ++v) target[v] = amp(rng);

  // manufacture omega so that (target, Omega*) is an exact root
  const double omega_star = 0.3;
  Vector res = phase_lag_residual(base, target, 0.0);
  Vector omega(base.size());
  for (int v = 0; v < base.size(); ++v) omega[v] = omega_star - res[v];
  PhaseSystem sys({5, 5, 1, Boundary::torus}, Coupling::sine(), omega);

  SolveOptions opts;
  opts.pin_value = target.sum();  // the sum constraint pins the gauge
  PhaseLockedSolution sol = solve_phase_locked(sys, target * 1.05, opts);
  CHECK(sol.residual_inf < 1e-10);
  CHECK(sol.Omega == doctest::Approx(omega_star).epsilon(1e-8));
}

TEST_CASE("already-a-root initial data converges immediately") {
  LatticeSpec lat{10, 10, 1, Boundary::torus};
  PhaseSystem sys(lat, Coupling::sine(), 0.0);
  PhaseLockedSolution seed = doubly_periodic_lags(sys, 5, 5);
  SolveOptions opts;
  opts.pin_vertex = 0;
  opts.pin_value = seed.lags[0];
  PhaseLockedSolution sol = solve_phase_locked(sys, seed.lags, opts);
  CHECK(sol.newton_iterations <= 1);
  CHECK(sol.residual_inf < 1e-12);
}

TEST_CASE("perturbation rhs vanishes at the steady state") {
  PhaseSystem sys = sine_lattice(8);
  PhaseLockedSolution sol = trivial_lags(sys);
  Vector rhs = perturbation_rhs(sys, sol, Vector::Zero(sys.size()));
  CHECK(norm_linf(rhs) <= 1e-12);
}

TEST_CASE("gauge invariance of the perturbation rhs") {
  PhaseSystem sys = sine_lattice(6);
  PhaseLockedSolution sol = trivial_lags(sys);
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> grid(0, 1023);
  Vector psi(sys.size());
  // dyadic perturbations keep psi + c exact, so the invariance is bitwise
  for (int v = 0; v < sys.size(); ++v) psi[v] = grid(rng) * 0x1.0p-20;
  Vector base = perturbation_rhs(sys, sol, psi);
  for (double c : {0.5, 2.0, -4.0}) {
    Vector shifted = perturbation_rhs(sys, sol, psi.array() + c);
    for (int v = 0; v < sys.size(); ++v) CHECK(shifted[v] == base[v]);
  }
}

TEST_CASE("rhs of a single-site perturbation matches the hand value") {
  LatticeSpec lat{9, 9, 1, Boundary::free};
  PhaseSystem sys(lat, Coupling::sine(), 0.0);
  PhaseLockedSolution sol = trivial_lags(sys);
  const double eps = 1e-3;
  const int mid = lat.index_of({4, 4});
  Vector psi = Vector::Zero(sys.size());
  psi[mid] = eps;
  Vector rhs = perturbation_rhs(sys, sol, psi);
  CHECK(rhs[mid] == doctest::Approx(-4.0 * std::sin(eps)).epsilon(1e-14));
  CHECK(rhs[lat.index_of({5, 4})] == doctest::Approx(std::sin(eps)).epsilon(1e-14));
  CHECK(rhs[lat.index_of({0, 0})] == 0.0);
}

TEST_CASE("integration conserves the perturbation sum for odd coupling") {
  PhaseSystem sys = sine_lattice(7, Boundary::free);
  PhaseLockedSolution sol = trivial_lags(sys);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> amp(-1e-3, 1e-3);
  Vector psi0(sys.size());
  for (int v = 0; v < sys.size(); ++v) psi0[v] = amp(rng);

  IntegrationControls controls;
  controls.output_times = {0.0, 1.0, 2.0, 5.0, 10.0};
  PerturbationTrajectory traj =
      integrate_perturbation(sys, sol, psi0, controls, {10.0});
  REQUIRE(traj.snapshots.size() == 1);
  CHECK(std::abs(traj.snapshots[0].sum() - psi0.sum()) < 1e-8);
  CHECK(traj.times.front() == 0.0);
  CHECK(traj.l1.front() == doctest::Approx(norm_l1(psi0)));
}

TEST_CASE("zero and uniform initial data stay put") {
  PhaseSystem sys = sine_lattice(6, Boundary::torus);
  PhaseLockedSolution sol = trivial_lags(sys);
  IntegrationControls controls;
  controls.output_times = {0.0, 2.0, 7.0};

  PerturbationTrajectory zero =
      integrate_perturbation(sys, sol, Vector::Zero(sys.size()), controls);
  for (double v : zero.linf) CHECK(v <= 1e-12);

  const double c = 0.37;
  PerturbationTrajectory uniform = integrate_perturbation(
      sys, sol, Vector::Constant(sys.size(), c), controls, {7.0});
  REQUIRE(uniform.snapshots.size() == 1);
  for (int v = 0; v < sys.size(); ++v)
    CHECK(uniform.snapshots[0][v] == doctest::Approx(c).epsilon(1e-10));
}

TEST_CASE("boundary mass is tracked in free mode and absent on the torus") {
  PhaseSystem sys = sine_lattice(7, Boundary::free);
  PhaseLockedSolution sol = trivial_lags(sys);
  Vector psi0 = Vector::Zero(sys.size());
  psi0[sys.lattice().index_of({3, 3})] = 1e-2;
  IntegrationControls controls;
  controls.output_times = {0.0, 1.0, 4.0, 9.0};
  PerturbationTrajectory traj = integrate_perturbation(sys, sol, psi0, controls);
  CHECK(traj.boundary_mass.front() == 0.0);
  CHECK(traj.boundary_mass.back() > 0.0);  // the front reaches the edge
  CHECK(traj.boundary_flagged);            // 7x7 is far too small to contain it

  CHECK(boundary_ring({7, 7, 1, Boundary::torus}).empty());
  CHECK(boundary_ring({7, 7, 1, Boundary::free}).size() == 24);
}

TEST_CASE("table couplings interpolate sin exactly enough") {
  std::vector<double> samples(32);
  for (int j = 0; j < 32; ++j) samples[j] = std::sin(2.0 * kPi * j / 32.0);
  Coupling table = Coupling::from_table(samples);
  CHECK(table.name() == "table");
  CHECK(table.odd());
  for (double x : {0.1, 1.0, 2.5, 4.0, 6.0}) {
    CHECK(table.h(x) == doctest::Approx(std::sin(x)).epsilon(1e-12));
    CHECK(table.dh(x) == doctest::Approx(std::cos(x)).epsilon(1e-12));
    CHECK(table.ddh(x) == doctest::Approx(-std::sin(x)).epsilon(1e-12));
  }
}

TEST_CASE("non-periodic couplings are rejected") {
  CHECK_THROWS(Coupling([](double x) { return x; }, [](double) { return 1.0; },
                        [](double) { return 0.0; }, "identity", true));
}

TEST_CASE("solution json carries lags, Omega and residual") {
  PhaseSystem sys = sine_lattice(5, Boundary::torus, 0.4);
  PhaseLockedSolution sol = trivial_lags(sys);
  auto j = sol.to_json(sys);
  CHECK(j["omega"] == 0.4);
  CHECK(j["H"] == "sin");
  CHECK(j["Omega"] == 0.4);
  CHECK(j["lags"].size() == static_cast<std::size_t>(sys.size()));
  CHECK(j["residual"].get<double>() <= 1e-14);
}
