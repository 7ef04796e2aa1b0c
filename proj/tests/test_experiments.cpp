#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "phasegraph/experiments.hpp"

using namespace phasegraph;

TEST_CASE("family construction covers all four families") {
  StabilityExperimentConfig cfg;
  cfg.family = "trivial";
  cfg.extent = 21;
  CHECK(make_family(cfg).system.lattice().boundary == Boundary::free);
  cfg.family = "periodic";
  cfg.extent = 20;
  CHECK(make_family(cfg).solution.residual_inf < 1e-13);
  cfg.family = "rotwave";
  cfg.extent = 16;
  CHECK(make_family(cfg).solution.residual_inf < 1e-10);
  cfg.family = "chain";
  cfg.extent = 101;
  CHECK(make_family(cfg).system.lattice().is_1d());
  cfg.family = "nonsense";
  CHECK_THROWS(make_family(cfg));
}

TEST_CASE("initial perturbations have the requested l1 size") {
  StabilityExperimentConfig cfg;
  cfg.extent = 31;
  cfg.eps = 2e-3;
  cfg.remove_mean = false;
  FamilySetup setup = make_family(cfg);
  for (const char* init : {"indicator", "gaussian", "random"}) {
    cfg.init = init;
    Vector psi = make_initial_perturbation(cfg, setup.system, setup.center);
    CHECK(norm_l1(psi) == doctest::Approx(cfg.eps).epsilon(1e-12));
  }
  cfg.remove_mean = true;
  cfg.init = "indicator";
  Vector psi = make_initial_perturbation(cfg, setup.system, setup.center);
  CHECK(std::abs(psi.sum()) < 1e-15);
  cfg.init = "nonsense";
  CHECK_THROWS(make_initial_perturbation(cfg, setup.system, setup.center));
}

TEST_CASE("the d >= 2 gate refuses chains and names the dimension") {
  StabilityExperimentConfig cfg;
  cfg.family = "chain";
  cfg.extent = 1001;
  cfg.t_end = 4.0;
  cfg.fit_t_min = 0.5;
  cfg.fit_t_max = 4.0;
  bool refused = false;
  try {
    run_stability_experiment(cfg);
  } catch (const GateRefusal& e) {
    refused = true;
    CHECK(std::abs(e.gate.vg.d - 1.0) <= 0.05);
    CHECK_FALSE(e.gate.dimension_ok);
    CHECK(std::string(e.what()).find("d >= 2") != std::string::npos);
  }
  CHECK(refused);

  // the same configuration can be forced for negative demos
  cfg.force_run = true;
  cfg.output_points = 24;
  StabilityReport report = run_stability_experiment(cfg);
  CHECK_FALSE(report.gate.pass);
  CHECK_FALSE(report.verdict);
}

TEST_CASE("gate passes for the trivial family on a moderate lattice") {
  StabilityExperimentConfig cfg;
  cfg.family = "trivial";
  cfg.extent = 81;
  FamilySetup setup = make_family(cfg);
  InducedGraphBundle bundle = linearize(setup.system, setup.solution);
  GateSummary gate = evaluate_gate(cfg, setup, bundle);
  CHECK(gate.pass);
  CHECK(gate.hypotheses.pass());
  CHECK(gate.vg.d > 1.9);
  CHECK(gate.delta.pass);
  CHECK(std::isfinite(gate.poincare.sup));
  CHECK_FALSE(gate.rough.has_value());
}

TEST_CASE("stability run on a trivial lattice decays at the theorem rates") {
  StabilityExperimentConfig cfg;
  cfg.family = "trivial";
  cfg.extent = 81;
  cfg.eps = 1e-3;
  cfg.t_end = 20.0;
  cfg.fit_t_min = 3.0;
  cfg.fit_t_max = 18.0;
  cfg.output_points = 28;
  StabilityReport report = run_stability_experiment(cfg);
  CHECK(report.gate.pass);
  CHECK(std::abs(report.fit_linf.slope + 1.0) <= 0.2);
  CHECK(std::abs(report.fit_l2.slope + 0.5) <= 0.15);
  CHECK(report.l1_sup_ratio <= 3.0);
  CHECK_FALSE(report.trajectory.boundary_flagged);
  // monotone-ish decay across the fit window
  CHECK(report.trajectory.linf.back() < report.trajectory.linf[1]);
  CHECK(report.verdict);

  // determinism: identical config gives byte-identical trajectories
  StabilityReport again = run_stability_experiment(cfg);
  CHECK(again.trajectory_csv() == report.trajectory_csv());
  CHECK(again.to_json()["config_hash"] == report.to_json()["config_hash"]);
}

TEST_CASE("remainder bound holds over random perturbations") {
  PhaseSystem sys({41, 41, 1, Boundary::free}, Coupling::sine(), 0.0);
  PhaseLockedSolution sol = trivial_lags(sys);
  InducedGraphBundle bundle = linearize(sys, sol);
  RemainderBoundReport report = verify_remainder_bound(sys, sol, bundle, 1000, 0.5, 41);
  CHECK(report.violations == 0);
  CHECK(report.max_ratio <= 1.0);
  CHECK(report.max_ratio > 0.0);
  CHECK(report.bound_constant == doctest::Approx(1.0 / 10.0));  // sup|H''| / (2(M+1))

  // pure gauge shifts: both sides vanish
  Vector gauge = Vector::Constant(sys.size(), 0.3);
  CHECK(norm_l1(nonlinear_remainder(sys, sol, bundle, gauge)) < 1e-12);
  CHECK(q_form(bundle.neighborhoods, gauge) == 0.0);

  CHECK_THROWS(verify_remainder_bound(sys, sol, bundle, 10, 1.5, 1));
}

TEST_CASE("q-form ratio decays along the semigroup") {
  PhaseSystem sys({41, 41, 1, Boundary::torus}, Coupling::sine(), 0.0);
  InducedGraphBundle bundle = linearize(sys, trivial_lags(sys));
  LatticeSpec lat{41, 41, 1, Boundary::torus};

  QSemigroupReport degenerate =
      verify_q_semigroup_decay(bundle, Vector::Constant(sys.size(), 1.0), {});
  CHECK(degenerate.degenerate);

  Vector psi = Vector::Zero(sys.size());
  psi[lat.index_of({20, 20})] = 1.0;
  const auto times = log_time_grid(4.0, 16.0, 10);
  QSemigroupReport report = verify_q_semigroup_decay(bundle, psi, times);
  CHECK_FALSE(report.degenerate);
  CHECK(report.eta_half > 0.0);
  CHECK(report.nonincreasing);

  // cross-check against the gradient-decay estimator: both see eta near 1,
  // their systematic finite-time biases dominate the tiny OLS stderr
  GradientDecayReport grad = fit_gradient_decay(
      bundle, lat.index_of({20, 20}), lat.index_of({21, 20}), {}, times);
  CHECK(std::abs(2.0 * report.eta_half - grad.eta) < 0.25);
  CHECK(2.0 * report.eta_half == doctest::Approx(1.0).epsilon(0.25));
  CHECK(grad.eta == doctest::Approx(1.0).epsilon(0.25));
}

TEST_CASE("integral lemma ratios stay bounded") {
  std::vector<double> grid{0.0};
  for (double t : log_time_grid(1.0, 1000.0, 18)) grid.push_back(t);

  IntegralLemmaReport a = verify_integral_lemma(0.5, 2.0, grid);
  CHECK(a.min_exponent == doctest::Approx(0.5));
  CHECK(a.bounded);
  CHECK(a.sup_ratio < 2.0);
  CHECK(a.integrals.front() == 0.0);  // t = 0

  // the pair used for the l-infinity step with d = 2, eta = 1
  IntegralLemmaReport b = verify_integral_lemma(1.0, 2.0, grid);
  CHECK(b.min_exponent == doctest::Approx(1.0));
  CHECK(b.bounded);
  CHECK(b.sup_ratio < 2.0);

  // fitted decay of the integral tracks the predicted exponent
  std::vector<double> ts(a.times.begin() + 1, a.times.end());
  std::vector<double> vals(a.integrals.begin() + 1, a.integrals.end());
  DecayFit fit = fit_decay(ts, vals, 10.0, 1000.0, "integral");
  CHECK(fit.slope == doctest::Approx(-0.5).epsilon(0.08));

  CHECK_THROWS(verify_integral_lemma(1.0, 1.0, grid));
  CHECK_THROWS(verify_integral_lemma(1.0, 0.5, grid));
  CHECK_THROWS(verify_integral_lemma(-0.5, 2.0, grid));
}

TEST_CASE("spectrum probe matches the closed-form torus eigenvalues") {
  double previous_gap = std::numeric_limits<double>::infinity();
  for (int extent : {11, 21, 41}) {
    PhaseSystem sys({extent, extent, 1, Boundary::torus}, Coupling::sine(), 0.0);
    InducedGraphBundle bundle = linearize(sys, trivial_lags(sys));
    SpectrumProbe probe = spectrum_probe(bundle);
    CHECK(probe.method == "dense");
    CHECK(std::abs(probe.lambda_max) < 1e-9);  // constants in the kernel
    const double pi = std::numbers::pi;
    const double gap_formula = 2.0 - 2.0 * std::cos(2.0 * pi / extent);
    CHECK(probe.spectral_gap == doctest::Approx(gap_formula).epsilon(1e-9));
    const int k = (extent - 1) / 2;
    const double min_formula = 4.0 * std::cos(2.0 * pi * k / extent) - 4.0;
    CHECK(probe.lambda_min == doctest::Approx(min_formula).epsilon(1e-9));
    CHECK(probe.spectral_gap < previous_gap);  // the gap closes with extent
    previous_gap = probe.spectral_gap;
  }
}

TEST_CASE("lanczos path agrees with the closed form on a larger torus") {
  PhaseSystem sys({51, 51, 1, Boundary::torus}, Coupling::sine(), 0.0);
  InducedGraphBundle bundle = linearize(sys, trivial_lags(sys));
  SpectrumProbe probe = spectrum_probe(bundle);
  CHECK(probe.method == "lanczos");
  const double pi = std::numbers::pi;
  CHECK(probe.spectral_gap ==
        doctest::Approx(2.0 - 2.0 * std::cos(2.0 * pi / 51.0)).epsilon(1e-6));
  CHECK(probe.lambda_min ==
        doctest::Approx(4.0 * std::cos(2.0 * pi * 25.0 / 51.0) - 4.0).epsilon(1e-6));
}
