#include "phasegraph/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include <Eigen/Dense>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace phasegraph {

nlohmann::json StabilityExperimentConfig::to_json() const {
  return {{"family", family},
          {"extent", extent},
          {"n1", n1},
          {"n2", n2},
          {"chain_range", chain_range},
          {"init", init},
          {"eps", eps},
          {"gaussian_sigma", gaussian_sigma},
          {"random_support", random_support},
          {"t_end", t_end},
          {"output_points", output_points},
          {"fit_t_min", fit_t_min},
          {"fit_t_max", fit_t_max},
          {"seed", seed},
          {"snapshot_times", snapshot_times},
          {"remove_mean", remove_mean},
          {"force_run", force_run},
          {"rel_tol", rel_tol},
          {"abs_tol", abs_tol},
          {"gate_dimension_threshold", gate_dimension_threshold}};
}

std::string StabilityExperimentConfig::hash() const {
  const std::size_t h = std::hash<std::string>{}(to_json().dump());
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016zx", h);
  return buf;
}

nlohmann::json GateSummary::to_json() const {
  nlohmann::json j{{"hypotheses", hypotheses.to_json()},
                   {"vg", vg.to_json()},
                   {"delta", delta.to_json()},
                   {"pi", poincare.to_json()},
                   {"dimension_ok", dimension_ok},
                   {"pass", pass},
                   {"refusal_reason", refusal_reason}};
  if (rough) j["rough"] = rough->to_json();
  return j;
}

FamilySetup make_family(const StabilityExperimentConfig& cfg) {
  if (cfg.family == "trivial") {
    LatticeSpec lat{cfg.extent, cfg.extent, 1, Boundary::free};
    PhaseSystem sys(lat, Coupling::sine(), 0.0);
    PhaseLockedSolution sol = trivial_lags(sys);
    return {std::move(sys), std::move(sol), lat.index_of({cfg.extent / 2, cfg.extent / 2})};
  }
  if (cfg.family == "trivial_torus") {
    LatticeSpec lat{cfg.extent, cfg.extent, 1, Boundary::torus};
    PhaseSystem sys(lat, Coupling::sine(), 0.0);
    PhaseLockedSolution sol = trivial_lags(sys);
    return {std::move(sys), std::move(sol), lat.index_of({cfg.extent / 2, cfg.extent / 2})};
  }
  if (cfg.family == "rotwave") {
    RotatingWaveSpec spec;
    spec.extent = cfg.extent;
    RotatingWaveResult wave = rotating_wave_lags(spec);
    // perturbations probe the homogeneous region away from the wave core:
    // next to the missing core edges the pre-asymptotic transient swamps the
    // algebraic window at desk extents
    const int off = cfg.extent / 5;
    const int center =
        wave.system.lattice().index_of({cfg.extent / 2 + off, cfg.extent / 2 + off});
    return {std::move(wave.system), std::move(wave.solution), center};
  }
  if (cfg.family == "periodic") {
    LatticeSpec lat{cfg.extent, cfg.extent, 1, Boundary::torus};
    PhaseSystem sys(lat, Coupling::sine(), 0.0);
    PhaseLockedSolution sol = doubly_periodic_lags(sys, cfg.n1, cfg.n2);
    return {std::move(sys), std::move(sol), lat.index_of({cfg.extent / 2, cfg.extent / 2})};
  }
  if (cfg.family == "chain") {
    LatticeSpec lat{cfg.extent, 1, cfg.chain_range, Boundary::free};
    PhaseSystem sys(lat, Coupling::sine(), 0.0);
    PhaseLockedSolution sol = chain_lags(sys);
    return {std::move(sys), std::move(sol), lat.index_of({cfg.extent / 2, 0})};
  }
  throw std::invalid_argument("unknown solution family: " + cfg.family);
}

Vector make_initial_perturbation(const StabilityExperimentConfig& cfg,
                                 const PhaseSystem& sys, int center) {
  if (!(cfg.eps > 0.0)) throw std::invalid_argument("eps must be positive");
  const int n = sys.size();
  Vector psi = Vector::Zero(n);
  if (cfg.init == "indicator") {
    psi[center] = cfg.eps;
  } else if (cfg.init == "gaussian") {
    const Coord c0 = sys.lattice().coord_of(center);
    for (int v = 0; v < n; ++v) {
      const Coord c = sys.lattice().coord_of(v);
      const double dx = c.x - c0.x, dy = c.y - c0.y;
      psi[v] = std::exp(-(dx * dx + dy * dy) / (2.0 * cfg.gaussian_sigma * cfg.gaussian_sigma));
    }
    psi *= cfg.eps / norm_l1(psi);
  } else if (cfg.init == "random") {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_int_distribution<int> pick(0, n - 1);
    std::uniform_real_distribution<double> amp(-1.0, 1.0);
    for (int k = 0; k < cfg.random_support; ++k) psi[pick(rng)] += amp(rng);
    const double l1 = norm_l1(psi);
    if (l1 == 0.0) psi[center] = 1.0;
    psi *= cfg.eps / norm_l1(psi);
  } else {
    throw std::invalid_argument("unknown initializer: " + cfg.init);
  }
  if (cfg.remove_mean) psi.array() -= psi.mean();
  return psi;
}

namespace {

std::vector<int> probe_centers(const PhaseSystem& sys) {
  const LatticeSpec& lat = sys.lattice();
  const int cx = lat.nx / 2, cy = lat.is_1d() ? 0 : lat.ny / 2;
  std::vector<int> centers;
  if (lat.is_1d()) {
    for (int dx : {-4, -2, 0, 2, 4}) centers.push_back(lat.index_of({cx + dx, 0}));
  } else {
    centers.push_back(lat.index_of({cx, cy}));
    centers.push_back(lat.index_of({cx - 3, cy}));
    centers.push_back(lat.index_of({cx + 3, cy}));
    centers.push_back(lat.index_of({cx, cy - 3}));
    centers.push_back(lat.index_of({cx, cy + 3}));
  }
  return centers;
}

}  // namespace

GateSummary evaluate_gate(const StabilityExperimentConfig& cfg, const FamilySetup& setup,
                          const InducedGraphBundle& bundle) {
  GateSummary gate;
  gate.hypotheses = check_hypotheses(setup.system, setup.solution);

  // hypothesis 4.4 runs on the base graph when its measure is uniform and on
  // the loop-augmented graph otherwise
  const WeightedGraph& g = bundle.uniform_measure ? bundle.base : bundle.augmented;

  const auto centers = probe_centers(setup.system);
  int guard = std::numeric_limits<int>::max();
  for (int c : centers) guard = std::min(guard, ball_radius_guard(g, c));
  if (guard < 8) {
    gate.refusal_reason = "lattice too small for volume probes";
    return gate;
  }
  const int r_max = guard;
  const int r_min = std::max(3, r_max / 5);
  gate.vg = check_vg(g, centers, default_vg_radii(r_min, r_max, 10));
  gate.dimension_ok = gate.vg.d >= cfg.gate_dimension_threshold;

  gate.delta = check_delta(g);

  std::vector<int> pi_radii;
  for (int r : {2, 4, 8})
    if (2 * r <= guard) pi_radii.push_back(r);
  if (pi_radii.empty()) pi_radii.push_back(1);
  gate.poincare = check_poincare(g, centers, pi_radii);

  if (cfg.family == "rotwave") {
    // certificate against the unit lattice, identity map, with the
    // candidate constants from the rough-isometry construction
    WeightedGraph g1 = build_lattice_graph(setup.system.lattice());
    DeltaReport d2 = check_delta(g);
    RoughCandidate candidate;
    candidate.a = 2.0;
    candidate.b = 8.0;
    candidate.c = std::max({5.0 * d2.w_max / 4.0, 4.0 / d2.w_min, 2.0});
    std::vector<int> identity(g.size());
    for (int v = 0; v < g.size(); ++v) identity[v] = v;
    PairSample sample;
    sample.seed = cfg.seed;
    gate.rough = check_rough_isometry(g1, g, identity, sample, candidate);
  }

  gate.pass = gate.hypotheses.pass() && gate.dimension_ok && gate.delta.pass &&
              std::isfinite(gate.poincare.sup) &&
              (!gate.rough || (gate.rough->pass && gate.rough->candidate_rough1 &&
                               gate.rough->candidate_rough3));
  if (!gate.pass) {
    if (!gate.hypotheses.pass())
      gate.refusal_reason = "hypotheses 4.1-4.3 failed";
    else if (!gate.dimension_ok)
      gate.refusal_reason =
          "volume growth dimension d = " + std::to_string(gate.vg.d) +
          " fails the d >= 2 requirement of the stability theorem";
    else if (!gate.delta.pass)
      gate.refusal_reason = "local elliptic property failed";
    else if (gate.rough)
      gate.refusal_reason = "rough isometry certificate failed";
    else
      gate.refusal_reason = "Poincare probe failed";
  }
  return gate;
}

nlohmann::json StabilityReport::to_json() const {
  return {{"config", config.to_json()},
          {"config_hash", config.hash()},
          {"gate", gate.to_json()},
          {"fit_linf", fit_linf.to_json()},
          {"fit_l2", fit_l2.to_json()},
          {"fit_sqrtq", fit_sqrtq.to_json()},
          {"fit_window_t_max", fit_window_t_max},
          {"l1_sup_ratio", l1_sup_ratio},
          {"d_fitted", d_fitted},
          {"target_linf", target_linf},
          {"target_l2", target_l2},
          {"verdict", verdict},
          {"boundary_flagged", trajectory.boundary_flagged}};
}

std::string StabilityReport::trajectory_csv() const {
  std::string out = "t,l1,l2,linf,boundary_mass,qform\n";
  char line[192];
  for (std::size_t i = 0; i < trajectory.times.size(); ++i) {
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  trajectory.times[i], trajectory.l1[i], trajectory.l2[i],
                  trajectory.linf[i], trajectory.boundary_mass[i], trajectory.qform[i]);
    out += line;
  }
  return out;
}

StabilityReport run_stability_experiment(const StabilityExperimentConfig& cfg) {
  FamilySetup setup = make_family(cfg);
  InducedGraphBundle bundle = linearize(setup.system, setup.solution);

  StabilityReport report;
  report.config = cfg;
  report.gate = evaluate_gate(cfg, setup, bundle);
  report.d_fitted = report.gate.vg.d;
  report.target_linf = -report.gate.vg.d / 2.0;
  report.target_l2 = -report.gate.vg.d / 4.0;
  if (!report.gate.pass && !cfg.force_run)
    throw GateRefusal("hypothesis gate refused: " + report.gate.refusal_reason, report.gate);

  Vector psi0 = make_initial_perturbation(cfg, setup.system, setup.center);
  const double psi0_l1 = norm_l1(psi0);

  IntegrationControls controls;
  controls.rel_tol = cfg.rel_tol;
  controls.abs_tol = cfg.abs_tol;
  controls.output_times.push_back(0.0);
  for (double t : log_time_grid(std::min(0.5, cfg.t_end / 64.0), cfg.t_end, cfg.output_points))
    controls.output_times.push_back(t);
  for (double t : cfg.snapshot_times) {
    if (t < 0.0 || t > cfg.t_end)
      throw std::invalid_argument("snapshot times must lie in [0, t_end]");
    controls.output_times.push_back(t);
  }
  std::sort(controls.output_times.begin(), controls.output_times.end());
  controls.output_times.erase(
      std::unique(controls.output_times.begin(), controls.output_times.end()),
      controls.output_times.end());
  report.trajectory = integrate_perturbation(setup.system, setup.solution, psi0,
                                             controls, cfg.snapshot_times);

  // clip the fit window where the ring mass grows past 1% of |psi0|_1 over
  // its initial value (the mean-removed background sits on the ring from t=0)
  double window_max = cfg.fit_t_max;
  const double ring_mass0 = report.trajectory.boundary_mass.front();
  for (std::size_t i = 0; i < report.trajectory.times.size(); ++i)
    if (report.trajectory.boundary_mass[i] - ring_mass0 > 0.01 * psi0_l1) {
      window_max = std::min(window_max, report.trajectory.times[i]);
      break;
    }
  report.fit_window_t_max = window_max;
  int in_window = 0;
  for (double t : report.trajectory.times)
    if (t >= cfg.fit_t_min && t <= window_max) ++in_window;
  if (in_window < 8)
    throw std::runtime_error(
        "fit window has fewer than 8 points after the boundary-mass clip; "
        "use a larger lattice or a shorter horizon");

  report.fit_linf = fit_decay(report.trajectory.times, report.trajectory.linf,
                              cfg.fit_t_min, window_max, "linf");
  report.fit_l2 = fit_decay(report.trajectory.times, report.trajectory.l2,
                            cfg.fit_t_min, window_max, "l2");
  {
    std::vector<double> sqrtq(report.trajectory.qform.size());
    for (std::size_t i = 0; i < sqrtq.size(); ++i)
      sqrtq[i] = std::sqrt(std::max(report.trajectory.qform[i], 0.0));
    report.fit_sqrtq =
        fit_decay(report.trajectory.times, sqrtq, cfg.fit_t_min, window_max, "sqrtQ");
  }

  double sup = 0.0;
  for (double l1 : report.trajectory.l1) sup = std::max(sup, l1);
  report.l1_sup_ratio = sup / psi0_l1;

  report.verdict = std::abs(report.fit_linf.slope + 1.0) <= 0.15 &&
                   std::abs(report.fit_l2.slope + 0.5) <= 0.10 &&
                   report.l1_sup_ratio <= 3.0;
  return report;
}

nlohmann::json RemainderBoundReport::to_json() const {
  nlohmann::json j{{"n_samples", n_samples},
                   {"delta", delta},
                   {"bound_constant", bound_constant},
                   {"violations", violations},
                   {"max_ratio", max_ratio}};
  if (violations > 0)
    j["worst_psi"] = std::vector<double>(worst_psi.begin(), worst_psi.end());
  return j;
}

RemainderBoundReport verify_remainder_bound(const PhaseSystem& sys,
                                            const PhaseLockedSolution& sol,
                                            const InducedGraphBundle& bundle,
                                            int n_samples, double delta,
                                            std::uint64_t seed) {
  if (delta > 1.0) throw std::invalid_argument("delta must be <= 1");
  RemainderBoundReport report;
  report.n_samples = n_samples;
  report.delta = delta;
  report.bound_constant = sys.coupling().sup_ddh() / (2.0 * bundle.normalization);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> radius(0.0, 1.0);
  for (int s = 0; s < n_samples; ++s) {
    Vector psi(sys.size());
    for (int v = 0; v < sys.size(); ++v) psi[v] = unit(rng);
    const double n2 = norm_l2(psi);
    if (n2 > 0.0) psi *= delta * radius(rng) / n2;
    const double lhs = norm_l1(nonlinear_remainder(sys, sol, bundle, psi));
    const double rhs = report.bound_constant * q_form(bundle.neighborhoods, psi);
    if (rhs > 0.0) report.max_ratio = std::max(report.max_ratio, lhs / rhs);
    if (lhs > rhs * (1.0 + 1e-12) + 1e-15) {
      if (report.violations == 0) report.worst_psi = psi;
      ++report.violations;
    }
  }
  return report;
}

nlohmann::json QSemigroupReport::to_json() const {
  return {{"degenerate", degenerate}, {"times", times},         {"ratios", ratios},
          {"fit", fit.to_json()},     {"eta_half", eta_half},   {"nonincreasing", nonincreasing}};
}

QSemigroupReport verify_q_semigroup_decay(const InducedGraphBundle& bundle, const Vector& psi,
                                          const std::vector<double>& t_grid) {
  QSemigroupReport report;
  if (q_form(bundle.neighborhoods, psi) == 0.0) {
    report.degenerate = true;  // constants never produce gradient energy
    return report;
  }
  HeatSemigroup semigroup(bundle);
  const auto evolved = semigroup.apply_multi(psi, t_grid);
  const auto evolved_abs = semigroup.apply_multi(psi.cwiseAbs(), t_grid);
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    const double q = std::sqrt(q_form(bundle.neighborhoods, evolved[i]));
    const double denom = norm_l2(evolved_abs[i]);
    report.times.push_back(t_grid[i]);
    report.ratios.push_back(q / denom);
  }
  report.fit = fit_decay(report.times, report.ratios, report.times.front(),
                         report.times.back(), "q_ratio");
  report.eta_half = -report.fit.slope;
  report.nonincreasing = true;
  for (std::size_t i = 0; i + 1 < report.ratios.size(); ++i)
    if (report.ratios[i + 1] > report.ratios[i] * 1.05) report.nonincreasing = false;
  return report;
}

nlohmann::json IntegralLemmaReport::to_json() const {
  return {{"gamma1", gamma1},   {"gamma2", gamma2},       {"min_exponent", min_exponent},
          {"times", times},     {"integrals", integrals}, {"ratios", ratios},
          {"sup_ratio", sup_ratio}, {"bounded", bounded}};
}

IntegralLemmaReport verify_integral_lemma(double gamma1, double gamma2,
                                          const std::vector<double>& t_grid) {
  if (!(gamma1 > 0.0) || !(gamma2 > 0.0))
    throw std::invalid_argument("integral lemma requires positive exponents");
  const bool both_not_one = gamma1 != 1.0 && gamma2 != 1.0;
  const bool first_is_one = gamma1 == 1.0 && gamma2 > 1.0;
  if (!both_not_one && !first_is_one)
    throw std::invalid_argument(
        "integral lemma covers gamma1, gamma2 != 1, or gamma1 = 1 < gamma2");

  IntegralLemmaReport report;
  report.gamma1 = gamma1;
  report.gamma2 = gamma2;
  report.min_exponent = std::min({gamma1 + gamma2 - 1.0, gamma1, gamma2});

  for (double t : t_grid) {
    if (t < 0.0) throw std::invalid_argument("integral lemma times must be >= 0");
    double value = 0.0;
    if (t > 0.0) {
      auto integrand = [&](double s) {
        return std::pow(1.0 + t - s, -gamma1) * std::pow(1.0 + s, -gamma2);
      };
      value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
          integrand, 0.0, t, 15, 1e-10);
    }
    report.times.push_back(t);
    report.integrals.push_back(value);
    report.ratios.push_back(value * std::pow(1.0 + t, report.min_exponent));
  }
  report.sup_ratio = *std::max_element(report.ratios.begin(), report.ratios.end());
  report.bounded = std::isfinite(report.sup_ratio);
  return report;
}

nlohmann::json SpectrumProbe::to_json() const {
  return {{"n", n},
          {"lambda_min", lambda_min},
          {"lambda_max", lambda_max},
          {"spectral_gap", spectral_gap},
          {"method", method}};
}

namespace {

// Lanczos with full reorthogonalization for the extreme eigenvalue of a
// symmetric operator restricted to the mean-zero subspace.
double lanczos_extreme(const std::function<Vector(const Vector&)>& op, int n, bool largest,
                       std::uint64_t seed, int m = 120) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = unit(rng);
  v.array() -= v.mean();
  v /= norm_l2(v);

  m = std::min(m, n - 1);
  Eigen::MatrixXd basis(n, m);
  Eigen::VectorXd alpha(m), beta(m);
  basis.col(0) = v;
  Vector w;
  int k = 0;
  for (; k < m; ++k) {
    w = op(basis.col(k));
    w.array() -= w.mean();
    alpha[k] = basis.col(k).dot(w);
    w -= alpha[k] * basis.col(k);
    if (k > 0) w -= beta[k - 1] * basis.col(k - 1);
    for (int j = 0; j <= k; ++j) w -= basis.col(j).dot(w) * basis.col(j);
    const double nb = norm_l2(w);
    if (k + 1 < m) {
      if (nb < 1e-12) {
        ++k;
        break;
      }
      beta[k] = nb;
      basis.col(k + 1) = w / nb;
    }
  }
  const int dim = std::min(k + 1, m);
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) {
    T(i, i) = alpha[i];
    if (i + 1 < dim) T(i, i + 1) = T(i + 1, i) = beta[i];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
  return largest ? es.eigenvalues().maxCoeff() : es.eigenvalues().minCoeff();
}

}  // namespace

SpectrumProbe spectrum_probe(const InducedGraphBundle& bundle) {
  const WeightedGraph& g = bundle.base;
  const int n = g.size();
  if (n > 10000) throw std::invalid_argument("spectrum probe is limited to 10k vertices");

  SpectrumProbe probe;
  probe.n = n;
  if (n <= 2000) {
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
    for (const Edge& e : g.edges()) {
      if (e.u == e.v) continue;
      L(e.u, e.v) += e.w;
      L(e.v, e.u) += e.w;
      L(e.u, e.u) -= e.w;
      L(e.v, e.v) -= e.w;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L);
    const auto& ev = es.eigenvalues();
    probe.lambda_min = ev.minCoeff();
    probe.lambda_max = ev.maxCoeff();
    probe.spectral_gap = 0.0;
    for (int i = n - 1; i >= 0; --i)
      if (ev[i] < -1e-9) {
        probe.spectral_gap = -ev[i];
        break;
      }
    probe.method = "dense";
  } else {
    auto op = [&](const Vector& x) {
      Vector y = Vector::Zero(n);
      for (int v = 0; v < n; ++v) {
        const auto nbrs = g.neighbors(v);
        const auto ws = g.neighbor_weights(v);
        double acc = 0.0;
        for (std::size_t kk = 0; kk < nbrs.size(); ++kk)
          acc += ws[kk] * (x[nbrs[kk]] - x[v]);
        y[v] = acc;
      }
      return y;
    };
    probe.lambda_min = lanczos_extreme(op, n, false, 12345);
    probe.lambda_max = 0.0;  // constants are always in the kernel
    probe.spectral_gap = -lanczos_extreme(op, n, true, 54321);
    probe.method = "lanczos";
  }
  return probe;
}

}  // namespace phasegraph
