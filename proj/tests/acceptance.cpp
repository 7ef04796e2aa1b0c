// Acceptance suite: end-to-end checks of the heat-kernel decay rates, the
// Monte Carlo oracle, the nonlinear stability experiments, the inequality
// toolkit, and the 1D negative controls. Each criterion prints one PASS/FAIL
// line; the exit code is the number of failures.
//
// usage: acceptance [criterion ...] [--cli path]

#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <numbers>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "phasegraph/experiments.hpp"

using namespace phasegraph;

namespace {

std::string g_cli_path;

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

bool report(int criterion, bool pass, const std::string& detail, double seconds) {
  std::printf("criterion %d: %s  %s  (%.1f s)\n", criterion, pass ? "PASS" : "FAIL",
              detail.c_str(), seconds);
  std::fflush(stdout);
  return pass;
}

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

InducedGraphBundle torus_bundle(int extent) {
  PhaseSystem sys({extent, extent, 1, Boundary::torus}, Coupling::sine(), 0.0);
  return linearize(sys, trivial_lags(sys));
}

// --- criterion 1: on-diagonal heat-kernel decay, 101x101 torus, t in [5,50]
bool criterion_1() {
  Timer timer;
  InducedGraphBundle bundle = torus_bundle(101);
  LatticeSpec lat{101, 101, 1, Boundary::torus};
  const int src = lat.index_of({50, 50});
  const auto times = log_time_grid(5.0, 50.0, 12);
  HeatKernelEstimate est = transition_row(bundle, src, times);
  std::vector<double> diag;
  for (const Vector& row : est.rows) diag.push_back(row[src]);
  DecayFit fit = fit_decay(times, diag, 5.0, 50.0, "p_t(v,v)");
  const double elapsed = timer.seconds();
  const bool pass = std::abs(fit.slope + 1.0) <= 0.10 && elapsed <= 120.0;
  return report(1, pass,
                fmt("p_t(v,v) slope %+.4f vs -1.00 +/- 0.10, R^2 %.5f", fit.slope, fit.r2),
                elapsed);
}

// --- criterion 2: ultracontractive interpolation on the same setup
bool criterion_2() {
  Timer timer;
  InducedGraphBundle bundle = torus_bundle(101);
  LatticeSpec lat{101, 101, 1, Boundary::torus};
  const int src = lat.index_of({50, 50});
  const auto times = log_time_grid(5.0, 50.0, 12);
  HeatKernelEstimate est = transition_row(bundle, src, times);

  std::vector<double> l2;
  bool interpolation_ok = true;
  for (const Vector& row : est.rows) {
    l2.push_back(norm_l2(row));
    // all columns of P_t are translates on the torus, so the delta row
    // realises the measured 1->p operator norms
    if (norm_l2(row) > std::sqrt(norm_l1(row) * norm_linf(row)) * (1.0 + 1e-12))
      interpolation_ok = false;
  }
  DecayFit fit = fit_decay(times, l2, 5.0, 50.0, "|P_t delta|_2");
  const bool pass = std::abs(fit.slope + 0.5) <= 0.10 && interpolation_ok;
  return report(2, pass,
                fmt("|P_t delta|_2 slope %+.4f vs -0.50 +/- 0.10, log-convexity %s",
                    fit.slope, interpolation_ok ? "holds" : "VIOLATED"),
                timer.seconds());
}

// --- criterion 3: conservation and contraction
bool criterion_3() {
  Timer timer;
  InducedGraphBundle bundle = torus_bundle(101);
  LatticeSpec lat{101, 101, 1, Boundary::torus};
  const int src = lat.index_of({50, 50});
  const auto times = log_time_grid(1.0, 50.0, 10);

  HeatKernelEstimate est = transition_row(bundle, src, times);
  double worst_defect = 0.0;
  for (double d : est.row_sum_defect) worst_defect = std::max(worst_defect, std::abs(d));

  HeatSemigroup semigroup(bundle);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss;
  double worst_growth = 0.0;
  for (int s = 0; s < 100; ++s) {
    Vector x(bundle.base.size());
    for (int v = 0; v < x.size(); ++v) x[v] = gauss(rng);
    const auto evolved = semigroup.apply_multi(x, times);
    for (const Vector& y : evolved)
      for (double p : {1.0, 2.0, std::numeric_limits<double>::infinity()})
        worst_growth = std::max(worst_growth, lp_norm(y, p) / lp_norm(x, p));
  }
  const bool pass = worst_defect <= 1e-10 && worst_growth <= 1.0 + 1e-10;
  return report(3, pass,
                fmt("row-sum defect %.2e (tol 1e-10), worst |P_t x|_p / |x|_p = %.12f",
                    worst_defect, worst_growth),
                timer.seconds());
}

// --- criterion 4: Monte Carlo walks against the exact row
bool criterion_4() {
  Timer timer;
  InducedGraphBundle bundle = torus_bundle(101);
  LatticeSpec lat{101, 101, 1, Boundary::torus};
  const int src = lat.index_of({50, 50});
  const double t = 10.0;
  const std::int64_t n_walks = 1000000;

  CtrwSampler sampler(bundle);
  HeatKernelEstimate mc = sampler.empirical_row(src, t, n_walks, 20240);
  HeatKernelEstimate exact = transition_row(bundle, src, {t});

  double tv = 0.0;
  int support = 0;
  for (int v = 0; v < bundle.base.size(); ++v) {
    tv += std::abs(mc.rows[0][v] - exact.rows[0][v]);
    if (exact.rows[0][v] > 1e-12) ++support;
  }
  tv *= 0.5;
  const double bound = 3.0 * std::sqrt(static_cast<double>(support) / n_walks);
  const bool pass = tv < bound;
  return report(4, pass,
                fmt("TV distance %.5f vs 3-sigma multinomial bound %.5f (support %d)", tv,
                    bound, support),
                timer.seconds());
}

// --- criterion 5: nonlinear decay about the trivial solution
bool criterion_5() {
  Timer timer;
  StabilityExperimentConfig cfg;
  cfg.family = "trivial";
  cfg.extent = 101;
  cfg.eps = 1e-3;
  cfg.init = "indicator";
  cfg.t_end = 50.0;
  cfg.fit_t_min = 5.0;
  cfg.fit_t_max = 50.0;
  cfg.output_points = 33;
  StabilityReport rep = run_stability_experiment(cfg);
  const double elapsed = timer.seconds();
  const bool pass = std::abs(rep.fit_linf.slope + 1.0) <= 0.15 &&
                    std::abs(rep.fit_l2.slope + 0.5) <= 0.10 && rep.l1_sup_ratio <= 3.0 &&
                    elapsed <= 600.0;
  return report(5, pass,
                fmt("linf slope %+.4f (+/-0.15), l2 slope %+.4f (+/-0.10), "
                    "l1 sup ratio %.3f (<= 3)",
                    rep.fit_linf.slope, rep.fit_l2.slope, rep.l1_sup_ratio),
                elapsed);
}

// large-extent replica of the rotating-wave augmented graph: the same edge
// topology (nearest-neighbour lattice minus the four core edges) with loops
// bringing every vertex to the uniform measure
WeightedGraph rotwave_metric_replica(int extent) {
  LatticeSpec lat{extent, extent, 1, Boundary::free};
  WeightedGraph plain = build_lattice_graph(lat);
  const int c = extent / 2;
  const int a = lat.index_of({c - 1, c - 1}), b = lat.index_of({c - 1, c});
  const int d = lat.index_of({c, c - 1}), e = lat.index_of({c, c});
  std::vector<Edge> edges;
  for (const Edge& ed : plain.edges()) {
    const bool core = (ed.u == a || ed.u == b || ed.u == d || ed.u == e) &&
                      (ed.v == a || ed.v == b || ed.v == d || ed.v == e);
    if (!core) edges.push_back(ed);
  }
  WeightedGraph stripped = WeightedGraph::from_edges(lat.size(), edges, Boundary::free);
  for (int v = 0; v < lat.size(); ++v)
    edges.push_back({v, v, 5.0 - stripped.measure(v)});
  std::vector<Coord> coords(lat.size());
  for (int v = 0; v < lat.size(); ++v) coords[v] = lat.coord_of(v);
  return WeightedGraph::from_edges(lat.size(), edges, Boundary::free, std::move(coords));
}

std::vector<int> replica_centers(const WeightedGraph& g, int extent) {
  LatticeSpec lat{extent, extent, 1, g.boundary()};
  const int c = extent / 2;
  (void)g;
  return {lat.index_of({c, c}), lat.index_of({c - 5, c}), lat.index_of({c + 5, c}),
          lat.index_of({c, c - 5}), lat.index_of({c, c + 5})};
}

// --- criterion 6: rotating wave and doubly periodic decay after their gates
bool criterion_6() {
  Timer timer;
  bool pass = true;
  std::string detail;

  // volume-growth fits at a scale where the slope has converged
  {
    WeightedGraph replica = rotwave_metric_replica(401);
    VGReport vg = check_vg(replica, replica_centers(replica, 401),
                           default_vg_radii(40, 190, 10));
    pass = pass && std::abs(vg.d - 2.0) <= 0.05;
    detail += fmt("G2~ d %.3f, ", vg.d);

    const double w = std::cos(2.0 * std::numbers::pi / 5.0);
    WeightedGraph g3 = build_lattice_graph({401, 401, 1, Boundary::torus},
                                           [w](Coord, Coord) { return w; });
    VGReport vg3 = check_vg(g3, replica_centers(g3, 401), default_vg_radii(40, 190, 10));
    pass = pass && std::abs(vg3.d - 2.0) <= 0.05;
    detail += fmt("G3 d %.3f, ", vg3.d);
  }

  for (const char* family : {"rotwave", "periodic"}) {
    StabilityExperimentConfig cfg;
    cfg.family = family;
    cfg.extent = 100;
    cfg.eps = 1e-3;
    cfg.t_end = 50.0;
    cfg.fit_t_min = 5.0;
    cfg.fit_t_max = 50.0;
    cfg.output_points = 33;
    StabilityReport rep = run_stability_experiment(cfg);  // throws if a gate fails
    const bool slopes_ok = std::abs(rep.fit_linf.slope + 1.0) <= 0.15 &&
                           std::abs(rep.fit_l2.slope + 0.5) <= 0.10 &&
                           rep.l1_sup_ratio <= 3.0;
    pass = pass && slopes_ok && rep.gate.pass && rep.gate.delta.pass &&
           std::isfinite(rep.gate.poincare.sup);
    if (rep.gate.rough)
      pass = pass && rep.gate.rough->candidate_rough1 && rep.gate.rough->candidate_rough3;
    detail += fmt("%s linf %+.3f l2 %+.3f alpha %.3f PI %.2f%s; ", family,
                  rep.fit_linf.slope, rep.fit_l2.slope, rep.gate.delta.alpha,
                  rep.gate.poincare.sup,
                  rep.gate.rough ? (rep.gate.rough->candidate_rough1 ? " rough(2,8) ok" : " rough(2,8) FAIL")
                                 : "");
  }
  return report(6, pass, detail, timer.seconds());
}

// --- criterion 7: rotating-wave construction
bool criterion_7() {
  Timer timer;
  RotatingWaveSpec spec;
  spec.extent = 40;
  RotatingWaveResult wave = rotating_wave_lags(spec);
  bool pass = wave.solution.residual_inf < 1e-10 && wave.invariants_ok;

  // the four section relations, rechecked against the assembled lag field
  const double half_pi = std::numbers::pi / 2.0;
  for (int i = 1; i <= wave.radius && pass; ++i) {
    if (rotating_wave_lag_at(wave, i, i) != 0.0) pass = false;
    if (std::abs(rotating_wave_lag_at(wave, i, 0) +
                 rotating_wave_lag_at(wave, i, 1) - half_pi) > 1e-10)
      pass = false;
  }
  for (int i = 2; i <= wave.radius - 2 && pass; ++i)
    for (int j = 1; j < i; ++j) {
      const double th = rotating_wave_lag_at(wave, i, j);
      if (!(th > 0.0 && th <= std::numbers::pi / 4.0 + 1e-10)) pass = false;
    }
  for (int i = 1; i + 1 <= wave.radius - 2 && pass; ++i)
    for (int j = 1; j <= i; ++j)
      if (rotating_wave_lag_at(wave, i, j) >
          rotating_wave_lag_at(wave, i + 1, j) + 1e-10)
        pass = false;

  InducedGraphBundle bundle = linearize(wave.system, wave.solution);
  WeightedGraph plain = build_lattice_graph(wave.system.lattice());
  const bool edges_ok = bundle.base.edge_count() == plain.edge_count() - 4;
  pass = pass && edges_ok;
  return report(7, pass,
                fmt("residual %.2e, sector relations within 1e-10, induced edges %zu "
                    "(lattice minus 4: %s)",
                    wave.solution.residual_inf, bundle.base.edge_count(),
                    edges_ok ? "yes" : "NO"),
                timer.seconds());
}

// --- criterion 8: inequality suite
bool criterion_8() {
  Timer timer;
  bool pass = true;
  std::string detail;

  // remainder bound over 1000 random perturbations
  {
    PhaseSystem sys({41, 41, 1, Boundary::free}, Coupling::sine(), 0.0);
    PhaseLockedSolution sol = trivial_lags(sys);
    InducedGraphBundle bundle = linearize(sys, sol);
    RemainderBoundReport rep = verify_remainder_bound(sys, sol, bundle, 1000, 0.5, 8);
    pass = pass && rep.violations == 0;
    detail += fmt("remainder violations %d/1000 (max ratio %.3f), ", rep.violations,
                  rep.max_ratio);
  }

  // gradient-energy bound: the ordered double sum obeys the parallelogram
  // constant 4D, equivalently the per-edge sum obeys 2D (tight either way)
  {
    LatticeSpec lat{31, 31, 1, Boundary::torus};
    Neighborhoods nb = lattice_neighborhoods(lat);
    const double D = nb.max_degree();
    std::mt19937_64 rng(88);
    std::normal_distribution<double> gauss;
    int violations = 0;
    for (int s = 0; s < 1000; ++s) {
      Vector x(lat.size());
      for (int v = 0; v < lat.size(); ++v) x[v] = gauss(rng);
      if (0.5 * q_form(nb, x) > 2.0 * D * x.squaredNorm() * (1.0 + 1e-12)) ++violations;
    }
    pass = pass && violations == 0;
    detail += fmt("Q/2 <= 2D|x|^2 violations %d/1000, ", violations);
  }

  // integral lemma at the exponent pairs of the d = 2, eta = 1 bootstrap
  {
    std::vector<double> grid{0.0};
    for (double t : log_time_grid(0.5, 1000.0, 20)) grid.push_back(t);
    for (auto [g1, g2] : {std::pair{0.5, 2.0}, {1.0, 2.0}, {1.5, 2.0}}) {
      IntegralLemmaReport rep = verify_integral_lemma(g1, g2, grid);
      pass = pass && rep.bounded && rep.sup_ratio < 10.0;
      detail += fmt("C(%.2g,%g) ratio %.2f, ", g1, g2, rep.sup_ratio);
    }
  }
  return report(8, pass, detail, timer.seconds());
}

// --- criterion 9: 1D chains are refused with exit code 2
bool criterion_9() {
  Timer timer;
  bool pass = true;
  std::string detail;
  for (int range : {1, 2}) {
    LatticeSpec lat{2001, 1, range, Boundary::free};
    WeightedGraph chain = build_lattice_graph(lat);
    std::vector<int> centers{lat.index_of({990, 0}), lat.index_of({995, 0}),
                             lat.index_of({1000, 0}), lat.index_of({1005, 0}),
                             lat.index_of({1010, 0})};
    VGReport vg = check_vg(chain, centers, default_vg_radii(50, 400, 10));
    pass = pass && std::abs(vg.d - 1.0) <= 0.05;
    detail += fmt("n=%d d %.3f, ", range, vg.d);
  }

  if (g_cli_path.empty()) {
    detail += "cli path missing";
    return report(9, false, detail, timer.seconds());
  }
  for (int range : {1, 2}) {
    const std::string cmd = g_cli_path + " decay --family chain --n " +
                            std::to_string(range) +
                            " --out /tmp/phasegraph_acceptance_9 2> /dev/null";
    const int status = std::system(cmd.c_str());
    const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    pass = pass && code == 2;
    detail += fmt("decay --family chain --n %d -> exit %d, ", range, code);
  }
  return report(9, pass, detail, timer.seconds());
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> criteria;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--cli" && i + 1 < argc) {
      g_cli_path = argv[++i];
    } else {
      criteria.push_back(std::atoi(arg.c_str()));
    }
  }
  if (criteria.empty()) criteria = {1, 2, 3, 4, 5, 6, 7, 8, 9};

  int failures = 0;
  for (int c : criteria) {
    bool ok = false;
    switch (c) {
      case 1: ok = criterion_1(); break;
      case 2: ok = criterion_2(); break;
      case 3: ok = criterion_3(); break;
      case 4: ok = criterion_4(); break;
      case 5: ok = criterion_5(); break;
      case 6: ok = criterion_6(); break;
      case 7: ok = criterion_7(); break;
      case 8: ok = criterion_8(); break;
      case 9: ok = criterion_9(); break;
      default:
        std::fprintf(stderr, "unknown criterion %d\n", c);
    }
    if (!ok) ++failures;
  }
  return failures;
}
