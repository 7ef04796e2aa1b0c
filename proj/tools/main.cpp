// phasegraph: build lattice phase systems, construct phase-locked solutions,
// audit the induced graphs, and measure heat-kernel and perturbation decay.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include "CLI11.hpp"
#include "json.hpp"

#include "phasegraph/experiments.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace phasegraph;

namespace {

constexpr const char* kVersion = "0.1.0";

struct GlobalOptions {
  std::string out = ".";
  std::uint64_t seed = 7;
  int threads = 0;
};

void apply_threads(int threads) {
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

fs::path artifact_path(const GlobalOptions& g, const std::string& name) {
  fs::create_directories(g.out);
  return fs::path(g.out) / name;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json manifest(const GlobalOptions& g, const json& config) {
  const std::size_t h = std::hash<std::string>{}(config.dump());
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016zx", h);
  return {{"config", config}, {"config_hash", buf}, {"seed", g.seed}, {"version", kVersion}};
}

json from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  json j;
  in >> j;
  return j;
}

std::vector<double> parse_time_grid(const std::string& text) {
  // "tmin:tmax:n" log-spaced
  double tmin = 0.0, tmax = 0.0;
  int n = 0;
  if (std::sscanf(text.c_str(), "%lf:%lf:%d", &tmin, &tmax, &n) != 3)
    throw std::runtime_error("--times expects tmin:tmax:count");
  return log_time_grid(tmin, tmax, n);
}

std::string csv_rows(const HeatKernelEstimate& est) {
  std::string out = "t,row_sum_defect,p_diag,l1,l2,linf\n";
  char line[192];
  for (std::size_t k = 0; k < est.times.size(); ++k) {
    const Vector& row = est.rows[k];
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  est.times[k], est.row_sum_defect[k], row[est.source],
                  norm_l1(row), norm_l2(row), norm_linf(row));
    out += line;
  }
  return out;
}

PhaseSystem system_from_json(const json& j) {
  const auto& lat = j.at("lattice");
  LatticeSpec spec{lat.at("nx").get<int>(), lat.at("ny").get<int>(),
                   lat.at("range").get<int>(),
                   boundary_from_string(lat.at("boundary").get<std::string>())};
  Coupling coupling = Coupling::sine();
  if (j.at("H").get<std::string>() == "table")
    coupling = Coupling::from_table(j.at("H_table").get<std::vector<double>>());
  if (j.at("omega").is_array()) {
    const auto vals = j["omega"].get<std::vector<double>>();
    Vector omega(static_cast<int>(vals.size()));
    for (std::size_t i = 0; i < vals.size(); ++i) omega[static_cast<int>(i)] = vals[i];
    return PhaseSystem(spec, coupling, omega);
  }
  return PhaseSystem(spec, coupling, j["omega"].get<double>());
}

PhaseLockedSolution solution_from_json(const json& j, const PhaseSystem& sys) {
  PhaseLockedSolution sol;
  const auto lags = j.at("lags").get<std::vector<double>>();
  sol.lags = Vector(static_cast<int>(lags.size()));
  for (std::size_t i = 0; i < lags.size(); ++i) sol.lags[static_cast<int>(i)] = lags[i];
  sol.Omega = j.at("Omega").get<double>();
  sol.residual_inf = norm_linf(phase_lag_residual(sys, sol.lags, sol.Omega));
  return sol;
}

std::vector<int> auto_centers(const WeightedGraph& g) {
  // five probes clustered at the coordinate centre
  if (!g.has_coords()) throw std::runtime_error("--vg needs vertex coordinates");
  int nx = 0, ny = 0;
  for (const Coord& c : g.coords()) {
    nx = std::max(nx, c.x + 1);
    ny = std::max(ny, c.y + 1);
  }
  auto find = [&](int x, int y) {
    for (int v = 0; v < g.size(); ++v)
      if (g.coords()[v].x == x && g.coords()[v].y == y) return v;
    throw std::runtime_error("probe centre missing from the graph");
  };
  const int cx = nx / 2, cy = ny / 2;
  if (ny == 1)
    return {find(cx - 6, 0), find(cx - 3, 0), find(cx, 0), find(cx + 3, 0), find(cx + 6, 0)};
  return {find(cx, cy), find(cx - 3, cy), find(cx + 3, cy), find(cx, cy - 3),
          find(cx, cy + 3)};
}

int run_decay(const GlobalOptions& g, StabilityExperimentConfig cfg) {
  cfg.seed = g.seed;
  try {
    StabilityReport report = run_stability_experiment(cfg);
    write_json(artifact_path(g, "decay_report.json"), report.to_json());
    write_text(artifact_path(g, "trajectory.csv"), report.trajectory_csv());
    write_json(artifact_path(g, "manifest.json"), manifest(g, cfg.to_json()));
    if (!report.trajectory.snapshot_times.empty()) {
      json snaps{{"times", report.trajectory.snapshot_times}};
      for (const Vector& state : report.trajectory.snapshots)
        snaps["states"].push_back(std::vector<double>(state.begin(), state.end()));
      write_json(artifact_path(g, "snapshots.json"), snaps);
    }
    std::printf("family=%s extent=%d  linf slope %+0.3f (target -1.0)  l2 slope %+0.3f "
                "(target -0.5)  l1 sup ratio %.2f  verdict %s\n",
                cfg.family.c_str(), cfg.extent, report.fit_linf.slope,
                report.fit_l2.slope, report.l1_sup_ratio,
                report.verdict ? "PASS" : "FAIL");
    return 0;
  } catch (const GateRefusal& e) {
    write_json(artifact_path(g, "decay_report.json"),
               {{"config", cfg.to_json()}, {"gate", e.gate.to_json()}});
    std::fprintf(stderr, "refused: %s\n", e.what());
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lattice phase oscillators, induced graphs, and decay measurements"};
  app.set_config("--config", "", "read options from a TOML-style key/value file");
  app.require_subcommand(1);
  app.fallthrough();  // --out/--seed/--threads may follow the subcommand

  GlobalOptions g;
  app.add_option("--out", g.out, "output directory for artifacts");
  app.add_option("--seed", g.seed, "master RNG seed recorded in artifacts");
  app.add_option("--threads", g.threads, "worker threads (0 = library default)");

  // ---- solve
  auto* solve = app.add_subcommand("solve", "Newton-solve the phase-lag equation");
  int solve_extent = 21;
  std::string solve_boundary = "free";
  int solve_range = 1;
  double solve_omega = 0.0;
  std::string solve_init = "zero";
  double solve_noise = 0.01;
  solve->add_option("--extent", solve_extent);
  solve->add_option("--boundary", solve_boundary)->check(CLI::IsMember({"free", "torus"}));
  solve->add_option("--range", solve_range);
  solve->add_option("--omega", solve_omega);
  solve->add_option("--init", solve_init,
                    "initial lags: zero | noise | a solution json path");
  solve->add_option("--noise", solve_noise, "amplitude for --init noise");

  // ---- linearize
  auto* lin = app.add_subcommand("linearize", "induced graph bundle and hypothesis audit");
  std::string lin_solution;
  lin->add_option("--solution", lin_solution, "solution json (from solve/rotwave/periodic)")
      ->required();

  // ---- heat
  auto* heat = app.add_subcommand("heat", "transition rows and decay fits");
  std::string heat_family = "trivial_torus";
  int heat_extent = 101;
  std::string heat_times;
  std::int64_t heat_mc = 0;
  double heat_mc_time = 10.0;
  heat->add_option("--family", heat_family,
                   "trivial | trivial_torus | rotwave | periodic | chain");
  heat->add_option("--extent", heat_extent);
  heat->add_option("--times", heat_times,
                   "log grid tmin:tmax:count (default [5, 0.4 r^2] inside the "
                   "pre-boundary diffusive regime)");
  heat->add_option("--mc", heat_mc, "also sample this many CTRW walks");
  heat->add_option("--mc-time", heat_mc_time);

  // ---- check
  auto* check = app.add_subcommand("check", "graph property audit");
  std::string check_graph;
  bool flag_vg = false, flag_delta = false, flag_pi = false;
  std::string check_rough;
  std::string check_radii = "auto";
  check->add_option("--graph", check_graph, "graph json")->required();
  check->add_flag("--vg", flag_vg, "volume growth fit");
  check->add_flag("--delta", flag_delta, "local elliptic property");
  check->add_flag("--pi", flag_pi, "Poincare probes");
  check->add_option("--rough", check_rough, "second graph json for a rough isometry");
  check->add_option("--radii", check_radii, "rmin:rmax:count for --vg");

  // ---- rotwave
  auto* rot = app.add_subcommand("rotwave", "construct the rotating wave");
  int rot_extent = 40;
  rot->add_option("--extent", rot_extent, "even lattice extent >= 8");

  // ---- periodic
  auto* per = app.add_subcommand("periodic", "construct a doubly periodic wave");
  int per_extent = 20, per_n1 = 5, per_n2 = 5;
  per->add_option("--extent", per_extent);
  per->add_option("--n1", per_n1);
  per->add_option("--n2", per_n2);

  // ---- decay
  auto* dec = app.add_subcommand("decay", "full stability experiment");
  StabilityExperimentConfig dec_cfg;
  dec_cfg.extent = 0;
  dec->add_option("--family", dec_cfg.family, "trivial | rotwave | periodic | chain");
  dec->add_option("--extent", dec_cfg.extent, "0 = family default");
  dec->add_option("--eps", dec_cfg.eps);
  dec->add_option("--init", dec_cfg.init, "indicator | gaussian | random");
  dec->add_option("--n", dec_cfg.chain_range, "chain influence range");
  dec->add_option("--n1", dec_cfg.n1);
  dec->add_option("--n2", dec_cfg.n2);
  dec->add_option("--t-end", dec_cfg.t_end);
  dec->add_option("--fit-min", dec_cfg.fit_t_min);
  dec->add_option("--fit-max", dec_cfg.fit_t_max);
  dec->add_option("--points", dec_cfg.output_points);
  dec->add_option("--snapshots", dec_cfg.snapshot_times,
                  "record full states at these times (written to snapshots.json)");
  dec->add_flag("--force", dec_cfg.force_run, "run past a failed hypothesis gate");

  // ---- probe
  auto* probe = app.add_subcommand("probe", "extreme eigenvalues of the linearization");
  std::vector<int> probe_extents{11, 21, 41};
  std::string probe_boundary = "torus";
  probe->add_option("--extents", probe_extents);
  probe->add_option("--boundary", probe_boundary)->check(CLI::IsMember({"free", "torus"}));

  CLI11_PARSE(app, argc, argv);
  apply_threads(g.threads);

  try {
    if (*solve) {
      LatticeSpec spec{solve_extent, solve_extent, solve_range,
                       boundary_from_string(solve_boundary)};
      PhaseSystem sys(spec, Coupling::sine(), solve_omega);
      Vector initial = Vector::Zero(sys.size());
      if (solve_init == "noise") {
        std::mt19937_64 rng(g.seed);
        std::uniform_real_distribution<double> amp(-solve_noise, solve_noise);
        for (int v = 0; v < sys.size(); ++v) initial[v] = amp(rng);
      } else if (solve_init != "zero") {
        initial = solution_from_json(from_file(solve_init), sys).lags;
      }
      PhaseLockedSolution sol = solve_phase_locked(sys, initial);
      write_json(artifact_path(g, "solution.json"), sol.to_json(sys));
      write_text(artifact_path(g, "lags.csv"), lag_field_csv(sys, sol));
      std::printf("solved in %d iterations, residual %.3e\n", sol.newton_iterations,
                  sol.residual_inf);
      return 0;
    }

    if (*lin) {
      const json j = from_file(lin_solution);
      PhaseSystem sys = system_from_json(j);
      PhaseLockedSolution sol = solution_from_json(j, sys);
      HypothesisReport hyp = check_hypotheses(sys, sol);
      write_json(artifact_path(g, "hypotheses.json"), hyp.to_json());
      if (!hyp.pass()) {
        std::string which;
        if (!hyp.degree_ok) which = "bounded-degree influence topology";
        else if (!hyp.weights_ok) which = "symmetric nonnegative coupling derivative";
        else which = "connected induced graph";
        std::fprintf(stderr, "hypothesis audit failed: %s (see hypotheses.json)\n",
                     which.c_str());
        return 2;
      }
      InducedGraphBundle bundle = linearize(sys, sol);
      write_json(artifact_path(g, "bundle.json"), bundle.to_json());
      std::printf("induced graph: %d vertices, %zu edges, M = %.6f, loops = %s\n",
                  bundle.base.size(), bundle.base.edge_count(), bundle.M,
                  bundle.has_loops ? "yes" : "no");
      return 0;
    }

    if (*heat) {
      StabilityExperimentConfig fam;
      fam.family = heat_family;
      fam.extent = heat_extent;
      FamilySetup setup = make_family(fam);
      InducedGraphBundle bundle = linearize(setup.system, setup.solution);
      std::vector<double> times;
      if (heat_times.empty()) {
        const int radius = ball_radius_guard(bundle.augmented, setup.center);
        times = log_time_grid(5.0, std::max(10.0, 0.4 * radius * radius), 12);
      } else {
        times = parse_time_grid(heat_times);
      }
      HeatKernelEstimate est = transition_row(bundle, setup.center, times);
      write_text(artifact_path(g, "kernel_rows.csv"), csv_rows(est));

      std::vector<double> diag, l2;
      for (const Vector& row : est.rows) {
        diag.push_back(row[setup.center]);
        l2.push_back(norm_l2(row));
      }
      DecayFit fit_diag =
          fit_decay(times, diag, times.front(), times.back(), "p_t(v,v)");
      DecayFit fit_l2 = fit_decay(times, l2, times.front(), times.back(), "|P_t d|_2");
      json out{{"fit_diag", fit_diag.to_json()}, {"fit_l2", fit_l2.to_json()}};
      std::printf("p_t(v,v) slope %+0.4f    |P_t delta|_2 slope %+0.4f\n",
                  fit_diag.slope, fit_l2.slope);

      if (heat_mc > 0) {
        CtrwSampler sampler(bundle);
        HeatKernelEstimate mc = sampler.empirical_row(setup.center, heat_mc_time,
                                                      heat_mc, g.seed);
        HeatKernelEstimate exact = transition_row(bundle, setup.center, {heat_mc_time});
        double tv = 0.0;
        int support = 0;
        for (int v = 0; v < bundle.base.size(); ++v) {
          tv += std::abs(mc.rows[0][v] - exact.rows[0][v]);
          if (exact.rows[0][v] > 1e-12) ++support;
        }
        tv *= 0.5;
        const double bound = 3.0 * std::sqrt(static_cast<double>(support) / heat_mc);
        out["monte_carlo"] = {{"tv_distance", tv}, {"bound", bound},
                              {"pass", tv < bound}};
        write_json(artifact_path(g, "mc_sidecar.json"), mc.sidecar());
        std::printf("monte carlo TV %.5f vs bound %.5f (%s)\n", tv, bound,
                    tv < bound ? "ok" : "FAIL");
      }
      write_json(artifact_path(g, "heat_fits.json"), out);
      write_json(artifact_path(g, "manifest.json"),
                 manifest(g, {{"family", heat_family}, {"extent", heat_extent},
                              {"times", heat_times}, {"mc", heat_mc}}));
      return 0;
    }

    if (*check) {
      WeightedGraph graph = WeightedGraph::from_json(from_file(check_graph));
      json report;
      if (flag_vg) {
        const auto centers = auto_centers(graph);
        std::vector<int> radii;
        if (check_radii == "auto") {
          int guard = std::numeric_limits<int>::max();
          for (int c : centers) guard = std::min(guard, ball_radius_guard(graph, c));
          if (guard < 8) throw std::runtime_error("graph too small for --vg");
          radii = default_vg_radii(std::max(3, guard / 5), guard, 10);
        } else {
          int rmin = 0, rmax = 0, count = 0;
          if (std::sscanf(check_radii.c_str(), "%d:%d:%d", &rmin, &rmax, &count) != 3)
            throw std::runtime_error("--radii expects rmin:rmax:count");
          radii = default_vg_radii(rmin, rmax, count);
        }
        report["vg"] = check_vg(graph, centers, radii).to_json();
      }
      if (flag_delta) report["delta"] = check_delta(graph).to_json();
      if (flag_pi) {
        const auto centers = auto_centers(graph);
        int guard = std::numeric_limits<int>::max();
        for (int c : centers) guard = std::min(guard, ball_radius_guard(graph, c));
        std::vector<int> radii;
        for (int r : {2, 4, 8})
          if (2 * r <= guard) radii.push_back(r);
        if (radii.empty()) throw std::runtime_error("graph too small for --pi");
        report["pi"] = check_poincare(graph, centers, radii).to_json();
      }
      if (!check_rough.empty()) {
        WeightedGraph other = WeightedGraph::from_json(from_file(check_rough));
        if (other.size() != graph.size())
          throw std::runtime_error("rough isometry expects equal vertex sets");
        std::vector<int> identity(graph.size());
        for (int v = 0; v < graph.size(); ++v) identity[v] = v;
        PairSample sample;
        sample.seed = g.seed;
        report["rough"] = check_rough_isometry(graph, other, identity, sample,
                                               RoughCandidate{})
                              .to_json();
      }
      write_json(artifact_path(g, "property_report.json"), report);
      std::printf("%s\n", report.dump(2).c_str());
      return 0;
    }

    if (*rot) {
      RotatingWaveSpec spec;
      spec.extent = rot_extent;
      RotatingWaveResult wave = rotating_wave_lags(spec);
      write_json(artifact_path(g, "solution.json"),
                 wave.solution.to_json(wave.system));
      write_text(artifact_path(g, "lags.csv"),
                 lag_field_csv(wave.system, wave.solution));
      InducedGraphBundle bundle = linearize(wave.system, wave.solution);
      write_json(artifact_path(g, "bundle.json"), bundle.to_json());
      std::printf("rotating wave on %dx%d: residual %.3e, invariants %s, "
                  "%zu induced edges\n",
                  rot_extent, rot_extent, wave.solution.residual_inf,
                  wave.invariants_ok ? "ok" : "VIOLATED",
                  bundle.base.edge_count());
      return 0;
    }

    if (*per) {
      LatticeSpec spec{per_extent, per_extent, 1, Boundary::torus};
      PhaseSystem sys(spec, Coupling::sine(), 0.0);
      PhaseLockedSolution sol = doubly_periodic_lags(sys, per_n1, per_n2);
      write_json(artifact_path(g, "solution.json"), sol.to_json(sys));
      write_text(artifact_path(g, "lags.csv"), lag_field_csv(sys, sol));
      std::printf("doubly periodic wave N1=%d N2=%d: residual %.3e\n", per_n1, per_n2,
                  sol.residual_inf);
      return 0;
    }

    if (*dec) {
      if (dec_cfg.extent == 0)
        dec_cfg.extent = dec_cfg.family == "chain"     ? 1001
                         : dec_cfg.family == "trivial" ? 101
                                                       : 100;
      return run_decay(g, dec_cfg);
    }

    if (*probe) {
      json table = json::array();
      for (int extent : probe_extents) {
        LatticeSpec spec{extent, extent, 1, boundary_from_string(probe_boundary)};
        PhaseSystem sys(spec, Coupling::sine(), 0.0);
        InducedGraphBundle bundle = linearize(sys, trivial_lags(sys));
        SpectrumProbe sp = spectrum_probe(bundle);
        json row = sp.to_json();
        row["extent"] = extent;
        table.push_back(row);
        std::printf("extent %4d: spectrum [%+.6f, %+.2e], gap to 0 %.6f (%s)\n", extent,
                    sp.lambda_min, sp.lambda_max, sp.spectral_gap, sp.method.c_str());
      }
      write_json(artifact_path(g, "spectrum.json"), table);
      return 0;
    }
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
