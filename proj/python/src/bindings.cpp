#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "phasegraph/experiments.hpp"

namespace py = pybind11;
using namespace phasegraph;

namespace {

template <typename T>
std::string dump_json(const T& value) {
  return value.to_json().dump();
}

}  // namespace

PYBIND11_MODULE(_phasegraph, m) {
  m.doc() = "lattice phase oscillators, induced weighted graphs, and decay measurements";

  py::enum_<Boundary>(m, "Boundary")
      .value("free", Boundary::free)
      .value("torus", Boundary::torus);

  py::class_<Coord>(m, "Coord")
      .def(py::init<int, int>(), py::arg("x"), py::arg("y") = 0)
      .def_readonly("x", &Coord::x)
      .def_readonly("y", &Coord::y)
      .def("__repr__", [](const Coord& c) {
        return "Coord(" + std::to_string(c.x) + ", " + std::to_string(c.y) + ")";
      });

  py::class_<LatticeSpec>(m, "LatticeSpec")
      .def(py::init([](int nx, int ny, int range, Boundary boundary) {
             return LatticeSpec{nx, ny, range, boundary};
           }),
           py::arg("nx"), py::arg("ny") = 1, py::arg("range") = 1,
           py::arg("boundary") = Boundary::free)
      .def_readonly("nx", &LatticeSpec::nx)
      .def_readonly("ny", &LatticeSpec::ny)
      .def_readonly("range", &LatticeSpec::range)
      .def_readonly("boundary", &LatticeSpec::boundary)
      .def("size", &LatticeSpec::size)
      .def("index_of", &LatticeSpec::index_of)
      .def("coord_of", &LatticeSpec::coord_of);

  py::class_<Neighborhoods>(m, "Neighborhoods")
      .def(py::init<std::vector<std::vector<int>>>())
      .def("size", &Neighborhoods::size)
      .def("of", &Neighborhoods::of)
      .def("max_degree", &Neighborhoods::max_degree);

  py::class_<WeightedGraph>(m, "WeightedGraph")
      .def_static("from_json",
                  [](const std::string& text) {
                    return WeightedGraph::from_json(nlohmann::json::parse(text));
                  })
      .def("to_json", [](const WeightedGraph& g) { return g.to_json().dump(); })
      .def("size", &WeightedGraph::size)
      .def_property_readonly("boundary", &WeightedGraph::boundary)
      .def("edge_count", &WeightedGraph::edge_count)
      .def("weight", &WeightedGraph::weight)
      .def("measure", &WeightedGraph::measure)
      .def("max_measure", &WeightedGraph::max_measure)
      .def("degree", &WeightedGraph::degree)
      .def("max_degree", &WeightedGraph::max_degree)
      .def("is_connected", &WeightedGraph::is_connected)
      .def("distance", &WeightedGraph::distance)
      .def("ball", &WeightedGraph::ball)
      .def("ball_volume", &WeightedGraph::ball_volume)
      .def("eccentricity", &WeightedGraph::eccentricity);

  m.def("build_lattice_graph",
        py::overload_cast<const LatticeSpec&, const WeightFn&>(&build_lattice_graph),
        py::arg("spec"), py::arg("weight_fn"));
  m.def("build_lattice_graph",
        [](const LatticeSpec& spec) { return build_lattice_graph(spec); },
        py::arg("spec"));
  m.def("lattice_neighborhoods", &lattice_neighborhoods);
  m.def("apply_laplacian", &apply_laplacian, py::arg("graph"), py::arg("state"),
        py::arg("normalized") = true);
  m.def("lp_norm", &lp_norm);
  m.def("q_form", &q_form);

  py::class_<Coupling>(m, "Coupling")
      .def_static("sine", &Coupling::sine)
      .def_static("from_table", &Coupling::from_table)
      .def("h", &Coupling::h)
      .def("dh", &Coupling::dh)
      .def("ddh", &Coupling::ddh)
      .def_property_readonly("name", &Coupling::name)
      .def_property_readonly("odd", &Coupling::odd);

  py::class_<PhaseSystem>(m, "PhaseSystem")
      .def(py::init<LatticeSpec, Coupling, double>())
      .def(py::init<LatticeSpec, Coupling, Vector>())
      .def("size", &PhaseSystem::size)
      .def_property_readonly("lattice", &PhaseSystem::lattice)
      .def_property_readonly("neighborhoods", &PhaseSystem::neighborhoods)
      .def_property_readonly("omega", &PhaseSystem::omega)
      .def("to_json", [](const PhaseSystem& s) { return s.to_json().dump(); });

  py::class_<PhaseLockedSolution>(m, "PhaseLockedSolution")
      .def_readonly("lags", &PhaseLockedSolution::lags)
      .def_readonly("Omega", &PhaseLockedSolution::Omega)
      .def_readonly("residual_inf", &PhaseLockedSolution::residual_inf)
      .def_readonly("newton_iterations", &PhaseLockedSolution::newton_iterations)
      .def("to_json",
           [](const PhaseLockedSolution& s, const PhaseSystem& sys) {
             return s.to_json(sys).dump();
           });

  py::class_<SolveOptions>(m, "SolveOptions")
      .def(py::init<>())
      .def_readwrite("tol", &SolveOptions::tol)
      .def_readwrite("max_iterations", &SolveOptions::max_iterations)
      .def_readwrite("pin_vertex", &SolveOptions::pin_vertex)
      .def_readwrite("pin_value", &SolveOptions::pin_value)
      .def_readwrite("Omega", &SolveOptions::Omega);

  m.def("phase_lag_residual", &phase_lag_residual);
  m.def("solve_phase_locked", &solve_phase_locked, py::arg("system"),
        py::arg("initial_lags"), py::arg("options") = SolveOptions{});
  m.def("perturbation_rhs", &perturbation_rhs);

  py::class_<IntegrationControls>(m, "IntegrationControls")
      .def(py::init<>())
      .def_readwrite("rel_tol", &IntegrationControls::rel_tol)
      .def_readwrite("abs_tol", &IntegrationControls::abs_tol)
      .def_readwrite("output_times", &IntegrationControls::output_times)
      .def_readwrite("boundary_mass_warn_fraction",
                     &IntegrationControls::boundary_mass_warn_fraction);

  py::class_<PerturbationTrajectory>(m, "PerturbationTrajectory")
      .def_readonly("times", &PerturbationTrajectory::times)
      .def_readonly("l1", &PerturbationTrajectory::l1)
      .def_readonly("l2", &PerturbationTrajectory::l2)
      .def_readonly("linf", &PerturbationTrajectory::linf)
      .def_readonly("qform", &PerturbationTrajectory::qform)
      .def_readonly("boundary_mass", &PerturbationTrajectory::boundary_mass)
      .def_readonly("boundary_flagged", &PerturbationTrajectory::boundary_flagged)
      .def_readonly("snapshots", &PerturbationTrajectory::snapshots)
      .def_readonly("snapshot_times", &PerturbationTrajectory::snapshot_times);

  m.def("integrate_perturbation", &integrate_perturbation, py::arg("system"),
        py::arg("solution"), py::arg("psi0"), py::arg("controls"),
        py::arg("snapshot_times") = std::vector<double>{});

  m.def("trivial_lags", &trivial_lags);
  m.def("doubly_periodic_lags", &doubly_periodic_lags);
  m.def("chain_lags", &chain_lags);
  m.def("lag_field_csv", &lag_field_csv);

  py::class_<RotatingWaveSpec>(m, "RotatingWaveSpec")
      .def(py::init<>())
      .def_readwrite("extent", &RotatingWaveSpec::extent)
      .def_readwrite("newton_tol", &RotatingWaveSpec::newton_tol)
      .def_readwrite("max_iterations", &RotatingWaveSpec::max_iterations);

  py::class_<RotatingWaveResult>(m, "RotatingWaveResult")
      .def_readonly("system", &RotatingWaveResult::system)
      .def_readonly("solution", &RotatingWaveResult::solution)
      .def_readonly("radius", &RotatingWaveResult::radius)
      .def_readonly("invariants_ok", &RotatingWaveResult::invariants_ok);

  m.def("rotating_wave_lags", &rotating_wave_lags);
  m.def("rotating_wave_lag_at", &rotating_wave_lag_at);

  py::class_<InducedGraphBundle>(m, "InducedGraphBundle")
      .def_readonly("base", &InducedGraphBundle::base)
      .def_readonly("augmented", &InducedGraphBundle::augmented)
      .def_readonly("neighborhoods", &InducedGraphBundle::neighborhoods)
      .def_readonly("M", &InducedGraphBundle::M)
      .def_readonly("normalization", &InducedGraphBundle::normalization)
      .def_readonly("uniform_measure", &InducedGraphBundle::uniform_measure)
      .def_readonly("has_loops", &InducedGraphBundle::has_loops)
      .def("to_json", &dump_json<InducedGraphBundle>);

  m.def("linearize", &linearize, py::arg("system"), py::arg("solution"),
        py::arg("weight_epsilon") = 1e-12);
  m.def("apply_linearization", &apply_linearization);
  m.def("normalized_generator_apply", &normalized_generator_apply);
  m.def("nonlinear_remainder", &nonlinear_remainder);

  py::class_<HypothesisReport>(m, "HypothesisReport")
      .def_readonly("degree_ok", &HypothesisReport::degree_ok)
      .def_readonly("max_degree", &HypothesisReport::max_degree)
      .def_readonly("weights_ok", &HypothesisReport::weights_ok)
      .def_readonly("connected", &HypothesisReport::connected)
      .def_readonly("influence_metric_sup", &HypothesisReport::influence_metric_sup)
      .def("passed", &HypothesisReport::pass)
      .def("to_json", &dump_json<HypothesisReport>);

  m.def("check_hypotheses", &check_hypotheses, py::arg("system"), py::arg("solution"),
        py::arg("weight_epsilon") = 1e-12);

  py::class_<HeatSemigroup>(m, "HeatSemigroup")
      .def(py::init<const InducedGraphBundle&, double>(), py::arg("bundle"),
           py::arg("tail_tol") = 1e-13)
      .def("size", &HeatSemigroup::size)
      .def("apply", &HeatSemigroup::apply)
      .def("apply_multi", &HeatSemigroup::apply_multi);

  py::class_<HeatKernelEstimate>(m, "HeatKernelEstimate")
      .def_readonly("source", &HeatKernelEstimate::source)
      .def_readonly("times", &HeatKernelEstimate::times)
      .def_readonly("rows", &HeatKernelEstimate::rows)
      .def_readonly("method", &HeatKernelEstimate::method)
      .def_readonly("seed", &HeatKernelEstimate::seed)
      .def_readonly("n_samples", &HeatKernelEstimate::n_samples)
      .def_readonly("row_sum_defect", &HeatKernelEstimate::row_sum_defect)
      .def("q_row", &HeatKernelEstimate::q_row)
      .def("sidecar", [](const HeatKernelEstimate& e) { return e.sidecar().dump(); });

  m.def("transition_row", &transition_row);

  py::class_<CtrwSampler>(m, "CtrwSampler")
      .def(py::init<const InducedGraphBundle&>())
      .def("sample", &CtrwSampler::sample)
      .def("empirical_row", &CtrwSampler::empirical_row);

  m.def("sample_ctrw", &sample_ctrw);

  py::class_<DecayFit>(m, "DecayFit")
      .def_readonly("quantity", &DecayFit::quantity)
      .def_readonly("t_min", &DecayFit::t_min)
      .def_readonly("t_max", &DecayFit::t_max)
      .def_readonly("slope", &DecayFit::slope)
      .def_readonly("intercept", &DecayFit::intercept)
      .def_readonly("stderr_slope", &DecayFit::stderr_slope)
      .def_readonly("r2", &DecayFit::r2)
      .def_readonly("n_points", &DecayFit::n_points)
      .def("to_json", &dump_json<DecayFit>);

  m.def("fit_decay", &fit_decay, py::arg("times"), py::arg("values"), py::arg("t_min"),
        py::arg("t_max"), py::arg("quantity") = "");
  m.def("log_time_grid", &log_time_grid);

  py::class_<GradientDecayReport>(m, "GradientDecayReport")
      .def_readonly("degenerate", &GradientDecayReport::degenerate)
      .def_readonly("fit", &GradientDecayReport::fit)
      .def_readonly("eta", &GradientDecayReport::eta)
      .def_readonly("constant", &GradientDecayReport::constant)
      .def_readonly("times", &GradientDecayReport::times)
      .def_readonly("ratios", &GradientDecayReport::ratios);

  m.def("fit_gradient_decay", &fit_gradient_decay);

  py::class_<VGReport>(m, "VGReport")
      .def_readonly("d", &VGReport::d)
      .def_readonly("stderr_d", &VGReport::stderr_d)
      .def_readonly("r2", &VGReport::r2)
      .def_readonly("c1", &VGReport::c1)
      .def_readonly("c2", &VGReport::c2)
      .def_readonly("power_law", &VGReport::power_law)
      .def("to_json", &dump_json<VGReport>);

  m.def("check_vg", &check_vg);
  m.def("default_vg_radii", &default_vg_radii, py::arg("r_min"), py::arg("r_max"),
        py::arg("count") = 12);
  m.def("ball_radius_guard", &ball_radius_guard);

  py::class_<DeltaReport>(m, "DeltaReport")
      .def_readonly("alpha", &DeltaReport::alpha)
      .def_readonly("passed", &DeltaReport::pass)
      .def_readonly("w_min", &DeltaReport::w_min)
      .def_readonly("w_max", &DeltaReport::w_max)
      .def_readonly("max_degree", &DeltaReport::max_degree)
      .def_readonly("lemma_bound", &DeltaReport::lemma_bound)
      .def("to_json", &dump_json<DeltaReport>);

  m.def("check_delta", &check_delta, py::arg("graph"), py::arg("threshold") = 1e-12);
  m.def("estimate_poincare_constant", &estimate_poincare_constant);

  py::class_<PoincareReport>(m, "PoincareReport")
      .def_readonly("constants", &PoincareReport::constants)
      .def_readonly("sup", &PoincareReport::sup)
      .def("to_json", &dump_json<PoincareReport>);

  m.def("check_poincare", &check_poincare);

  py::class_<PairSample>(m, "PairSample")
      .def(py::init<>())
      .def_readwrite("random_pairs", &PairSample::random_pairs)
      .def_readwrite("near_radius", &PairSample::near_radius)
      .def_readwrite("seed", &PairSample::seed);

  py::class_<RoughCandidate>(m, "RoughCandidate")
      .def(py::init<>())
      .def_readwrite("a", &RoughCandidate::a)
      .def_readwrite("b", &RoughCandidate::b)
      .def_readwrite("c", &RoughCandidate::c)
      .def_readwrite("M", &RoughCandidate::M);

  py::class_<RoughIsometryCertificate>(m, "RoughIsometryCertificate")
      .def_readonly("passed", &RoughIsometryCertificate::pass)
      .def_readonly("a", &RoughIsometryCertificate::a)
      .def_readonly("b", &RoughIsometryCertificate::b)
      .def_readonly("c", &RoughIsometryCertificate::c)
      .def_readonly("M", &RoughIsometryCertificate::M)
      .def_readonly("candidate_rough1", &RoughIsometryCertificate::candidate_rough1)
      .def_readonly("candidate_rough3", &RoughIsometryCertificate::candidate_rough3)
      .def_readonly("pairs_checked", &RoughIsometryCertificate::pairs_checked)
      .def("to_json", &dump_json<RoughIsometryCertificate>);

  m.def("check_rough_isometry", &check_rough_isometry, py::arg("a"), py::arg("b"),
        py::arg("map"), py::arg("sample") = PairSample{},
        py::arg("candidate") = std::optional<RoughCandidate>{});

  py::class_<StabilityExperimentConfig>(m, "StabilityExperimentConfig")
      .def(py::init<>())
      .def_readwrite("family", &StabilityExperimentConfig::family)
      .def_readwrite("extent", &StabilityExperimentConfig::extent)
      .def_readwrite("n1", &StabilityExperimentConfig::n1)
      .def_readwrite("n2", &StabilityExperimentConfig::n2)
      .def_readwrite("chain_range", &StabilityExperimentConfig::chain_range)
      .def_readwrite("init", &StabilityExperimentConfig::init)
      .def_readwrite("eps", &StabilityExperimentConfig::eps)
      .def_readwrite("t_end", &StabilityExperimentConfig::t_end)
      .def_readwrite("output_points", &StabilityExperimentConfig::output_points)
      .def_readwrite("fit_t_min", &StabilityExperimentConfig::fit_t_min)
      .def_readwrite("fit_t_max", &StabilityExperimentConfig::fit_t_max)
      .def_readwrite("seed", &StabilityExperimentConfig::seed)
      .def_readwrite("remove_mean", &StabilityExperimentConfig::remove_mean)
      .def_readwrite("snapshot_times", &StabilityExperimentConfig::snapshot_times)
      .def_readwrite("force_run", &StabilityExperimentConfig::force_run)
      .def("to_json", [](const StabilityExperimentConfig& c) { return c.to_json().dump(); });

  py::class_<GateSummary>(m, "GateSummary")
      .def_readonly("hypotheses", &GateSummary::hypotheses)
      .def_readonly("vg", &GateSummary::vg)
      .def_readonly("delta", &GateSummary::delta)
      .def_readonly("poincare", &GateSummary::poincare)
      .def_readonly("rough", &GateSummary::rough)
      .def_readonly("dimension_ok", &GateSummary::dimension_ok)
      .def_readonly("passed", &GateSummary::pass)
      .def_readonly("refusal_reason", &GateSummary::refusal_reason)
      .def("to_json", &dump_json<GateSummary>);

  py::class_<StabilityReport>(m, "StabilityReport")
      .def_readonly("gate", &StabilityReport::gate)
      .def_readonly("trajectory", &StabilityReport::trajectory)
      .def_readonly("fit_linf", &StabilityReport::fit_linf)
      .def_readonly("fit_l2", &StabilityReport::fit_l2)
      .def_readonly("fit_sqrtq", &StabilityReport::fit_sqrtq)
      .def_readonly("l1_sup_ratio", &StabilityReport::l1_sup_ratio)
      .def_readonly("d_fitted", &StabilityReport::d_fitted)
      .def_readonly("target_linf", &StabilityReport::target_linf)
      .def_readonly("target_l2", &StabilityReport::target_l2)
      .def_readonly("verdict", &StabilityReport::verdict)
      .def("to_json", &dump_json<StabilityReport>)
      .def("trajectory_csv", &StabilityReport::trajectory_csv);

  py::register_exception<GateRefusal>(m, "GateRefusalError");

  py::class_<FamilySetup>(m, "FamilySetup")
      .def_readonly("system", &FamilySetup::system)
      .def_readonly("solution", &FamilySetup::solution)
      .def_readonly("center", &FamilySetup::center);

  m.def("make_family", &make_family);
  m.def("make_initial_perturbation", &make_initial_perturbation);
  m.def("evaluate_gate", &evaluate_gate);
  m.def("run_stability_experiment", &run_stability_experiment);

  py::class_<RemainderBoundReport>(m, "RemainderBoundReport")
      .def_readonly("n_samples", &RemainderBoundReport::n_samples)
      .def_readonly("delta", &RemainderBoundReport::delta)
      .def_readonly("bound_constant", &RemainderBoundReport::bound_constant)
      .def_readonly("violations", &RemainderBoundReport::violations)
      .def_readonly("max_ratio", &RemainderBoundReport::max_ratio);

  m.def("verify_remainder_bound", &verify_remainder_bound);

  py::class_<QSemigroupReport>(m, "QSemigroupReport")
      .def_readonly("degenerate", &QSemigroupReport::degenerate)
      .def_readonly("times", &QSemigroupReport::times)
      .def_readonly("ratios", &QSemigroupReport::ratios)
      .def_readonly("fit", &QSemigroupReport::fit)
      .def_readonly("eta_half", &QSemigroupReport::eta_half)
      .def_readonly("nonincreasing", &QSemigroupReport::nonincreasing);

  m.def("verify_q_semigroup_decay", &verify_q_semigroup_decay);

  py::class_<IntegralLemmaReport>(m, "IntegralLemmaReport")
      .def_readonly("gamma1", &IntegralLemmaReport::gamma1)
      .def_readonly("gamma2", &IntegralLemmaReport::gamma2)
      .def_readonly("min_exponent", &IntegralLemmaReport::min_exponent)
      .def_readonly("sup_ratio", &IntegralLemmaReport::sup_ratio)
      .def_readonly("bounded", &IntegralLemmaReport::bounded);

  m.def("verify_integral_lemma", &verify_integral_lemma);

  py::class_<SpectrumProbe>(m, "SpectrumProbe")
      .def_readonly("n", &SpectrumProbe::n)
      .def_readonly("lambda_min", &SpectrumProbe::lambda_min)
      .def_readonly("lambda_max", &SpectrumProbe::lambda_max)
      .def_readonly("spectral_gap", &SpectrumProbe::spectral_gap)
      .def_readonly("method", &SpectrumProbe::method);

  m.def("spectrum_probe", &spectrum_probe);
}
