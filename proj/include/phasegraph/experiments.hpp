#ifndef PHASEGRAPH_EXPERIMENTS_HPP
#define PHASEGRAPH_EXPERIMENTS_HPP

#include <optional>
#include <stdexcept>
#include <string>

#include "phasegraph/heat_kernel.hpp"
#include "phasegraph/linearization.hpp"
#include "phasegraph/property_check.hpp"
#include "phasegraph/solutions.hpp"

namespace phasegraph {

struct StabilityExperimentConfig {
  std::string family = "trivial";  // trivial | rotwave | periodic | chain
  int extent = 101;
  int n1 = 5, n2 = 5;              // periodic family wave numbers
  int chain_range = 1;
  std::string init = "indicator";  // indicator | gaussian | random
  double eps = 1e-3;               // l1 size of psi0 before mean removal
  double gaussian_sigma = 3.0;
  int random_support = 32;
  double t_end = 50.0;
  int output_points = 33;
  double fit_t_min = 5.0, fit_t_max = 50.0;
  std::uint64_t seed = 7;
  bool remove_mean = true;         // drop the conserved constant mode
  bool force_run = false;          // run negative demos past a failed gate
  double rel_tol = 1e-8, abs_tol = 1e-12;
  /// Finite truncations bias log-log volume slopes below the asymptotic
  /// dimension (Vol = 8r^2 + 8r + 4 on the unit lattice), so the d >= 2
  /// gate allows this much slack.
  double gate_dimension_threshold = 1.9;
  std::vector<double> snapshot_times;  // full states recorded at these times

  nlohmann::json to_json() const;
  std::string hash() const;
};

struct GateSummary {
  HypothesisReport hypotheses;
  VGReport vg;
  DeltaReport delta;
  PoincareReport poincare;
  std::optional<RoughIsometryCertificate> rough;
  bool dimension_ok = false;
  bool pass = false;
  std::string refusal_reason;
  nlohmann::json to_json() const;
};

/// Thrown when the hypothesis gate refuses an experiment (CLI exit code 2).
struct GateRefusal : std::runtime_error {
  GateSummary gate;
  GateRefusal(const std::string& what, GateSummary g)
      : std::runtime_error(what), gate(std::move(g)) {}
};

struct StabilityReport {
  StabilityExperimentConfig config;
  GateSummary gate;
  PerturbationTrajectory trajectory;
  DecayFit fit_linf, fit_l2, fit_sqrtq;
  double fit_window_t_max = 0.0;   // after the boundary-mass clip
  double l1_sup_ratio = 0.0;       // sup_t |psi(t)|_1 / |psi0|_1
  double d_fitted = 0.0;
  double target_linf = -1.0;       // -d/2 and -d/4 at the fitted dimension
  double target_l2 = -0.5;
  // verdict against the d = 2 targets: -1.0 +- 0.15 (sup), -0.5 +- 0.10 (l2),
  // l1 ratio <= 3
  bool verdict = false;
  nlohmann::json to_json() const;
  std::string trajectory_csv() const;
};

struct FamilySetup {
  PhaseSystem system;
  PhaseLockedSolution solution;
  int center = 0;
};

FamilySetup make_family(const StabilityExperimentConfig& cfg);
Vector make_initial_perturbation(const StabilityExperimentConfig& cfg,
                                 const PhaseSystem& sys, int center);

/// Audits the gate for the configured family without integrating.
GateSummary evaluate_gate(const StabilityExperimentConfig& cfg, const FamilySetup& setup,
                          const InducedGraphBundle& bundle);

StabilityReport run_stability_experiment(const StabilityExperimentConfig& cfg);

/// Lemma-5.1 style remainder audit over random perturbations.
struct RemainderBoundReport {
  int n_samples = 0;
  double delta = 0.0;
  double bound_constant = 0.0;  // K1 / (2 normalization)
  int violations = 0;
  double max_ratio = 0.0;       // max |G(psi)|_1 / (K Q(psi))
  Vector worst_psi;             // only stored on violation
  nlohmann::json to_json() const;
};

RemainderBoundReport verify_remainder_bound(const PhaseSystem& sys,
                                            const PhaseLockedSolution& sol,
                                            const InducedGraphBundle& bundle,
                                            int n_samples, double delta,
                                            std::uint64_t seed);

/// Decay of sqrt(Q(P_t psi)) / |P_t |psi||_2 along the semigroup.
struct QSemigroupReport {
  bool degenerate = false;     // Q(psi) = 0
  std::vector<double> times, ratios;
  DecayFit fit;
  double eta_half = 0.0;
  bool nonincreasing = false;  // up to 5% fit noise
  nlohmann::json to_json() const;
};

QSemigroupReport verify_q_semigroup_decay(const InducedGraphBundle& bundle, const Vector& psi,
                                          const std::vector<double>& t_grid);

/// Numeric audit of the convolution-decay integral lemma.
struct IntegralLemmaReport {
  double gamma1 = 0.0, gamma2 = 0.0;
  double min_exponent = 0.0;   // min{g1 + g2 - 1, g1, g2}
  std::vector<double> times, integrals, ratios;
  double sup_ratio = 0.0;
  bool bounded = false;
  nlohmann::json to_json() const;
};

IntegralLemmaReport verify_integral_lemma(double gamma1, double gamma2,
                                          const std::vector<double>& t_grid);

/// Extreme eigenvalues of the unnormalized linearization on the truncation.
struct SpectrumProbe {
  int n = 0;
  double lambda_min = 0.0, lambda_max = 0.0;
  double spectral_gap = 0.0;   // |largest eigenvalue below -1e-9|
  std::string method;          // "dense" | "lanczos"
  nlohmann::json to_json() const;
};

SpectrumProbe spectrum_probe(const InducedGraphBundle& bundle);

}  // namespace phasegraph

#endif
