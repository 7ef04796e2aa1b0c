#ifndef PHASEGRAPH_LINEARIZATION_HPP
#define PHASEGRAPH_LINEARIZATION_HPP

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "phasegraph/graph.hpp"
#include "phasegraph/phase_system.hpp"

namespace phasegraph {

/// Weighted graph induced by linearizing about a phase-locked solution,
/// together with its loop-augmented companion whose vertex measure is
/// uniformly M + 1. When the base measure is already vertex-independent no
/// loops are added and time is rescaled by the common measure instead.
struct InducedGraphBundle {
  WeightedGraph base;        // w(v,v') = H'(lag_{v'} - lag_v) on influence pairs
  WeightedGraph augmented;   // base + loops, or base itself when uniform
  Neighborhoods neighborhoods;
  double M = 0.0;            // sup_v m(v) over the base graph
  double normalization = 0.0;  // common measure (uniform case) or M + 1
  bool uniform_measure = false;
  bool has_loops = false;

  nlohmann::json to_json() const;
};

/// Builds the induced bundle. Influence pairs whose weight is below
/// `weight_epsilon` in magnitude are dropped from the edge set; a pair with
/// H' < -weight_epsilon violates the nonnegativity hypothesis and throws.
InducedGraphBundle linearize(const PhaseSystem& sys, const PhaseLockedSolution& sol,
                             double weight_epsilon = 1e-12);

/// Action of L_theta directly from the coupling derivative (unnormalized).
Vector apply_linearization(const PhaseSystem& sys, const PhaseLockedSolution& sol,
                           const Vector& x);

/// Action of the normalized generator: (1/normalization) L_theta, equal to
/// the graph Laplacian of the augmented graph.
Vector normalized_generator_apply(const InducedGraphBundle& bundle, const Vector& x);

/// Nonlinear remainder G(psi) = rhs(psi)/normalization - L~ psi, with
/// G(0) = 0 and G'(0) = 0.
Vector nonlinear_remainder(const PhaseSystem& sys, const PhaseLockedSolution& sol,
                           const InducedGraphBundle& bundle, const Vector& psi);

struct HypothesisReport {
  // Hyp 4.1: bounded symmetric influence topology
  bool degree_ok = false;
  int max_degree = 0;
  // Hyp 4.2: symmetric nonnegative weights on influence pairs
  bool weights_ok = false;
  std::vector<std::pair<int, int>> negative_pairs;   // witnesses, capped
  std::vector<std::pair<int, int>> asymmetric_pairs;
  // Hyp 4.3: induced graph connected, metric bounded over influence pairs
  bool connected = false;
  int influence_metric_sup = -1;  // sup over influence pairs of rho(v,v')
  bool pass() const { return degree_ok && weights_ok && connected; }

  nlohmann::json to_json() const;
};

/// Audits Hypotheses 4.1-4.3 from the system and solution alone; failures
/// are report entries with witness pairs, never exceptions.
HypothesisReport check_hypotheses(const PhaseSystem& sys, const PhaseLockedSolution& sol,
                                  double weight_epsilon = 1e-12);

}  // namespace phasegraph

#endif
