#ifndef PHASEGRAPH_PROPERTY_CHECK_HPP
#define PHASEGRAPH_PROPERTY_CHECK_HPP

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "phasegraph/graph.hpp"
#include "phasegraph/heat_kernel.hpp"

namespace phasegraph {

/// Volume-growth audit: slope of log Vol(v, r) against log r pooled over
/// probe centers, plus the explicit constant envelope over the probe set.
struct VGReport {
  double d = 0.0;
  double stderr_d = 0.0;
  double r2 = 0.0;
  double c1 = 0.0;  // min Vol / r^d over probes
  double c2 = 0.0;  // max Vol / r^d
  bool power_law = false;  // fails when r2 < 0.99
  std::vector<int> centers;
  std::vector<int> radii;
  nlohmann::json to_json() const;
};

/// Probe radii must respect the boundary guard: at most the distance from
/// each center to the truncation boundary (free) or half the extent (torus).
/// Requires >= 6 radii and >= 5 centers.
VGReport check_vg(const WeightedGraph& g, const std::vector<int>& centers,
                  const std::vector<int>& radii);

/// Log-ish integer radius ladder for volume fits.
std::vector<int> default_vg_radii(int r_min, int r_max, int count = 12);

/// Largest probe radius at `center` that keeps metric balls unclipped:
/// coordinate distance to the hull (free) or half the extent (torus),
/// divided by the largest single-hop coordinate jump.
int ball_radius_guard(const WeightedGraph& g, int center);

struct DeltaReport {
  double alpha = 0.0;      // min over edges of w(v,v')/m(v)
  bool pass = false;       // alpha above threshold
  double threshold = 0.0;
  double w_min = 0.0, w_max = 0.0;  // Lemma-3.4 witnesses
  int max_degree = 0;
  double lemma_bound = 0.0;         // w_min / (D w_max)
  int argmin_u = -1, argmin_v = -1;
  nlohmann::json to_json() const;
};

/// Local elliptic property: scans every stored edge in both orientations.
DeltaReport check_delta(const WeightedGraph& g, double threshold = 1e-12);

/// Optimal constant of the ball Poincare inequality at (center, r): the
/// largest generalized Rayleigh quotient
///   sum_{B(r)} m |f - f_B|^2  /  r^2 sum_{v,v' in B(2r)} w (f(v)-f(v'))^2
/// over f supported on B(2r) modulo constants, solved as a symmetric
/// generalized eigenproblem. Throws if B(2r) leaves the boundary guard or
/// the induced Dirichlet form is singular beyond the constants.
double estimate_poincare_constant(const WeightedGraph& g, int center, int r);

/// Internal variant with frozen ball sets (used by the monotonicity check).
double poincare_constant_on_balls(const WeightedGraph& g, const std::vector<int>& ball_r,
                                  const std::vector<int>& ball_2r, int r);

struct PoincareReport {
  std::vector<int> centers;
  std::vector<int> radii;
  std::vector<double> constants;  // per (center, radius), center-major
  double sup = 0.0;
  nlohmann::json to_json() const;
};

PoincareReport check_poincare(const WeightedGraph& g, const std::vector<int>& centers,
                              const std::vector<int>& radii);

/// Pair sampling policy for (Rough1).
struct PairSample {
  int random_pairs = 2000;
  int near_radius = 6;     // additionally: all pairs within this distance
  std::uint64_t seed = 1;
};

struct RoughCandidate {
  double a = 2.0;
  double b = 8.0;
  std::optional<double> c;  // default: fitted from measures
  double M = 1.0;
};

struct RoughIsometryCertificate {
  bool pass = false;
  bool rough1 = false, rough2 = false, rough3 = false;
  // smallest sampled-feasible constants (clamped to the open constraints)
  double a = 1.0, b = 0.0, c = 1.0, M = 0.0;
  // candidate verdicts, when a candidate was supplied
  bool candidate_checked = false;
  bool candidate_rough1 = false, candidate_rough3 = false;
  RoughCandidate candidate;
  std::size_t pairs_checked = 0;
  int worst_pair_u = -1, worst_pair_v = -1;  // largest distortion witness
  nlohmann::json to_json() const;
};

/// Verifies (Rough1)-(Rough3) for `map: A -> B` over sampled pairs, all
/// vertices (measures), and the exact covering radius.
RoughIsometryCertificate check_rough_isometry(const WeightedGraph& a, const WeightedGraph& b,
                                              const std::vector<int>& map,
                                              const PairSample& sample = {},
                                              std::optional<RoughCandidate> candidate = {});

}  // namespace phasegraph

#endif
