#ifndef PHASEGRAPH_HEAT_KERNEL_HPP
#define PHASEGRAPH_HEAT_KERNEL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "phasegraph/linearization.hpp"

namespace phasegraph {

/// Action of the heat semigroup P_t = exp(L~ t) on state vectors.
///
/// Both bundle cases leave a generator of the form S - I with S the
/// symmetric jump matrix w~/normalization whose rows sum to one, so
/// P_t x = sum_k pois(k; t) S^k x. The series has nonnegative terms and the
/// neglected Poisson tail bounds the truncation error in every lp norm;
/// the tail is kept below `tail_tol`.
class HeatSemigroup {
 public:
  explicit HeatSemigroup(const InducedGraphBundle& bundle, double tail_tol = 1e-13);

  int size() const { return static_cast<int>(jump_.rows()); }
  Vector apply(const Vector& x, double t) const;
  /// One sweep of jump-chain powers serving several times at once.
  std::vector<Vector> apply_multi(const Vector& x, const std::vector<double>& ts) const;

 private:
  Eigen::SparseMatrix<double, Eigen::RowMajor> jump_;
  double tail_tol_;
};

/// Transition probabilities p_t(source, .) with provenance.
struct HeatKernelEstimate {
  int source = 0;
  std::vector<double> times;
  std::vector<Vector> rows;
  std::string method;                  // "exact" | "monte_carlo"
  std::uint64_t seed = 0;
  std::int64_t n_samples = 0;
  std::vector<double> row_sum_defect;  // 1 - sum(row), per time

  /// Symmetric density q_t(source, .) = p_t(source, .) / m~(.).
  Vector q_row(const InducedGraphBundle& bundle, std::size_t time_index) const;
  nlohmann::json sidecar() const;
};

/// Exact rows of P_t from `source` over a time grid.
HeatKernelEstimate transition_row(const InducedGraphBundle& bundle, int source,
                                  const std::vector<double>& times);

/// Uniformized continuous-time random walk on the augmented graph: holding
/// rate one at every vertex, jump law w~(v,.)/(M+1) with loops as jumps in
/// place. Walk streams derive from (master_seed, walk_index) so results do
/// not depend on scheduling.
class CtrwSampler {
 public:
  explicit CtrwSampler(const InducedGraphBundle& bundle);
  int sample(int v0, double t_end, std::uint64_t seed) const;
  /// Empirical distribution of `n_walks` endpoints; `estimate.rows[0]`.
  HeatKernelEstimate empirical_row(int v0, double t_end, std::int64_t n_walks,
                                   std::uint64_t master_seed) const;

 private:
  std::vector<int> row_begin_;
  std::vector<int> targets_;
  std::vector<double> cdf_;  // per-row cumulative jump probabilities
};

int sample_ctrw(const InducedGraphBundle& bundle, int v0, double t_end, std::uint64_t seed);

/// Ordinary least squares on (log t, log value) over the window.
struct DecayFit {
  std::string quantity;
  double t_min = 0.0, t_max = 0.0;
  double slope = 0.0, intercept = 0.0, stderr_slope = 0.0, r2 = 0.0;
  int n_points = 0;
  nlohmann::json to_json() const;
};

DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& value,
                   double t_min, double t_max, std::string quantity = "");

/// Fits the spatial-gradient decay exponent eta: the maximum over probe
/// vertices of |p_t(v1,.) - p_t(v2,.)| / (m(.) p_{2t}(v1,.)) is fitted
/// against t on log-log axes; the estimate predicts slope -eta/2.
struct GradientDecayReport {
  bool degenerate = false;
  DecayFit fit;
  double eta = 0.0;
  double constant = 0.0;   // exp(intercept)
  std::vector<double> times, ratios;
};

GradientDecayReport fit_gradient_decay(const InducedGraphBundle& bundle, int v1, int v2,
                                       std::vector<int> v3_set,
                                       const std::vector<double>& t_grid);

/// Log-spaced time grid, endpoints included.
std::vector<double> log_time_grid(double t_min, double t_max, int n_points);

}  // namespace phasegraph

#endif
