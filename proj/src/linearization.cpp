#include "phasegraph/linearization.hpp"

#include <cmath>
#include <stdexcept>

namespace phasegraph {

nlohmann::json InducedGraphBundle::to_json() const {
  nlohmann::json j = augmented.to_json();
  j["M"] = M;
  j["loops"] = has_loops;
  j["normalization"] = normalization;
  return j;
}

InducedGraphBundle linearize(const PhaseSystem& sys, const PhaseLockedSolution& sol,
                             double weight_epsilon) {
  const int n = sys.size();
  const auto& H = sys.coupling();
  const Vector& th = sol.lags;

  std::vector<Edge> edges;
  for (int v = 0; v < n; ++v) {
    for (int u : sys.neighborhoods().of(v)) {
      if (u < v) continue;  // each influence pair once
      const double w = H.dh(wrap_angle(th[u] - th[v]));
      if (w < -weight_epsilon)
        throw std::runtime_error("influence pair with H' < 0: the induced graph would be "
                                 "signed/directed (hypothesis 4.2 violated)");
      if (std::abs(w) < weight_epsilon) continue;  // analytically-zero weights drop out
      edges.push_back({v, u, w});
    }
  }

  std::vector<Coord> coords(n);
  for (int v = 0; v < n; ++v) coords[v] = sys.lattice().coord_of(v);

  InducedGraphBundle bundle;
  bundle.neighborhoods = sys.neighborhoods();
  bundle.base = WeightedGraph::from_edges(n, edges, sys.lattice().boundary, coords);

  bundle.M = bundle.base.max_measure();
  const double spread = bundle.M - bundle.base.min_measure();
  bundle.uniform_measure = spread <= 1e-12 * std::max(1.0, bundle.M);

  if (bundle.uniform_measure) {
    // first case of hypothesis 4.4: rescale by the common measure, no loops
    bundle.augmented = bundle.base;
    bundle.normalization = bundle.M;
    bundle.has_loops = false;
  } else {
    std::vector<Edge> aug = edges;
    for (int v = 0; v < n; ++v)
      aug.push_back({v, v, 1.0 + bundle.M - bundle.base.measure(v)});
    bundle.augmented =
        WeightedGraph::from_edges(n, aug, sys.lattice().boundary, std::move(coords));
    bundle.normalization = bundle.M + 1.0;
    bundle.has_loops = true;
  }
  return bundle;
}

Vector apply_linearization(const PhaseSystem& sys, const PhaseLockedSolution& sol,
                           const Vector& x) {
  if (x.size() != sys.size()) throw std::invalid_argument("state vector length mismatch");
  const auto& H = sys.coupling();
  const Vector& th = sol.lags;
  Vector out(sys.size());
#pragma omp parallel for schedule(static)
  for (int v = 0; v < sys.size(); ++v) {
    double acc = 0.0;
    for (int u : sys.neighborhoods().of(v))
      acc += H.dh(wrap_angle(th[u] - th[v])) * (x[u] - x[v]);
    out[v] = acc;
  }
  return out;
}

Vector normalized_generator_apply(const InducedGraphBundle& bundle, const Vector& x) {
  if (x.size() != bundle.base.size())
    throw std::invalid_argument("state vector length mismatch");
  Vector out(x.size());
  const auto& g = bundle.base;  // loops contribute nothing to the action
#pragma omp parallel for schedule(static)
  for (int v = 0; v < g.size(); ++v) {
    const auto nbrs = g.neighbors(v);
    const auto ws = g.neighbor_weights(v);
    double acc = 0.0;
    for (std::size_t k = 0; k < nbrs.size(); ++k)
      acc += ws[k] * (x[nbrs[k]] - x[v]);
    out[v] = acc / bundle.normalization;
  }
  return out;
}

Vector nonlinear_remainder(const PhaseSystem& sys, const PhaseLockedSolution& sol,
                           const InducedGraphBundle& bundle, const Vector& psi) {
  Vector rhs = perturbation_rhs(sys, sol, psi);
  Vector lin = normalized_generator_apply(bundle, psi);
  return rhs / bundle.normalization - lin;
}

nlohmann::json HypothesisReport::to_json() const {
  auto pairs_json = [](const std::vector<std::pair<int, int>>& ps) {
    nlohmann::json arr = nlohmann::json::array();
    for (auto [a, b] : ps) arr.push_back({a, b});
    return arr;
  };
  return {{"degree_ok", degree_ok},
          {"max_degree", max_degree},
          {"weights_ok", weights_ok},
          {"negative_pairs", pairs_json(negative_pairs)},
          {"asymmetric_pairs", pairs_json(asymmetric_pairs)},
          {"connected", connected},
          {"influence_metric_sup", influence_metric_sup},
          {"pass", pass()}};
}

HypothesisReport check_hypotheses(const PhaseSystem& sys, const PhaseLockedSolution& sol,
                                  double weight_epsilon) {
  const int n = sys.size();
  const auto& H = sys.coupling();
  const Vector& th = sol.lags;

  HypothesisReport report;
  report.max_degree = sys.neighborhoods().max_degree();
  bool degree_lower = true;
  for (int v = 0; v < n; ++v)
    if (sys.neighborhoods().of(v).empty()) degree_lower = false;
  report.degree_ok = degree_lower && report.max_degree >= 1;

  report.weights_ok = true;
  std::vector<Edge> edges;
  for (int v = 0; v < n; ++v) {
    for (int u : sys.neighborhoods().of(v)) {
      if (u < v) continue;
      const double a = H.dh(wrap_angle(th[u] - th[v]));
      const double b = H.dh(wrap_angle(th[v] - th[u]));
      if (std::abs(a - b) > 1e-12 && report.asymmetric_pairs.size() < 16) {
        report.asymmetric_pairs.emplace_back(v, u);
        report.weights_ok = false;
      }
      if (a < -weight_epsilon) {
        if (report.negative_pairs.size() < 16) report.negative_pairs.emplace_back(v, u);
        report.weights_ok = false;
        continue;
      }
      if (std::abs(a) >= weight_epsilon) edges.push_back({v, u, a});
    }
  }

  report.connected = false;
  report.influence_metric_sup = -1;
  if (!edges.empty()) {
    WeightedGraph g = WeightedGraph::from_edges(n, edges, sys.lattice().boundary);
    report.connected = g.is_connected();
    if (report.connected) {
      int sup = 0;
      for (int v = 0; v < n; ++v) {
        const auto dist = g.distances_from(v);
        for (int u : sys.neighborhoods().of(v))
          if (u > v) sup = std::max(sup, dist[u]);
      }
      report.influence_metric_sup = sup;
    }
  }
  return report;
}

}  // namespace phasegraph
