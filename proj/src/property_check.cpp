#include "phasegraph/property_check.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>
#include <set>
#include <stdexcept>

#include <Eigen/Dense>

namespace phasegraph {

nlohmann::json VGReport::to_json() const {
  return {{"d", d},   {"stderr", stderr_d}, {"r2", r2},       {"c1", c1},
          {"c2", c2}, {"power_law", power_law}, {"centers", centers}, {"radii", radii}};
}

int ball_radius_guard(const WeightedGraph& g, int center) {
  if (g.has_coords()) {
    int nx = 0, ny = 0;
    for (const Coord& c : g.coords()) {
      nx = std::max(nx, c.x + 1);
      ny = std::max(ny, c.y + 1);
    }
    const bool torus = g.boundary() == Boundary::torus;
    // one hop moves coordinates by at most the largest edge jump
    int jump = 1;
    for (const Edge& e : g.edges()) {
      if (e.u == e.v) continue;
      int dx = std::abs(g.coords()[e.u].x - g.coords()[e.v].x);
      int dy = std::abs(g.coords()[e.u].y - g.coords()[e.v].y);
      if (torus) {
        dx = std::min(dx, nx - dx);
        dy = std::min(dy, ny - dy);
      }
      jump = std::max(jump, dx + dy);
    }
    if (torus) {
      const int extent = ny > 1 ? std::min(nx, ny) : nx;
      return (extent / 2 - 1) / jump;
    }
    const Coord c = g.coords()[center];
    int hull = std::min(c.x, nx - 1 - c.x);
    if (ny > 1) hull = std::min({hull, c.y, ny - 1 - c.y});
    return (hull - 1) / jump;  // keep even the ball's rim off the hull
  }
  // coordinate-free graphs: stay within half the reach of the center
  return g.eccentricity(center) / 2;
}

std::vector<int> default_vg_radii(int r_min, int r_max, int count) {
  std::vector<int> radii;
  for (int i = 0; i < count; ++i) {
    const double r = r_min * std::pow(static_cast<double>(r_max) / r_min,
                                      static_cast<double>(i) / (count - 1));
    const int ri = static_cast<int>(std::lround(r));
    if (radii.empty() || ri > radii.back()) radii.push_back(ri);
  }
  return radii;
}

VGReport check_vg(const WeightedGraph& g, const std::vector<int>& centers,
                  const std::vector<int>& radii) {
  if (centers.size() < 5) throw std::invalid_argument("VG probe needs at least 5 centers");
  if (radii.size() < 6) throw std::invalid_argument("VG probe needs at least 6 radii");
  int r_max = 0;
  for (int r : radii) {
    if (r < 1) throw std::invalid_argument("VG radii must be >= 1");
    r_max = std::max(r_max, r);
  }
  for (int c : centers)
    if (r_max > ball_radius_guard(g, c))
      throw std::invalid_argument("VG radius violates the boundary guard at a probe center");

  std::vector<double> xs, ys;
  double c1 = std::numeric_limits<double>::infinity(), c2 = 0.0;
  for (int c : centers) {
    double prev = -1.0;
    for (int r : radii) {
      const double vol = g.ball_volume(c, r);
      if (vol < prev) throw std::runtime_error("ball volume decreased with radius");
      prev = vol;
      xs.push_back(std::log(static_cast<double>(r)));
      ys.push_back(std::log(vol));
    }
  }
  const int n = static_cast<int>(xs.size());
  double xm = 0.0, ym = 0.0;
  for (int i = 0; i < n; ++i) {
    xm += xs[i];
    ym += ys[i];
  }
  xm /= n;
  ym /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (int i = 0; i < n; ++i) {
    sxx += (xs[i] - xm) * (xs[i] - xm);
    sxy += (xs[i] - xm) * (ys[i] - ym);
    syy += (ys[i] - ym) * (ys[i] - ym);
  }
  VGReport report;
  report.centers = centers;
  report.radii = radii;
  report.d = sxy / sxx;
  double sse = 0.0;
  const double intercept = ym - report.d * xm;
  for (int i = 0; i < n; ++i) {
    const double e = ys[i] - (intercept + report.d * xs[i]);
    sse += e * e;
  }
  report.stderr_d = n > 2 ? std::sqrt(sse / (n - 2) / sxx) : 0.0;
  report.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  report.power_law = report.r2 >= 0.99;

  for (int i = 0; i < n; ++i) {
    const double ratio = std::exp(ys[i] - report.d * xs[i]);
    c1 = std::min(c1, ratio);
    c2 = std::max(c2, ratio);
  }
  report.c1 = c1;
  report.c2 = c2;
  return report;
}

nlohmann::json DeltaReport::to_json() const {
  return {{"alpha", alpha},         {"pass", pass},
          {"threshold", threshold}, {"w_min", w_min},
          {"w_max", w_max},         {"max_degree", max_degree},
          {"lemma_bound", lemma_bound}, {"argmin", {argmin_u, argmin_v}}};
}

DeltaReport check_delta(const WeightedGraph& g, double threshold) {
  DeltaReport report;
  report.threshold = threshold;
  report.max_degree = g.max_degree();
  report.alpha = std::numeric_limits<double>::infinity();
  report.w_min = std::numeric_limits<double>::infinity();
  report.w_max = 0.0;
  for (const Edge& e : g.edges()) {
    report.w_min = std::min(report.w_min, e.w);
    report.w_max = std::max(report.w_max, e.w);
    const double ru = e.w / g.measure(e.u);
    const double rv = e.w / g.measure(e.v);
    if (ru < report.alpha) {
      report.alpha = ru;
      report.argmin_u = e.u;
      report.argmin_v = e.v;
    }
    if (rv < report.alpha) {
      report.alpha = rv;
      report.argmin_u = e.v;
      report.argmin_v = e.u;
    }
  }
  if (g.edge_count() == 0) report.alpha = 0.0;
  report.lemma_bound = report.w_min / (report.max_degree * report.w_max);
  report.pass = report.alpha > threshold;
  return report;
}

double poincare_constant_on_balls(const WeightedGraph& g, const std::vector<int>& ball_r,
                                  const std::vector<int>& ball_2r, int r) {
  const int n2 = static_cast<int>(ball_2r.size());
  if (n2 < 2) throw std::invalid_argument("Poincare ball is trivial");
  std::vector<int> local(g.size(), -1);
  for (int i = 0; i < n2; ++i) local[ball_2r[i]] = i;

  // numerator: sum_{B(r)} m(v) |f(v) - f_B|^2 with the m-weighted ball mean
  double vol = 0.0;
  for (int v : ball_r) vol += g.measure(v);
  Eigen::VectorXd mw = Eigen::VectorXd::Zero(n2);  // measure on B(r), 0 outside
  for (int v : ball_r) mw[local[v]] = g.measure(v);
  // A = diag(mw) - mw mw^T / vol  (PSD, vanishes on constants over B(r))
  Eigen::MatrixXd A = Eigen::MatrixXd(mw.asDiagonal());
  A.noalias() -= (mw * mw.transpose()) / vol;

  // denominator: r^2 * sum over ordered pairs in B(2r) of w (f(v)-f(v'))^2
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n2, n2);
  for (const Edge& e : g.edges()) {
    if (e.u == e.v) continue;  // loops do not enter the gradient
    const int lu = local[e.u], lv = local[e.v];
    if (lu < 0 || lv < 0) continue;
    const double w2 = 2.0 * e.w;  // both orientations
    B(lu, lu) += w2;
    B(lv, lv) += w2;
    B(lu, lv) -= w2;
    B(lv, lu) -= w2;
  }
  B *= static_cast<double>(r) * r;

  // restrict both forms to the complement of constants
  Eigen::MatrixXd basis(n2, n2 - 1);
  {
    Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(n2, 1);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(ones);
    Eigen::MatrixXd q = qr.householderQ();
    basis = q.rightCols(n2 - 1);
  }
  Eigen::MatrixXd Ar = basis.transpose() * A * basis;
  Eigen::MatrixXd Br = basis.transpose() * B * basis;

  // the Dirichlet form is definite on the quotient iff the 2r-ball subgraph
  // is connected
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> br_eigs(Br, Eigen::EigenvaluesOnly);
  if (br_eigs.eigenvalues().minCoeff() <=
      1e-10 * std::max(1.0, br_eigs.eigenvalues().maxCoeff()))
    throw std::runtime_error("Dirichlet form singular beyond constants "
                             "(disconnected 2r-ball)");
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Ar, Br);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("generalized eigensolver failed");
  return es.eigenvalues().maxCoeff();
}

double estimate_poincare_constant(const WeightedGraph& g, int center, int r) {
  if (r < 1) throw std::invalid_argument("Poincare radius must be >= 1");
  if (2 * r > ball_radius_guard(g, center))
    throw std::invalid_argument("Poincare ball B(center, 2r) violates the boundary guard");
  return poincare_constant_on_balls(g, g.ball(center, r), g.ball(center, 2 * r), r);
}

nlohmann::json PoincareReport::to_json() const {
  nlohmann::json per_ball = nlohmann::json::array();
  std::size_t k = 0;
  for (int c : centers)
    for (int r : radii)
      per_ball.push_back({{"center", c}, {"r", r}, {"constant", constants[k++]}});
  return {{"per_ball", per_ball}, {"sup", sup}};
}

PoincareReport check_poincare(const WeightedGraph& g, const std::vector<int>& centers,
                              const std::vector<int>& radii) {
  PoincareReport report;
  report.centers = centers;
  report.radii = radii;
  for (int c : centers)
    for (int r : radii) {
      const double constant = estimate_poincare_constant(g, c, r);
      report.constants.push_back(constant);
      report.sup = std::max(report.sup, constant);
    }
  return report;
}

nlohmann::json RoughIsometryCertificate::to_json() const {
  nlohmann::json j{{"pass", pass},
                   {"rough1", rough1},
                   {"rough2", rough2},
                   {"rough3", rough3},
                   {"a", a},
                   {"b", b},
                   {"c", c},
                   {"M", M},
                   {"pairs_checked", pairs_checked},
                   {"worst_pair", {worst_pair_u, worst_pair_v}}};
  if (candidate_checked)
    j["candidate"] = {{"a", candidate.a},
                      {"b", candidate.b},
                      {"c", candidate.c ? *candidate.c : -1.0},
                      {"M", candidate.M},
                      {"rough1", candidate_rough1},
                      {"rough3", candidate_rough3}};
  return j;
}

RoughIsometryCertificate check_rough_isometry(const WeightedGraph& a, const WeightedGraph& b,
                                              const std::vector<int>& map,
                                              const PairSample& sample,
                                              std::optional<RoughCandidate> candidate) {
  if (static_cast<int>(map.size()) != a.size())
    throw std::invalid_argument("vertex map must be total on the source graph");
  for (int v : map)
    if (v < 0 || v >= b.size()) throw std::invalid_argument("vertex map image out of range");

  RoughIsometryCertificate cert;

  // sampled pair set grouped by source: random pairs plus all pairs within
  // near_radius; distances come from one-shot BFS sweeps per source
  std::vector<std::vector<int>> targets(a.size());
  {
    std::mt19937_64 rng(sample.seed);
    std::uniform_int_distribution<int> pick(0, a.size() - 1);
    for (int i = 0; i < sample.random_pairs; ++i) {
      const int u = pick(rng), v = pick(rng);
      if (u != v) targets[u].push_back(v);
    }
  }

  double a_star = 1.0;
  double worst = 0.0;
  std::vector<double> rho_a, rho_b;
  for (int u = 0; u < a.size(); ++u) {
    const bool near_sweep = sample.near_radius > 0;
    if (targets[u].empty() && !near_sweep) continue;
    const auto dist_a = a.bfs_distances(u);
    const auto dist_b = b.bfs_distances(map[u]);
    auto record = [&](int v) {
      if (dist_a[v] < 0 || dist_b[map[v]] < 0)
        throw std::runtime_error("disconnected pair in rough-isometry sample");
      const double ra = dist_a[v], rb = dist_b[map[v]];
      rho_a.push_back(ra);
      rho_b.push_back(rb);
      if (ra > 0.0 && rb > 0.0) a_star = std::max({a_star, rb / ra, ra / rb});
      if (std::abs(rb - ra) > worst) {
        worst = std::abs(rb - ra);
        cert.worst_pair_u = u;
        cert.worst_pair_v = v;
      }
    };
    for (int v : targets[u]) record(v);
    if (near_sweep)
      for (int v = u + 1; v < a.size(); ++v)
        if (dist_a[v] >= 1 && dist_a[v] <= sample.near_radius) record(v);
  }
  double b_star = 0.0;
  for (std::size_t i = 0; i < rho_a.size(); ++i) {
    b_star = std::max(b_star, rho_a[i] / a_star - rho_b[i]);
    b_star = std::max(b_star, rho_b[i] - a_star * rho_a[i]);
  }
  cert.a = std::max(a_star, 1.0 + 1e-9);
  cert.b = std::max(b_star, 1e-12);
  cert.rough1 = true;  // (a*, b*) feasible on the sample by construction
  cert.pairs_checked = rho_a.size();

  // --- (Rough2): exact covering radius of the image via multi-source BFS
  {
    std::vector<int> dist(b.size(), -1);
    std::deque<int> queue;
    for (int v = 0; v < a.size(); ++v)
      if (dist[map[v]] < 0) {
        dist[map[v]] = 0;
        queue.push_back(map[v]);
      }
    while (!queue.empty()) {
      const int v = queue.front();
      queue.pop_front();
      for (int u : b.neighbors(v))
        if (dist[u] < 0) {
          dist[u] = dist[v] + 1;
          queue.push_back(u);
        }
    }
    int covering = 0;
    bool covered = true;
    for (int d : dist) {
      if (d < 0) covered = false;
      covering = std::max(covering, d);
    }
    cert.M = std::max(static_cast<double>(covering), 1e-12);
    cert.rough2 = covered;
  }

  // --- (Rough3) over all vertices
  double c_star = 1.0;
  for (int v = 0; v < a.size(); ++v) {
    const double ma = a.measure(v), mb = b.measure(map[v]);
    if (ma <= 0.0 || mb <= 0.0) {
      c_star = std::numeric_limits<double>::infinity();
      break;
    }
    c_star = std::max({c_star, mb / ma, ma / mb});
  }
  cert.c = std::max(c_star, 1.0 + 1e-9);
  cert.rough3 = std::isfinite(c_star);

  cert.pass = cert.rough1 && cert.rough2 && cert.rough3;

  if (candidate) {
    cert.candidate_checked = true;
    cert.candidate = *candidate;
    cert.candidate_rough1 = true;
    for (std::size_t i = 0; i < rho_a.size(); ++i) {
      if (rho_b[i] < rho_a[i] / candidate->a - candidate->b ||
          rho_b[i] > candidate->a * rho_a[i] + candidate->b) {
        cert.candidate_rough1 = false;
        break;
      }
    }
    cert.candidate_rough3 = true;
    if (candidate->c) {
      for (int v = 0; v < a.size(); ++v) {
        const double ma = a.measure(v), mb = b.measure(map[v]);
        if (mb < ma / *candidate->c || mb > *candidate->c * ma) {
          cert.candidate_rough3 = false;
          break;
        }
      }
    }
  }
  return cert;
}

}  // namespace phasegraph
