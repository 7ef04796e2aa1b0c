#include "phasegraph/heat_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace phasegraph {

namespace {

double poisson_log_pmf(long k, double t) {
  return static_cast<double>(k) * std::log(t) - t - std::lgamma(static_cast<double>(k) + 1.0);
}

// Smallest K (up to the scan stride) with P[Poisson(t) > K] <= tol, using
// the geometric bound tail(K) <= pmf(K+1) / (1 - t/(K+2)).
long poisson_window(double t, double tol) {
  long k = static_cast<long>(std::ceil(t + 10.0 * std::sqrt(t + 1.0) + 20.0));
  const double log_tol = std::log(tol);
  for (;;) {
    const double r = t / static_cast<double>(k + 2);
    if (r < 1.0 &&
        poisson_log_pmf(k + 1, t) + std::log(1.0 / (1.0 - r)) <= log_tol)
      return k;
    k += std::max<long>(8, k / 16);
  }
}

// SplitMix64; used to expand (seed, index) into independent engine seeds.
std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct Rng {
  std::uint64_t s0, s1;  // xorshift128+
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    s0 = splitmix64(sm);
    s1 = splitmix64(sm);
  }
  std::uint64_t next() {
    std::uint64_t x = s0;
    const std::uint64_t y = s1;
    s0 = y;
    x ^= x << 23;
    s1 = x ^ y ^ (x >> 17) ^ (y >> 26);
    return s1 + y;
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

// Knuth's product-of-uniforms sampler, chunked for larger means so the
// running product stays away from underflow. Bit-exact across platforms.
long poisson_sample(Rng& rng, double mean) {
  long total = 0;
  double remaining = mean;
  while (remaining > 0.0) {
    const double chunk = std::min(remaining, 25.0);
    const double limit = std::exp(-chunk);
    double p = 1.0;
    long k = 0;
    do {
      ++k;
      p *= rng.uniform();
    } while (p > limit);
    total += k - 1;
    remaining -= chunk;
  }
  return total;
}

}  // namespace

HeatSemigroup::HeatSemigroup(const InducedGraphBundle& bundle, double tail_tol)
    : tail_tol_(tail_tol) {
  const WeightedGraph& g = bundle.augmented;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(2 * g.edge_count());
  for (const Edge& e : g.edges()) {
    trip.emplace_back(e.u, e.v, e.w / bundle.normalization);
    if (e.u != e.v) trip.emplace_back(e.v, e.u, e.w / bundle.normalization);
  }
  jump_.resize(g.size(), g.size());
  jump_.setFromTriplets(trip.begin(), trip.end());
  jump_.makeCompressed();
}

std::vector<Vector> HeatSemigroup::apply_multi(const Vector& x,
                                               const std::vector<double>& ts) const {
  if (x.size() != jump_.rows()) throw std::invalid_argument("state vector length mismatch");
  for (double t : ts)
    if (t < 0.0) throw std::invalid_argument("semigroup time must be >= 0");

  double t_max = 0.0;
  for (double t : ts) t_max = std::max(t_max, t);
  const long k_max = t_max > 0.0 ? poisson_window(t_max, tail_tol_) : 0;

  std::vector<Vector> out(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i)
    out[i] = ts[i] == 0.0 ? x : Vector::Zero(x.size()).eval();

  Vector power = x;  // S^k x
  for (long k = 0; k <= k_max; ++k) {
    if (k > 0) power = jump_ * power;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const double t = ts[i];
      if (t == 0.0) continue;
      const double lp = poisson_log_pmf(k, t);
      if (lp > -745.0) out[i] += std::exp(lp) * power;
    }
  }
  return out;
}

Vector HeatSemigroup::apply(const Vector& x, double t) const {
  return apply_multi(x, {t})[0];
}

Vector HeatKernelEstimate::q_row(const InducedGraphBundle& bundle,
                                 std::size_t time_index) const {
  const Vector& p = rows.at(time_index);
  Vector q(p.size());
  for (int v = 0; v < p.size(); ++v) q[v] = p[v] / bundle.augmented.measure(v);
  return q;
}

nlohmann::json HeatKernelEstimate::sidecar() const {
  nlohmann::json j{{"method", method}, {"source", source}, {"times", times}};
  if (method == "monte_carlo") {
    j["seed"] = seed;
    j["n_samples"] = n_samples;
    j["method"] = "uniformized";
  }
  return j;
}

HeatKernelEstimate transition_row(const InducedGraphBundle& bundle, int source,
                                  const std::vector<double>& times) {
  if (source < 0 || source >= bundle.augmented.size())
    throw std::invalid_argument("source vertex out of range");
  HeatSemigroup semigroup(bundle);
  Vector delta = Vector::Zero(bundle.augmented.size());
  delta[source] = 1.0;

  HeatKernelEstimate est;
  est.source = source;
  est.times = times;
  est.method = "exact";
  est.rows = semigroup.apply_multi(delta, times);
  // the jump matrix is symmetric, so rows of P_t coincide with columns
  for (const Vector& row : est.rows) est.row_sum_defect.push_back(1.0 - row.sum());
  return est;
}

CtrwSampler::CtrwSampler(const InducedGraphBundle& bundle) {
  const WeightedGraph& g = bundle.augmented;
  row_begin_.assign(g.size() + 1, 0);
  for (int v = 0; v < g.size(); ++v)
    row_begin_[v + 1] = row_begin_[v] + g.degree(v);
  targets_.resize(row_begin_.back());
  cdf_.resize(row_begin_.back());
  for (int v = 0; v < g.size(); ++v) {
    const auto nbrs = g.neighbors(v);
    const auto ws = g.neighbor_weights(v);
    double acc = 0.0;
    for (std::size_t k = 0; k < nbrs.size(); ++k) {
      acc += ws[k] / bundle.normalization;
      targets_[row_begin_[v] + static_cast<int>(k)] = nbrs[k];
      cdf_[row_begin_[v] + static_cast<int>(k)] = acc;
    }
    // guard against rounding: the last cumulative entry is exactly one
    if (!nbrs.empty()) cdf_[row_begin_[v + 1] - 1] = 1.0;
  }
}

int CtrwSampler::sample(int v0, double t_end, std::uint64_t seed) const {
  if (t_end < 0.0) throw std::invalid_argument("walk time must be >= 0");
  Rng rng(seed);
  const long jumps = t_end > 0.0 ? poisson_sample(rng, t_end) : 0;
  int v = v0;
  for (long j = 0; j < jumps; ++j) {
    const double u = rng.uniform();
    const int begin = row_begin_[v], end = row_begin_[v + 1];
    const auto it = std::lower_bound(cdf_.begin() + begin, cdf_.begin() + end, u);
    v = targets_[static_cast<int>(it - cdf_.begin())];
  }
  return v;
}

HeatKernelEstimate CtrwSampler::empirical_row(int v0, double t_end, std::int64_t n_walks,
                                              std::uint64_t master_seed) const {
  const int n = static_cast<int>(row_begin_.size()) - 1;
  std::vector<std::int64_t> counts(n, 0);
#ifdef _OPENMP
#pragma omp parallel
  {
    std::vector<std::int64_t> local(n, 0);
#pragma omp for schedule(static)
    for (std::int64_t w = 0; w < n_walks; ++w) {
      std::uint64_t s = master_seed;
      std::uint64_t mix = splitmix64(s) ^ static_cast<std::uint64_t>(w) * 0x9e3779b97f4a7c15ULL;
      ++local[sample(v0, t_end, splitmix64(mix))];
    }
#pragma omp critical
    for (int v = 0; v < n; ++v) counts[v] += local[v];
  }
#else
  for (std::int64_t w = 0; w < n_walks; ++w) {
    std::uint64_t s = master_seed;
    std::uint64_t mix = splitmix64(s) ^ static_cast<std::uint64_t>(w) * 0x9e3779b97f4a7c15ULL;
    ++counts[sample(v0, t_end, splitmix64(mix))];
  }
#endif

  HeatKernelEstimate est;
  est.source = v0;
  est.times = {t_end};
  est.method = "monte_carlo";
  est.seed = master_seed;
  est.n_samples = n_walks;
  Vector row(n);
  for (int v = 0; v < n; ++v) row[v] = static_cast<double>(counts[v]) / n_walks;
  est.row_sum_defect.push_back(1.0 - row.sum());
  est.rows.push_back(std::move(row));
  return est;
}

int sample_ctrw(const InducedGraphBundle& bundle, int v0, double t_end, std::uint64_t seed) {
  return CtrwSampler(bundle).sample(v0, t_end, seed);
}

nlohmann::json DecayFit::to_json() const {
  return {{"quantity", quantity}, {"t_min", t_min},   {"t_max", t_max},
          {"slope", slope},       {"intercept", intercept},
          {"stderr", stderr_slope}, {"r2", r2},       {"n_points", n_points}};
}

DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& value,
                   double t_min, double t_max, std::string quantity) {
  if (t.size() != value.size()) throw std::invalid_argument("series length mismatch");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_min || t[i] > t_max) continue;
    if (!(value[i] > 0.0))
      throw std::invalid_argument("nonpositive value inside the fit window");
    if (!(t[i] > 0.0)) throw std::invalid_argument("nonpositive time inside the fit window");
    x.push_back(std::log(t[i]));
    y.push_back(std::log(value[i]));
  }
  const int n = static_cast<int>(x.size());
  if (n < 8) throw std::invalid_argument("fit window must contain at least 8 grid points");

  double xm = 0.0, ym = 0.0;
  for (int i = 0; i < n; ++i) {
    xm += x[i];
    ym += y[i];
  }
  xm /= n;
  ym /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (int i = 0; i < n; ++i) {
    sxx += (x[i] - xm) * (x[i] - xm);
    sxy += (x[i] - xm) * (y[i] - ym);
    syy += (y[i] - ym) * (y[i] - ym);
  }
  DecayFit fit;
  fit.quantity = std::move(quantity);
  fit.t_min = t_min;
  fit.t_max = t_max;
  fit.n_points = n;
  fit.slope = sxy / sxx;
  fit.intercept = ym - fit.slope * xm;
  double sse = 0.0;
  for (int i = 0; i < n; ++i) {
    const double e = y[i] - (fit.intercept + fit.slope * x[i]);
    sse += e * e;
  }
  fit.stderr_slope = n > 2 ? std::sqrt(sse / (n - 2) / sxx) : 0.0;
  fit.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  return fit;
}

GradientDecayReport fit_gradient_decay(const InducedGraphBundle& bundle, int v1, int v2,
                                       std::vector<int> v3_set,
                                       const std::vector<double>& t_grid) {
  GradientDecayReport report;
  if (v1 == v2) {
    report.degenerate = true;  // ratio identically zero
    return report;
  }
  std::vector<double> all_times;
  for (double t : t_grid) {
    all_times.push_back(t);
    all_times.push_back(2.0 * t);
  }
  HeatSemigroup semigroup(bundle);
  Vector d1 = Vector::Zero(bundle.augmented.size());
  Vector d2 = Vector::Zero(bundle.augmented.size());
  d1[v1] = 1.0;
  d2[v2] = 1.0;
  const auto rows1 = semigroup.apply_multi(d1, all_times);
  const auto rows2 = semigroup.apply_multi(d2, t_grid);

  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    const Vector& p1 = rows1[2 * i];
    const Vector& p1_2t = rows1[2 * i + 1];
    const Vector& p2 = rows2[i];
    double ratio = 0.0;
    if (v3_set.empty()) {
      for (int v = 0; v < p1.size(); ++v)
        if (p1_2t[v] > 1e-12)
          ratio = std::max(ratio, std::abs(p1[v] - p2[v]) /
                                      (bundle.augmented.measure(v) * p1_2t[v]));
    } else {
      for (int v : v3_set)
        if (p1_2t[v] > 1e-12)
          ratio = std::max(ratio, std::abs(p1[v] - p2[v]) /
                                      (bundle.augmented.measure(v) * p1_2t[v]));
    }
    report.times.push_back(t_grid[i]);
    report.ratios.push_back(ratio);
  }
  report.fit = fit_decay(report.times, report.ratios, report.times.front(),
                         report.times.back(), "gradient_ratio");
  report.eta = -2.0 * report.fit.slope;
  report.constant = std::exp(report.fit.intercept);
  return report;
}

std::vector<double> log_time_grid(double t_min, double t_max, int n_points) {
  if (!(t_min > 0.0) || !(t_max > t_min) || n_points < 2)
    throw std::invalid_argument("invalid log time grid");
  std::vector<double> ts(n_points);
  for (int i = 0; i < n_points; ++i)
    ts[i] = t_min * std::pow(t_max / t_min, static_cast<double>(i) / (n_points - 1));
  return ts;
}

}  // namespace phasegraph
