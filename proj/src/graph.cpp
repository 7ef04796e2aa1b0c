#include "phasegraph/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

namespace phasegraph {

std::string to_string(Boundary b) { return b == Boundary::free ? "free" : "torus"; }

Boundary boundary_from_string(const std::string& s) {
  if (s == "free") return Boundary::free;
  if (s == "torus") return Boundary::torus;
  throw std::invalid_argument("unknown boundary mode: " + s);
}

void LatticeSpec::validate() const {
  if (nx < 3) throw std::invalid_argument("lattice extent nx must be >= 3");
  if (ny != 1 && ny < 3) throw std::invalid_argument("lattice extent ny must be 1 (chain) or >= 3");
  if (range < 1) throw std::invalid_argument("influence range must be >= 1");
  if (boundary == Boundary::torus) {
    // wrap must not identify a pair twice or create self edges
    if (nx < 2 * range + 1 || (ny != 1 && ny < 2 * range + 1))
      throw std::invalid_argument("torus extent incompatible with influence range");
    if (ny == 1)
      throw std::invalid_argument("torus boundary is not supported for 1D chains");
  }
}

std::vector<Coord> LatticeSpec::offsets() const {
  std::vector<Coord> out;
  const int dy_max = is_1d() ? 0 : range;
  for (int dy = -dy_max; dy <= dy_max; ++dy)
    for (int dx = -range; dx <= range; ++dx) {
      const int l1 = std::abs(dx) + std::abs(dy);
      if (l1 >= 1 && l1 <= range) out.push_back({dx, dy});
    }
  return out;
}

std::optional<Coord> LatticeSpec::neighbor(Coord c, int dx, int dy) const {
  int x = c.x + dx, y = c.y + dy;
  if (boundary == Boundary::torus) {
    x = ((x % nx) + nx) % nx;
    y = ((y % ny) + ny) % ny;
    return Coord{x, y};
  }
  if (x < 0 || x >= nx || y < 0 || y >= ny) return std::nullopt;
  return Coord{x, y};
}

Neighborhoods::Neighborhoods(std::vector<std::vector<int>> adj) : adj_(std::move(adj)) {
  const int n = static_cast<int>(adj_.size());
  for (int v = 0; v < n; ++v) {
    auto& list = adj_[v];
    std::sort(list.begin(), list.end());
    if (std::adjacent_find(list.begin(), list.end()) != list.end())
      throw std::invalid_argument("duplicate entry in neighborhood list");
    for (int u : list) {
      if (u < 0 || u >= n) throw std::invalid_argument("neighborhood index out of range");
      if (u == v) throw std::invalid_argument("v may not belong to N(v)");
    }
  }
  // symmetry: v' in N(v) iff v in N(v')
  for (int v = 0; v < n; ++v)
    for (int u : adj_[v])
      if (!std::binary_search(adj_[u].begin(), adj_[u].end(), v))
        throw std::invalid_argument("neighborhood map is not symmetric");
}

int Neighborhoods::max_degree() const {
  std::size_t d = 0;
  for (const auto& list : adj_) d = std::max(d, list.size());
  return static_cast<int>(d);
}

WeightedGraph WeightedGraph::from_edges(int n_vertices, const std::vector<Edge>& edges,
                                        Boundary boundary, std::vector<Coord> coords) {
  if (n_vertices <= 0) throw std::invalid_argument("graph needs at least one vertex");
  if (!coords.empty() && static_cast<int>(coords.size()) != n_vertices)
    throw std::invalid_argument("coords length must match vertex count");

  WeightedGraph g;
  g.n_ = n_vertices;
  g.boundary_ = boundary;
  g.coords_ = std::move(coords);

  g.edges_.reserve(edges.size());
  for (const Edge& e : edges) {
    if (e.u < 0 || e.u >= n_vertices || e.v < 0 || e.v >= n_vertices)
      throw std::invalid_argument("edge endpoint out of range");
    if (e.w < 0.0) throw std::invalid_argument("negative edge weight");
    if (e.w == 0.0) continue;  // edge exists iff w > 0
    g.edges_.push_back({std::min(e.u, e.v), std::max(e.u, e.v), e.w});
  }
  std::sort(g.edges_.begin(), g.edges_.end(), [](const Edge& a, const Edge& b) {
    return a.u != b.u ? a.u < b.u : a.v < b.v;
  });
  for (std::size_t i = 1; i < g.edges_.size(); ++i)
    if (g.edges_[i].u == g.edges_[i - 1].u && g.edges_[i].v == g.edges_[i - 1].v)
      throw std::invalid_argument("duplicate edge");

  // CSR adjacency; a loop contributes a single (v, v) entry
  std::vector<int> deg(n_vertices, 0);
  for (const Edge& e : g.edges_) {
    ++deg[e.u];
    if (e.v != e.u) ++deg[e.v];
  }
  g.row_begin_.resize(n_vertices);
  g.row_end_.resize(n_vertices);
  int offset = 0;
  for (int v = 0; v < n_vertices; ++v) {
    g.row_begin_[v] = offset;
    g.row_end_[v] = offset;
    offset += deg[v];
  }
  g.adj_.resize(offset);
  g.adj_w_.resize(offset);
  auto push = [&g](int v, int u, double w) {
    const int slot = g.row_end_[v]++;
    g.adj_[slot] = u;
    g.adj_w_[slot] = w;
  };
  for (const Edge& e : g.edges_) {
    push(e.u, e.v, e.w);
    if (e.v != e.u) push(e.v, e.u, e.w);
  }

  g.measure_ = Vector::Zero(n_vertices);
  for (const Edge& e : g.edges_) {
    g.measure_[e.u] += e.w;
    if (e.v != e.u) g.measure_[e.v] += e.w;
  }
  return g;
}

double WeightedGraph::weight(int u, int v) const {
  for (int k = row_begin_[u]; k < row_end_[u]; ++k)
    if (adj_[k] == v) return adj_w_[k];
  return 0.0;
}

double WeightedGraph::max_measure() const { return measure_.size() ? measure_.maxCoeff() : 0.0; }
double WeightedGraph::min_measure() const { return measure_.size() ? measure_.minCoeff() : 0.0; }

int WeightedGraph::max_degree() const {
  int d = 0;
  for (int v = 0; v < n_; ++v) d = std::max(d, degree(v));
  return d;
}

std::span<const int> WeightedGraph::neighbors(int v) const {
  return {adj_.data() + row_begin_[v], static_cast<std::size_t>(row_end_[v] - row_begin_[v])};
}

std::span<const double> WeightedGraph::neighbor_weights(int v) const {
  return {adj_w_.data() + row_begin_[v], static_cast<std::size_t>(row_end_[v] - row_begin_[v])};
}

bool WeightedGraph::is_connected() const {
  if (n_ == 0) return false;
  const auto& dist = cached_distances(0);
  return std::find(dist.begin(), dist.end(), -1) == dist.end();
}

const std::vector<int>& WeightedGraph::cached_distances(int src) const {
  std::scoped_lock lock(dist_cache_->mutex);
  auto it = dist_cache_->map.find(src);
  if (it != dist_cache_->map.end()) return it->second;

  std::vector<int> dist(n_, -1);
  std::deque<int> queue;
  dist[src] = 0;
  queue.push_back(src);
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    for (int k = row_begin_[v]; k < row_end_[v]; ++k) {
      const int u = adj_[k];
      if (dist[u] < 0) {
        dist[u] = dist[v] + 1;
        queue.push_back(u);
      }
    }
  }
  return dist_cache_->map.emplace(src, std::move(dist)).first->second;
}

std::vector<int> WeightedGraph::distances_from(int src) const {
  if (src < 0 || src >= n_) throw std::invalid_argument("vertex out of range");
  return cached_distances(src);
}

std::vector<int> WeightedGraph::bfs_distances(int src, int max_radius) const {
  if (src < 0 || src >= n_) throw std::invalid_argument("vertex out of range");
  std::vector<int> dist(n_, -1);
  std::deque<int> queue;
  dist[src] = 0;
  queue.push_back(src);
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    if (max_radius >= 0 && dist[v] >= max_radius) continue;
    for (int k = row_begin_[v]; k < row_end_[v]; ++k) {
      const int u = adj_[k];
      if (dist[u] < 0) {
        dist[u] = dist[v] + 1;
        queue.push_back(u);
      }
    }
  }
  return dist;
}

int WeightedGraph::distance(int u, int v) const {
  if (u < 0 || u >= n_ || v < 0 || v >= n_) throw std::invalid_argument("vertex out of range");
  const int d = cached_distances(u)[v];
  if (d < 0) throw std::runtime_error("vertices are not connected");
  return d;
}

std::vector<int> WeightedGraph::ball(int v, int r) const {
  if (r < 0) throw std::invalid_argument("radius must be >= 0");
  const auto& dist = cached_distances(v);
  std::vector<int> out;
  for (int u = 0; u < n_; ++u)
    if (dist[u] >= 0 && dist[u] <= r) out.push_back(u);
  return out;
}

double WeightedGraph::ball_volume(int v, int r) const {
  double vol = 0.0;
  for (int u : ball(v, r)) vol += measure_[u];
  return vol;
}

int WeightedGraph::eccentricity(int v) const {
  const auto& dist = cached_distances(v);
  int ecc = 0;
  for (int d : dist) {
    if (d < 0) throw std::runtime_error("eccentricity of a disconnected graph");
    ecc = std::max(ecc, d);
  }
  return ecc;
}

nlohmann::json WeightedGraph::to_json() const {
  nlohmann::json vertices = nlohmann::json::array();
  for (int v = 0; v < n_; ++v) {
    nlohmann::json entry{{"id", v}};
    if (has_coords()) entry["coords"] = {coords_[v].x, coords_[v].y};
    vertices.push_back(std::move(entry));
  }
  nlohmann::json edges = nlohmann::json::array();
  for (const Edge& e : edges_) edges.push_back({{"u", e.u}, {"v", e.v}, {"w", e.w}});
  return {{"vertices", std::move(vertices)},
          {"edges", std::move(edges)},
          {"boundary", to_string(boundary_)}};
}

WeightedGraph WeightedGraph::from_json(const nlohmann::json& j) {
  const auto& jverts = j.at("vertices");
  const int n = static_cast<int>(jverts.size());
  std::vector<Coord> coords;
  for (int v = 0; v < n; ++v) {
    const auto& entry = jverts.at(v);
    if (entry.at("id").get<int>() != v)
      throw std::invalid_argument("vertex ids must be 0..n-1 in order");
    if (entry.contains("coords"))
      coords.push_back({entry["coords"].at(0).get<int>(), entry["coords"].at(1).get<int>()});
  }
  if (!coords.empty() && static_cast<int>(coords.size()) != n)
    throw std::invalid_argument("either all or no vertices carry coords");
  std::vector<Edge> edges;
  for (const auto& je : j.at("edges"))
    edges.push_back({je.at("u").get<int>(), je.at("v").get<int>(), je.at("w").get<double>()});
  return from_edges(n, edges, boundary_from_string(j.at("boundary").get<std::string>()),
                    std::move(coords));
}

double unit_weight(Coord, Coord) { return 1.0; }

WeightedGraph build_lattice_graph(const LatticeSpec& spec, const WeightFn& weight_fn) {
  spec.validate();
  const auto offsets = spec.offsets();
  std::vector<Edge> edges;
  std::vector<Coord> coords(spec.size());
  for (int v = 0; v < spec.size(); ++v) coords[v] = spec.coord_of(v);

  for (int v = 0; v < spec.size(); ++v) {
    const Coord c = spec.coord_of(v);
    for (const Coord& d : offsets) {
      const auto nb = spec.neighbor(c, d.x, d.y);
      if (!nb) continue;
      const int u = spec.index_of(*nb);
      if (u <= v) continue;  // each undirected pair once
      const double w = weight_fn(c, *nb);
      if (w < 0.0) throw std::invalid_argument("weight_fn returned a negative weight");
      if (w > 0.0) edges.push_back({v, u, w});
    }
  }
  WeightedGraph g =
      WeightedGraph::from_edges(spec.size(), edges, spec.boundary, std::move(coords));
  if (g.edge_count() == 0) throw std::invalid_argument("lattice graph has no edges");
  if (!g.is_connected()) throw std::invalid_argument("lattice graph is disconnected");
  return g;
}

Neighborhoods lattice_neighborhoods(const LatticeSpec& spec) {
  spec.validate();
  const auto offsets = spec.offsets();
  std::vector<std::vector<int>> adj(spec.size());
  for (int v = 0; v < spec.size(); ++v) {
    const Coord c = spec.coord_of(v);
    for (const Coord& d : offsets) {
      const auto nb = spec.neighbor(c, d.x, d.y);
      if (nb) adj[v].push_back(spec.index_of(*nb));
    }
  }
  return Neighborhoods(std::move(adj));
}

Vector apply_laplacian(const WeightedGraph& g, const Vector& f, bool normalized) {
  if (f.size() != g.size()) throw std::invalid_argument("state vector length mismatch");
  Vector out = Vector::Zero(g.size());
  for (int v = 0; v < g.size(); ++v) {
    const auto nbrs = g.neighbors(v);
    const auto ws = g.neighbor_weights(v);
    double acc = 0.0;
    for (std::size_t k = 0; k < nbrs.size(); ++k)
      acc += ws[k] * (f[nbrs[k]] - f[v]);  // loop terms vanish
    if (normalized) {
      const double m = g.measure(v);
      if (m <= 0.0) throw std::runtime_error("isolated vertex: m(v) = 0");
      acc /= m;
    }
    out[v] = acc;
  }
  return out;
}

double lp_norm(const Vector& f, double p) {
  if (std::isinf(p)) return norm_linf(f);
  if (p < 1.0) throw std::invalid_argument("lp norm requires p >= 1");
  if (p == 1.0) return norm_l1(f);
  if (p == 2.0) return norm_l2(f);
  double acc = 0.0;
  for (double x : f) acc += std::pow(std::abs(x), p);
  return std::pow(acc, 1.0 / p);
}

double norm_l1(const Vector& f) { return f.lpNorm<1>(); }
double norm_l2(const Vector& f) { return f.norm(); }
double norm_linf(const Vector& f) { return f.size() ? f.lpNorm<Eigen::Infinity>() : 0.0; }

double q_form(const Neighborhoods& nbhd, const Vector& x) {
  if (x.size() != nbhd.size()) throw std::invalid_argument("state vector length mismatch");
  double q = 0.0;
  for (int v = 0; v < nbhd.size(); ++v)
    for (int u : nbhd.of(v)) {
      const double d = x[u] - x[v];
      q += d * d;
    }
  return q;
}

}  // namespace phasegraph
