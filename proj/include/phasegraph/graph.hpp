#ifndef PHASEGRAPH_GRAPH_HPP
#define PHASEGRAPH_GRAPH_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"

namespace phasegraph {

using Vector = Eigen::VectorXd;

enum class Boundary { free, torus };

std::string to_string(Boundary b);
Boundary boundary_from_string(const std::string& s);

/// Integer lattice coordinates of a vertex. 1D graphs use y == 0.
struct Coord {
  int x = 0;
  int y = 0;
  friend bool operator==(const Coord&, const Coord&) = default;
};

/// Rectangular lattice extent and edge rule. ny == 1 selects a 1D chain.
/// Two cells are coupled when 0 < |dx| + |dy| <= range (wrapped on a torus).
struct LatticeSpec {
  int nx = 0;
  int ny = 1;
  int range = 1;
  Boundary boundary = Boundary::free;

  bool is_1d() const { return ny == 1; }
  int size() const { return nx * ny; }
  int index_of(Coord c) const { return c.y * nx + c.x; }
  Coord coord_of(int v) const { return {v % nx, v / nx}; }
  void validate() const;
  /// Influence offsets (dx,dy) with 0 < |dx|+|dy| <= range.
  std::vector<Coord> offsets() const;
  /// Neighbor of c in direction (dx,dy), or nullopt when it falls off a free
  /// boundary. Torus mode wraps.
  std::optional<Coord> neighbor(Coord c, int dx, int dy) const;
};

struct Edge {
  int u = 0;
  int v = 0;
  double w = 0.0;
};

/// Symmetric influence topology N(v); v' in N(v) iff v in N(v').
/// Kept separately from edge weights because pairs whose induced weight
/// vanishes still belong to the influence set.
class Neighborhoods {
 public:
  Neighborhoods() = default;
  explicit Neighborhoods(std::vector<std::vector<int>> adj);

  int size() const { return static_cast<int>(adj_.size()); }
  const std::vector<int>& of(int v) const { return adj_[v]; }
  int max_degree() const;

 private:
  std::vector<std::vector<int>> adj_;
};

/// Finite weighted graph G = (V, E, w): symmetric nonnegative weights,
/// loops allowed, vertex measures m(v) = sum of incident weights cached.
/// Immutable after construction; safe for concurrent reads (the memoized
/// distance cache is internally synchronized).
class WeightedGraph {
 public:
  WeightedGraph() = default;

  /// Builds from an undirected edge list. Edges are stored once in canonical
  /// (u <= v) order; duplicates and negative weights are rejected, zero
  /// weights dropped.
  static WeightedGraph from_edges(int n_vertices, const std::vector<Edge>& edges,
                                  Boundary boundary = Boundary::free,
                                  std::vector<Coord> coords = {});
  static WeightedGraph from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  int size() const { return n_; }
  Boundary boundary() const { return boundary_; }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }

  bool has_coords() const { return !coords_.empty(); }
  const std::vector<Coord>& coords() const { return coords_; }

  double weight(int u, int v) const;
  double measure(int v) const { return measure_[v]; }
  const Vector& measures() const { return measure_; }
  double max_measure() const;
  double min_measure() const;

  /// Number of distinct neighbors, counting a loop once.
  int degree(int v) const { return row_end_[v] - row_begin_[v]; }
  int max_degree() const;
  std::span<const int> neighbors(int v) const;
  std::span<const double> neighbor_weights(int v) const;

  bool is_connected() const;

  /// Hop metric over stored edges (BFS); throws if v' is unreachable.
  int distance(int u, int v) const;
  /// Full single-source distance map, memoized; -1 marks unreachable.
  std::vector<int> distances_from(int src) const;
  /// Uncached single-source BFS for one-shot sweeps over many sources.
  std::vector<int> bfs_distances(int src, int max_radius = -1) const;
  std::vector<int> ball(int v, int r) const;
  double ball_volume(int v, int r) const;
  int eccentricity(int v) const;

 private:
  int n_ = 0;
  Boundary boundary_ = Boundary::free;
  std::vector<Edge> edges_;          // canonical u <= v, sorted
  std::vector<int> row_begin_, row_end_;
  std::vector<int> adj_;             // CSR neighbor lists (loops appear once)
  std::vector<double> adj_w_;
  Vector measure_;
  std::vector<Coord> coords_;

  // memoized single-source distance maps; shared across copies since the
  // graph is immutable
  struct DistanceCache {
    std::mutex mutex;
    std::unordered_map<int, std::vector<int>> map;
  };
  std::shared_ptr<DistanceCache> dist_cache_ = std::make_shared<DistanceCache>();

  const std::vector<int>& cached_distances(int src) const;
};

using WeightFn = std::function<double(Coord, Coord)>;

/// Unit edge weights.
double unit_weight(Coord, Coord);

/// Builds the lattice graph for `spec`, weighting each influence pair by
/// `weight_fn`. Pairs with zero weight are dropped (an edge exists iff
/// w > 0); negative weights and disconnected results are rejected.
WeightedGraph build_lattice_graph(const LatticeSpec& spec,
                                  const WeightFn& weight_fn = unit_weight);

/// The influence topology of `spec` independent of any weight function.
Neighborhoods lattice_neighborhoods(const LatticeSpec& spec);

/// Graph Laplacian of Definition-3.1 form. Normalized divides by m(v);
/// unnormalized applies sum w(v,v')(f(v') - f(v)) only. Loops contribute
/// nothing either way. Throws on an isolated vertex in normalized mode.
Vector apply_laplacian(const WeightedGraph& g, const Vector& f, bool normalized = true);

/// lp norm for p >= 1; pass std::numeric_limits<double>::infinity() for sup.
double lp_norm(const Vector& f, double p);
double norm_l1(const Vector& f);
double norm_l2(const Vector& f);
double norm_linf(const Vector& f);

/// Discrete gradient energy Q(x) = sum_v sum_{v' in N(v)} |x_{v'} - x_v|^2.
/// Both ordered pairs of an influence pair are counted.
double q_form(const Neighborhoods& nbhd, const Vector& x);

}  // namespace phasegraph

#endif
