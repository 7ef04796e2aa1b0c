#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "phasegraph/property_check.hpp"
#include "phasegraph/solutions.hpp"

using namespace phasegraph;

namespace {

std::vector<int> centers_around(const LatticeSpec& lat, int spread = 3) {
  const int cx = lat.nx / 2, cy = lat.is_1d() ? 0 : lat.ny / 2;
  if (lat.is_1d())
    return {lat.index_of({cx - 2 * spread, 0}), lat.index_of({cx - spread, 0}),
            lat.index_of({cx, 0}), lat.index_of({cx + spread, 0}),
            lat.index_of({cx + 2 * spread, 0})};
  return {lat.index_of({cx, cy}), lat.index_of({cx - spread, cy}),
          lat.index_of({cx + spread, cy}), lat.index_of({cx, cy - spread}),
          lat.index_of({cx, cy + spread})};
}

}  // namespace

TEST_CASE("volume growth of the 2D lattice fits d = 2 at large radii") {
  LatticeSpec lat{301, 301, 1, Boundary::torus};
  WeightedGraph g = build_lattice_graph(lat);
  VGReport report = check_vg(g, centers_around(lat), default_vg_radii(30, 140, 10));
  CHECK(std::abs(report.d - 2.0) <= 0.05);
  CHECK(report.power_law);
  CHECK(report.c1 > 0.0);
  CHECK(report.c1 <= report.c2);
  // the envelope brackets the measured volumes by construction
  CHECK(report.to_json()["d"].get<double>() == report.d);
}

TEST_CASE("small-radius volume fits read low by the O(1/r) correction") {
  LatticeSpec lat{101, 101, 1, Boundary::free};
  WeightedGraph g = build_lattice_graph(lat);
  VGReport report = check_vg(g, centers_around(lat), default_vg_radii(5, 40, 10));
  CHECK(report.d > 1.85);
  CHECK(report.d < 2.0);  // Vol = 8r^2 + 8r + 4 biases the slope downward
  CHECK(report.power_law);
}

TEST_CASE("volume growth of chains fits d = 1") {
  for (int range : {1, 2}) {
    LatticeSpec lat{2001, 1, range, Boundary::free};
    WeightedGraph g = build_lattice_graph(lat);
    VGReport report = check_vg(g, centers_around(lat, 10), default_vg_radii(50, 400, 10));
    CHECK(std::abs(report.d - 1.0) <= 0.05);
    CHECK(report.power_law);
  }
}

TEST_CASE("volume probes respect the boundary guard") {
  LatticeSpec lat{41, 41, 1, Boundary::free};
  WeightedGraph g = build_lattice_graph(lat);
  CHECK(ball_radius_guard(g, lat.index_of({20, 20})) == 19);
  CHECK_THROWS(check_vg(g, centers_around(lat), default_vg_radii(5, 25, 8)));
  LatticeSpec tor{40, 40, 1, Boundary::torus};
  WeightedGraph t = build_lattice_graph(tor);
  CHECK(ball_radius_guard(t, 0) == 19);
}

TEST_CASE("local elliptic property of the unit lattice") {
  WeightedGraph g = build_lattice_graph({21, 21, 1, Boundary::free});
  DeltaReport report = check_delta(g);
  CHECK(report.pass);
  CHECK(report.alpha == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(report.w_min == 1.0);
  CHECK(report.w_max == 1.0);
  CHECK(report.max_degree == 4);
  CHECK(report.lemma_bound == doctest::Approx(0.25).epsilon(1e-14));
  // alpha re-verified by scan: w >= alpha m on every edge in both orientations
  for (const Edge& e : g.edges()) {
    CHECK(e.w >= report.alpha * g.measure(e.u) * (1.0 - 1e-12));
    CHECK(e.w >= report.alpha * g.measure(e.v) * (1.0 - 1e-12));
  }
}

TEST_CASE("a vanishing weight defeats the elliptic property") {
  std::vector<Edge> edges{{0, 1, 1.0}, {1, 2, 1e-15}, {2, 3, 1.0}};
  WeightedGraph g = WeightedGraph::from_edges(4, edges);
  DeltaReport report = check_delta(g);
  CHECK_FALSE(report.pass);
  CHECK(report.alpha < 1e-12);
  CHECK(report.argmin_u == 1);
  CHECK(report.argmin_v == 2);
}

TEST_CASE("augmented rotating-wave graph satisfies the lemma bound") {
  RotatingWaveSpec spec;
  spec.extent = 16;
  RotatingWaveResult wave = rotating_wave_lags(spec);
  InducedGraphBundle bundle = linearize(wave.system, wave.solution);
  REQUIRE(bundle.has_loops);
  DeltaReport report = check_delta(bundle.augmented);
  CHECK(report.pass);
  CHECK(report.max_degree == 5);  // four neighbours plus the loop
  CHECK(report.alpha >= report.lemma_bound * (1.0 - 1e-12));
  CHECK(report.alpha > 0.0);
}

TEST_CASE("poincare constant of the two-vertex graph is 1/4") {
  WeightedGraph g = WeightedGraph::from_edges(2, {{0, 1, 1.0}});
  // closed form: numerator 2a^2, denominator r^2 * 2 * (2a)^2 = 8a^2
  const double c = poincare_constant_on_balls(g, {0, 1}, {0, 1}, 1);
  CHECK(c == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("poincare constants stay bounded over lattice balls") {
  LatticeSpec lat{41, 41, 1, Boundary::free};
  WeightedGraph g = build_lattice_graph(lat);
  PoincareReport report = check_poincare(g, centers_around(lat), {2, 4, 8});
  CHECK(report.constants.size() == 15);
  CHECK(std::isfinite(report.sup));
  CHECK(report.sup > 0.0);
  for (double c : report.constants) {
    CHECK(c > 0.0);
    CHECK(c <= report.sup);
  }
  auto j = report.to_json();
  CHECK(j["per_ball"].size() == 15);
}

TEST_CASE("poincare estimate is invariant under weight scaling") {
  LatticeSpec lat{31, 31, 1, Boundary::free};
  WeightedGraph g = build_lattice_graph(lat);
  WeightedGraph scaled = build_lattice_graph(lat, [](Coord, Coord) { return 7.3; });
  const int center = lat.index_of({15, 15});
  CHECK(estimate_poincare_constant(g, center, 4) ==
        doctest::Approx(estimate_poincare_constant(scaled, center, 4)).epsilon(1e-10));
}

TEST_CASE("adding an edge to the doubled ball cannot raise the constant") {
  LatticeSpec lat{31, 31, 1, Boundary::free};
  WeightedGraph g = build_lattice_graph(lat);
  const int center = lat.index_of({15, 15});
  const int r = 3;
  const auto ball_r = g.ball(center, r);
  const auto ball_2r = g.ball(center, 2 * r);
  const double before = poincare_constant_on_balls(g, ball_r, ball_2r, r);

  // extra edge between two outer-shell vertices at distance two
  const int u = lat.index_of({15 + 5, 15}), v = lat.index_of({15 + 5, 15 + 2});
  std::vector<Edge> edges = g.edges();
  edges.push_back({u, v, 1.0});
  WeightedGraph h = WeightedGraph::from_edges(g.size(), edges, g.boundary(), g.coords());
  const double after = poincare_constant_on_balls(h, ball_r, ball_2r, r);
  CHECK(after <= before * (1.0 + 1e-12));
}

TEST_CASE("disconnected frozen balls are rejected") {
  std::vector<Edge> edges{{0, 1, 1.0}, {2, 3, 1.0}};
  WeightedGraph g = WeightedGraph::from_edges(4, edges);
  CHECK_THROWS(poincare_constant_on_balls(g, {0, 1}, {0, 1, 2, 3}, 1));
}

TEST_CASE("poincare guard rejects oversized balls") {
  LatticeSpec lat{21, 21, 1, Boundary::free};
  WeightedGraph g = build_lattice_graph(lat);
  CHECK_THROWS(estimate_poincare_constant(g, lat.index_of({10, 10}), 8));
}

TEST_CASE("identity map certifies a graph against itself") {
  WeightedGraph g = build_lattice_graph({15, 15, 1, Boundary::free});
  std::vector<int> identity(g.size());
  for (int v = 0; v < g.size(); ++v) identity[v] = v;
  PairSample sample;
  sample.random_pairs = 300;
  RoughIsometryCertificate cert = check_rough_isometry(g, g, identity, sample);
  CHECK(cert.pass);
  CHECK(cert.a <= 1.0 + 1e-6);
  CHECK(cert.b <= 1e-6);
  CHECK(cert.c <= 1.0 + 1e-6);
  CHECK(cert.M <= 1e-6);
  CHECK(cert.pairs_checked > 300);
}

TEST_CASE("unit lattice and augmented rotating-wave graph are roughly isometric") {
  RotatingWaveSpec spec;
  spec.extent = 16;
  RotatingWaveResult wave = rotating_wave_lags(spec);
  InducedGraphBundle bundle = linearize(wave.system, wave.solution);
  WeightedGraph g1 = build_lattice_graph(wave.system.lattice());

  DeltaReport d2 = check_delta(bundle.augmented);
  RoughCandidate candidate;
  candidate.a = 2.0;
  candidate.b = 8.0;
  candidate.c = std::max({5.0 * d2.w_max / 4.0, 4.0 / d2.w_min, 2.0});

  std::vector<int> identity(g1.size());
  for (int v = 0; v < g1.size(); ++v) identity[v] = v;
  PairSample sample;
  sample.random_pairs = 500;
  RoughIsometryCertificate cert =
      check_rough_isometry(g1, bundle.augmented, identity, sample, candidate);
  CHECK(cert.pass);
  CHECK(cert.candidate_checked);
  CHECK(cert.candidate_rough1);
  CHECK(cert.candidate_rough3);
  CHECK(cert.M <= 1e-6);       // identity map covers everything
  CHECK(cert.b <= 8.0 + 1e-9); // detours around the core stay within +8
}

TEST_CASE("unit lattice and periodic-wave graph share their metric") {
  LatticeSpec lat{20, 20, 1, Boundary::torus};
  PhaseSystem sys(lat, Coupling::sine(), 0.0);
  PhaseLockedSolution sol = doubly_periodic_lags(sys, 5, 5);
  InducedGraphBundle bundle = linearize(sys, sol);
  WeightedGraph g1 = build_lattice_graph(lat);

  std::vector<int> identity(g1.size());
  for (int v = 0; v < g1.size(); ++v) identity[v] = v;
  PairSample sample;
  sample.random_pairs = 400;
  RoughIsometryCertificate cert =
      check_rough_isometry(g1, bundle.base, identity, sample);
  CHECK(cert.pass);
  CHECK(cert.a <= 1.0 + 1e-6);        // same edge set, same distances
  CHECK(cert.c == doctest::Approx(4.0 / bundle.normalization).epsilon(1e-10));
}

TEST_CASE("partial vertex maps are rejected") {
  WeightedGraph g = build_lattice_graph({5, 5, 1, Boundary::free});
  std::vector<int> short_map(g.size() - 1, 0);
  CHECK_THROWS(check_rough_isometry(g, g, short_map));
}
