#include "phasegraph/solutions.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

namespace phasegraph {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kHalfPi = std::numbers::pi / 2.0;
}

PhaseLockedSolution trivial_lags(const PhaseSystem& sys) {
  if (std::abs(sys.coupling().h(0.0)) > 1e-15)
    throw std::invalid_argument("H(0) != 0: zero lags do not solve the phase-lag equation");
  if (!sys.uniform_omega())
    throw std::invalid_argument("trivial lags require identical intrinsic frequencies");
  PhaseLockedSolution sol;
  sol.lags = Vector::Zero(sys.size());
  sol.Omega = sys.omega()[0];
  sol.residual_inf = norm_linf(phase_lag_residual(sys, sol.lags, sol.Omega));
  return sol;
}

PhaseLockedSolution chain_lags(const PhaseSystem& sys) {
  if (!sys.lattice().is_1d())
    throw std::invalid_argument("chain lags require a 1D lattice");
  return trivial_lags(sys);
}

PhaseLockedSolution doubly_periodic_lags(const PhaseSystem& sys, int n1, int n2) {
  if (n1 < 5 || n2 < 5)
    throw std::invalid_argument("doubly periodic lags need N1, N2 >= 5 so the induced "
                                "weights cos(2*pi/N) stay positive");
  const LatticeSpec& lat = sys.lattice();
  if (lat.boundary != Boundary::torus || lat.is_1d() || lat.range != 1)
    throw std::invalid_argument("doubly periodic lags live on a nearest-neighbor torus");
  if (lat.nx % n1 != 0 || lat.ny % n2 != 0)
    throw std::invalid_argument("torus extents must be divisible by N1 and N2");
  if (!sys.coupling().odd())
    throw std::invalid_argument("doubly periodic cancellation requires an odd coupling");
  if (!sys.uniform_omega())
    throw std::invalid_argument("doubly periodic lags require identical frequencies");

  PhaseLockedSolution sol;
  sol.lags = Vector(sys.size());
  for (int v = 0; v < sys.size(); ++v) {
    const Coord c = lat.coord_of(v);
    sol.lags[v] = wrap_positive(2.0 * kPi * (c.x % n1) / n1 + 2.0 * kPi * (c.y % n2) / n2);
  }
  sol.Omega = sys.omega()[0];
  sol.residual_inf = norm_linf(phase_lag_residual(sys, sol.lags, sol.Omega));
  return sol;
}

namespace {

// Dihedral bookkeeping for the rotating wave. Lattice cells are addressed in
// centred coordinates: the four core cells are (0,0), (0,1), (1,0), (1,1) and
// the quarter turn rho(i,j) = (j, 1-i) advances lags by pi/2; the diagonal
// reflection (i,j) -> (j,i) negates them.
struct SectorRef {
  int p = 0, q = 0;   // base cell in the closed sector 1 <= q <= p
  int sign = 1;       // lag = sign * theta(p, q) + quarter_turns * pi/2
  int quarter_turns = 0;
};

SectorRef decompose(int i, int j) {
  SectorRef ref;
  int p = i, q = j;
  while (!(p >= 1 && q >= 1)) {
    const int np = 1 - q;
    q = p;
    p = np;
    ++ref.quarter_turns;
  }
  if (q > p) {
    std::swap(p, q);
    ref.sign = -1;
  }
  ref.p = p;
  ref.q = q;
  return ref;
}

struct SectorIndex {
  int radius;
  explicit SectorIndex(int R) : radius(R) {}
  int count() const { return radius * (radius - 1) / 2; }
  // unknowns are the strict-sector cells 1 <= q < p <= R
  int of(int p, int q) const { return (p - 1) * (p - 2) / 2 + (q - 1); }
};

}  // namespace

RotatingWaveResult rotating_wave_lags(const RotatingWaveSpec& spec) {
  if (spec.extent < 8 || spec.extent % 2 != 0)
    throw std::invalid_argument("rotating wave needs an even extent >= 8");
  const int R = spec.extent / 2;
  const int lo = -(R - 1), hi = R;  // centred coordinate range
  const SectorIndex index(R);
  const int n_unknowns = index.count();

  // value of a cell given the current sector unknowns; diagonal cells are 0
  auto lag_of = [&](const Eigen::VectorXd& theta, int i, int j) {
    const SectorRef ref = decompose(i, j);
    const double base = ref.p == ref.q ? 0.0 : theta[index.of(ref.p, ref.q)];
    return ref.sign * base + ref.quarter_turns * kHalfPi;
  };
  const int offs[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  auto residual = [&](const Eigen::VectorXd& theta) {
    Eigen::VectorXd F(n_unknowns);
    for (int p = 2; p <= R; ++p)
      for (int q = 1; q < p; ++q) {
        const double th_c = theta[index.of(p, q)];
        double acc = 0.0;
        for (const auto& d : offs) {
          const int ni = p + d[0], nj = q + d[1];
          if (ni < lo || ni > hi || nj < lo || nj > hi) continue;  // free boundary
          acc += std::sin(lag_of(theta, ni, nj) - th_c);
        }
        F[index.of(p, q)] = acc;
      }
    return F;
  };

  // angular seed: lags track the polar angle, clockwise, zero on the diagonal
  Eigen::VectorXd theta(n_unknowns);
  for (int p = 2; p <= R; ++p)
    for (int q = 1; q < p; ++q)
      theta[index.of(p, q)] = kPi / 4.0 - std::atan2(q - 0.5, p - 0.5);

  Eigen::VectorXd F = residual(theta);
  double fnorm = F.lpNorm<Eigen::Infinity>();
  int iter = 0;
  for (; iter < spec.max_iterations && fnorm > spec.newton_tol; ++iter) {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n_unknowns, n_unknowns);
    for (int p = 2; p <= R; ++p)
      for (int q = 1; q < p; ++q) {
        const int row = index.of(p, q);
        const double th_c = theta[row];
        for (const auto& d : offs) {
          const int ni = p + d[0], nj = q + d[1];
          if (ni < lo || ni > hi || nj < lo || nj > hi) continue;
          const double c = std::cos(lag_of(theta, ni, nj) - th_c);
          const SectorRef ref = decompose(ni, nj);
          if (ref.p != ref.q) J(row, index.of(ref.p, ref.q)) += c * ref.sign;
          J(row, row) -= c;
        }
      }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(J);
    Eigen::VectorXd step = lu.solve(-F);
    if (!step.allFinite()) throw std::runtime_error("rotating-wave Newton step failed");

    double lambda = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 14; ++bt, lambda *= 0.5) {
      Eigen::VectorXd cand = theta + lambda * step;
      Eigen::VectorXd cf = residual(cand);
      const double cn = cf.lpNorm<Eigen::Infinity>();
      if (cn < (1.0 - 0.25 * lambda) * fnorm || cn <= spec.newton_tol) {
        theta = std::move(cand);
        F = std::move(cf);
        fnorm = cn;
        accepted = true;
        break;
      }
    }
    if (!accepted) throw std::runtime_error("rotating-wave Newton stalled");
  }
  if (fnorm > spec.newton_tol)
    throw std::runtime_error("rotating-wave Newton did not converge");

  // assemble the full lattice solution
  LatticeSpec lat{spec.extent, spec.extent, 1, Boundary::free};
  PhaseSystem sys(lat, Coupling::sine(), 0.0);
  PhaseLockedSolution sol;
  sol.lags = Vector(lat.size());
  for (int v = 0; v < lat.size(); ++v) {
    const Coord c = lat.coord_of(v);
    sol.lags[v] = wrap_positive(lag_of(theta, c.x - (R - 1), c.y - (R - 1)));
  }
  sol.Omega = 0.0;
  sol.newton_iterations = iter;
  sol.residual_inf = norm_linf(phase_lag_residual(sys, sol.lags, sol.Omega));

  RotatingWaveResult result{std::move(sys), std::move(sol), R, true, ""};

  // sector invariants, outermost two rings excluded
  char witness[128] = {0};
  const int guard = R - 2;
  auto lag = [&](int i, int j) { return lag_of(theta, i, j); };
  for (int i = 1; i <= guard && result.invariants_ok; ++i) {
    if (std::abs(lag(i, i)) > 1e-10) {
      std::snprintf(witness, sizeof witness, "theta(%d,%d) != 0", i, i);
      result.invariants_ok = false;
    }
  }
  for (int i = 1; i <= guard && result.invariants_ok; ++i) {
    if (std::abs(lag(i, 0) - (kHalfPi - lag(i, 1))) > 1e-10) {
      std::snprintf(witness, sizeof witness, "theta(%d,0) != pi/2 - theta(%d,1)", i, i);
      result.invariants_ok = false;
    }
  }
  for (int p = 2; p <= guard && result.invariants_ok; ++p)
    for (int q = 1; q < p; ++q) {
      const double th = lag(p, q);
      if (!(th > 0.0 && th <= kPi / 4.0 + 1e-10)) {
        std::snprintf(witness, sizeof witness, "theta(%d,%d) outside (0, pi/4]", p, q);
        result.invariants_ok = false;
        break;
      }
    }
  for (int p = 1; p + 1 <= guard && result.invariants_ok; ++p)
    for (int q = 1; q <= p; ++q) {
      if (lag(p, q) > lag(p + 1, q) + 1e-10) {
        std::snprintf(witness, sizeof witness, "theta(%d,%d) > theta(%d,%d)", p, q, p + 1, q);
        result.invariants_ok = false;
        break;
      }
    }
  result.invariant_witness = witness;
  if (!result.invariants_ok)
    throw std::runtime_error("rotating-wave invariant violated: " + result.invariant_witness);
  return result;
}

double rotating_wave_lag_at(const RotatingWaveResult& wave, int i, int j) {
  const int R = wave.radius;
  const LatticeSpec& lat = wave.system.lattice();
  const int x = i + (R - 1), y = j + (R - 1);
  if (x < 0 || x >= lat.nx || y < 0 || y >= lat.ny)
    throw std::invalid_argument("cell outside the rotating-wave truncation");
  return wave.solution.lags[lat.index_of({x, y})];
}

std::string lag_field_csv(const PhaseSystem& sys, const PhaseLockedSolution& sol) {
  std::string out = "i,j,theta\n";
  char line[96];
  for (int v = 0; v < sys.size(); ++v) {
    const Coord c = sys.lattice().coord_of(v);
    std::snprintf(line, sizeof line, "%d,%d,%.17g\n", c.x, c.y, sol.lags[v]);
    out += line;
  }
  return out;
}

}  // namespace phasegraph
