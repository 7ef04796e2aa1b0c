#include "phasegraph/phase_system.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <boost/numeric/odeint.hpp>

namespace phasegraph {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

double wrap_angle(double x) {
  const double r = std::remainder(x, kTwoPi);  // (-pi, pi], up to the -pi tie
  return r <= -std::numbers::pi ? r + kTwoPi : r;
}

double wrap_positive(double x) {
  double r = std::fmod(x, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  return r;
}

Coupling::Coupling(std::function<double(double)> h, std::function<double(double)> dh,
                   std::function<double(double)> ddh, std::string name, bool odd)
    : h_(std::move(h)), dh_(std::move(dh)), ddh_(std::move(ddh)),
      name_(std::move(name)), odd_(odd) {
  verify_periodicity();
  double sup = 0.0;
  for (int k = 0; k < 720; ++k) sup = std::max(sup, std::abs(ddh_(kTwoPi * k / 720.0)));
  sup_ddh_ = sup;
}

void Coupling::verify_periodicity() const {
  for (int k = 0; k < 17; ++k) {
    const double x = -7.0 + 14.0 * k / 16.0;
    if (std::abs(h_(x + kTwoPi) - h_(x)) > 1e-12)
      throw std::invalid_argument("coupling function is not 2*pi-periodic");
  }
}

Coupling Coupling::sine() {
  return Coupling([](double x) { return std::sin(x); },
                  [](double x) { return std::cos(x); },
                  [](double x) { return -std::sin(x); }, "sin", true);
}

Coupling Coupling::from_table(const std::vector<double>& samples) {
  const int n = static_cast<int>(samples.size());
  if (n < 4) throw std::invalid_argument("coupling table needs at least 4 samples");
  // real trigonometric interpolant through samples at x_j = 2*pi*j/n
  const int kmax = (n - 1) / 2;
  std::vector<double> a(kmax + 1, 0.0), b(kmax + 1, 0.0);
  for (int k = 0; k <= kmax; ++k) {
    for (int j = 0; j < n; ++j) {
      const double phase = kTwoPi * k * j / n;
      a[k] += samples[j] * std::cos(phase);
      b[k] += samples[j] * std::sin(phase);
    }
    a[k] *= 2.0 / n;
    b[k] *= 2.0 / n;
  }
  double nyquist = 0.0;
  const bool even = (n % 2 == 0);
  if (even) {
    for (int j = 0; j < n; ++j) nyquist += samples[j] * ((j % 2 == 0) ? 1.0 : -1.0);
    nyquist /= n;
  }
  const int half = n / 2;
  auto eval = [a, b, nyquist, even, half, kmax](double x, int deriv) {
    double acc = deriv == 0 ? a[0] / 2.0 : 0.0;
    for (int k = 1; k <= kmax; ++k) {
      const double kk = k;
      switch (deriv) {
        case 0: acc += a[k] * std::cos(kk * x) + b[k] * std::sin(kk * x); break;
        case 1: acc += kk * (-a[k] * std::sin(kk * x) + b[k] * std::cos(kk * x)); break;
        default: acc += kk * kk * (-a[k] * std::cos(kk * x) - b[k] * std::sin(kk * x)); break;
      }
    }
    if (even) {
      const double kk = half;
      switch (deriv) {
        case 0: acc += nyquist * std::cos(kk * x); break;
        case 1: acc += -nyquist * kk * std::sin(kk * x); break;
        default: acc += -nyquist * kk * kk * std::cos(kk * x); break;
      }
    }
    return acc;
  };
  bool odd = true;
  for (int j = 0; j < n && odd; ++j)
    odd = std::abs(samples[j] + samples[(n - j) % n]) <= 1e-12;
  Coupling coupling([eval](double x) { return eval(x, 0); },
                    [eval](double x) { return eval(x, 1); },
                    [eval](double x) { return eval(x, 2); }, "table", odd);
  coupling.table_ = samples;
  return coupling;
}

PhaseSystem::PhaseSystem(LatticeSpec lattice, Coupling coupling, double omega)
    : PhaseSystem(lattice, std::move(coupling), Vector::Constant(lattice.size(), omega)) {}

PhaseSystem::PhaseSystem(LatticeSpec lattice, Coupling coupling, Vector omega)
    : lattice_(lattice), nbhd_(lattice_neighborhoods(lattice)),
      coupling_(std::move(coupling)), omega_(std::move(omega)) {
  if (omega_.size() != lattice_.size())
    throw std::invalid_argument("omega length must match lattice size");
  uniform_omega_ = (omega_.maxCoeff() - omega_.minCoeff()) == 0.0;
}

nlohmann::json PhaseSystem::to_json() const {
  nlohmann::json j;
  if (uniform_omega_)
    j["omega"] = omega_[0];
  else
    j["omega"] = std::vector<double>(omega_.begin(), omega_.end());
  j["H"] = coupling_.name();
  if (!coupling_.table().empty()) j["H_table"] = coupling_.table();
  j["lattice"] = {{"nx", lattice_.nx}, {"ny", lattice_.ny}, {"range", lattice_.range},
                  {"boundary", to_string(lattice_.boundary)}};
  return j;
}

nlohmann::json PhaseLockedSolution::to_json(const PhaseSystem& sys) const {
  nlohmann::json j = sys.to_json();
  j["lags"] = std::vector<double>(lags.begin(), lags.end());
  j["Omega"] = Omega;
  j["residual"] = residual_inf;
  return j;
}

Vector phase_lag_residual(const PhaseSystem& sys, const Vector& lags, double Omega) {
  if (lags.size() != sys.size()) throw std::invalid_argument("lag vector length mismatch");
  const auto& H = sys.coupling();
  Vector res(sys.size());
#pragma omp parallel for schedule(static)
  for (int v = 0; v < sys.size(); ++v) {
    double acc = sys.omega()[v] - Omega;
    for (int u : sys.neighborhoods().of(v)) acc += H.h(wrap_angle(lags[u] - lags[v]));
    res[v] = acc;
  }
  return res;
}

namespace {

// Assembles the Jacobian of the phase-lag map restricted per the pinning
// layout and runs damped Newton. Column layout: free lags in vertex order,
// then Omega when it is an unknown.
PhaseLockedSolution newton_solve(const PhaseSystem& sys, Vector lags, double Omega,
                                 bool solve_omega, const SolveOptions& opts) {
  const int n = sys.size();
  const int pin = opts.pin_vertex;
  if (pin < 0 || pin >= n) throw std::invalid_argument("pin vertex out of range");
  lags[pin] = opts.pin_value;

  // free-lag column indices
  std::vector<int> col(n, -1);
  {
    int c = 0;
    for (int v = 0; v < n; ++v)
      if (v != pin || solve_omega) col[v] = c++;
  }
  const int n_lag_cols = solve_omega ? n : n - 1;
  const int dim = solve_omega ? n + 1 : n - 1;

  const auto& H = sys.coupling();

  auto assemble_residual = [&](const Vector& th, double Om) {
    Vector full = phase_lag_residual(sys, th, Om);
    Vector F(dim);
    int r = 0;
    for (int v = 0; v < n; ++v) {
      if (!solve_omega && v == pin) continue;
      F[r++] = full[v];
    }
    if (solve_omega) F[r] = th.sum() - opts.pin_value;  // sum pinning
    return F;
  };

  Vector F = assemble_residual(lags, Omega);
  double fnorm = norm_linf(F);
  int iter = 0;
  for (; iter < opts.max_iterations && fnorm > opts.tol; ++iter) {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(n) * 6);
    int r = 0;
    for (int v = 0; v < n; ++v) {
      if (!solve_omega && v == pin) continue;
      double diag = 0.0;
      for (int u : sys.neighborhoods().of(v)) {
        const double hp = H.dh(wrap_angle(lags[u] - lags[v]));
        diag -= hp;
        if (col[u] >= 0) trip.emplace_back(r, col[u], hp);
      }
      if (col[v] >= 0) trip.emplace_back(r, col[v], diag);
      if (solve_omega) trip.emplace_back(r, n_lag_cols, -1.0);
      ++r;
    }
    if (solve_omega)
      for (int v = 0; v < n; ++v) trip.emplace_back(r, col[v], 1.0);

    Eigen::SparseMatrix<double> J(dim, dim);
    J.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(J);
    if (lu.info() != Eigen::Success)
      throw std::runtime_error(
          "phase-lag Jacobian is singular; consider pinning additional lags");
    Vector step = lu.solve(-F);

    // backtracking on the residual sup norm
    double lambda = 1.0;
    Vector new_lags = lags;
    double new_Omega = Omega;
    double new_fnorm = fnorm;
    Vector new_F = F;
    bool accepted = false;
    for (int bt = 0; bt < 14; ++bt, lambda *= 0.5) {
      Vector cand = lags;
      double cand_Omega = Omega;
      for (int v = 0; v < n; ++v)
        if (col[v] >= 0) cand[v] += lambda * step[col[v]];
      if (solve_omega) cand_Omega += lambda * step[n_lag_cols];
      Vector cand_F = assemble_residual(cand, cand_Omega);
      const double cand_norm = norm_linf(cand_F);
      if (cand_norm < (1.0 - 0.25 * lambda) * fnorm || cand_norm <= opts.tol) {
        new_lags = std::move(cand);
        new_Omega = cand_Omega;
        new_F = std::move(cand_F);
        new_fnorm = cand_norm;
        accepted = true;
        break;
      }
    }
    if (!accepted)
      throw std::runtime_error("Newton line search stalled at residual " +
                               std::to_string(fnorm));
    lags = std::move(new_lags);
    Omega = new_Omega;
    F = std::move(new_F);
    fnorm = new_fnorm;
  }
  if (fnorm > opts.tol)
    throw std::runtime_error("Newton did not converge; final residual " +
                             std::to_string(fnorm));

  for (int v = 0; v < n; ++v) lags[v] = wrap_positive(lags[v]);
  PhaseLockedSolution sol;
  sol.lags = std::move(lags);
  sol.Omega = Omega;
  sol.residual_inf = norm_linf(phase_lag_residual(sys, sol.lags, Omega));
  sol.newton_iterations = iter;
  return sol;
}

}  // namespace

PhaseLockedSolution solve_phase_locked(const PhaseSystem& sys, const Vector& initial_lags,
                                       const SolveOptions& opts) {
  if (initial_lags.size() != sys.size())
    throw std::invalid_argument("initial lag vector length mismatch");
  if (opts.Omega) return newton_solve(sys, initial_lags, *opts.Omega, false, opts);
  if (sys.uniform_omega() && sys.coupling().odd())
    return newton_solve(sys, initial_lags, sys.omega()[0], false, opts);
  return newton_solve(sys, initial_lags, sys.omega().mean(), true, opts);
}

Vector perturbation_rhs(const PhaseSystem& sys, const PhaseLockedSolution& sol,
                        const Vector& psi) {
  if (psi.size() != sys.size()) throw std::invalid_argument("psi length mismatch");
  const auto& H = sys.coupling();
  const Vector& th = sol.lags;
  Vector out(sys.size());
#pragma omp parallel for schedule(static)
  for (int v = 0; v < sys.size(); ++v) {
    double acc = sys.omega()[v] - sol.Omega;
    for (int u : sys.neighborhoods().of(v))
      acc += H.h(wrap_angle(th[u] - th[v]) + (psi[u] - psi[v]));
    out[v] = acc;
  }
  return out;
}

std::vector<int> boundary_ring(const LatticeSpec& spec) {
  std::vector<int> ring;
  if (spec.boundary == Boundary::torus) return ring;
  for (int v = 0; v < spec.size(); ++v) {
    const Coord c = spec.coord_of(v);
    const bool edge_x = c.x == 0 || c.x == spec.nx - 1;
    const bool edge_y = !spec.is_1d() && (c.y == 0 || c.y == spec.ny - 1);
    if (edge_x || edge_y) ring.push_back(v);
  }
  return ring;
}

PerturbationTrajectory integrate_perturbation(const PhaseSystem& sys,
                                              const PhaseLockedSolution& sol,
                                              const Vector& psi0,
                                              const IntegrationControls& controls,
                                              const std::vector<double>& snapshot_times) {
  namespace ode = boost::numeric::odeint;
  if (psi0.size() != sys.size()) throw std::invalid_argument("psi0 length mismatch");
  if (!psi0.allFinite()) throw std::invalid_argument("psi0 must be finite");
  const auto& times = controls.output_times;
  if (times.size() < 2) throw std::invalid_argument("need at least two output times");
  for (std::size_t i = 0; i + 1 < times.size(); ++i)
    if (!(times[i] < times[i + 1]))
      throw std::invalid_argument("output times must be strictly increasing");
  if (times.front() < 0.0) throw std::invalid_argument("output times must be >= 0");

  using State = std::vector<double>;
  State state(psi0.begin(), psi0.end());

  auto system = [&](const State& x, State& dxdt, double) {
    Eigen::Map<const Vector> xv(x.data(), static_cast<Eigen::Index>(x.size()));
    Vector r = perturbation_rhs(sys, sol, xv);
    dxdt.assign(r.begin(), r.end());
  };

  const auto ring = boundary_ring(sys.lattice());
  const double psi0_l1 = std::max(norm_l1(psi0), 1e-300);
  double ring_mass0 = 0.0;
  for (int v : ring) ring_mass0 += std::abs(psi0[v]);

  PerturbationTrajectory traj;
  auto observer = [&](const State& x, double t) {
    Eigen::Map<const Vector> xv(x.data(), static_cast<Eigen::Index>(x.size()));
    traj.times.push_back(t);
    traj.l1.push_back(norm_l1(xv));
    traj.l2.push_back(norm_l2(xv));
    traj.linf.push_back(norm_linf(xv));
    traj.qform.push_back(q_form(sys.neighborhoods(), xv));
    double bmass = 0.0;
    for (int v : ring) bmass += std::abs(xv[v]);
    traj.boundary_mass.push_back(bmass);
    // flag growth over the initial ring mass: mean-removed initializers carry
    // a uniform background that is not leakage
    if (bmass - ring_mass0 > controls.boundary_mass_warn_fraction * psi0_l1)
      traj.boundary_flagged = true;
    for (double ts : snapshot_times)
      if (std::abs(ts - t) <= 1e-12 * std::max(1.0, std::abs(ts))) {
        traj.snapshots.emplace_back(xv);
        traj.snapshot_times.push_back(t);
      }
  };

  auto stepper = ode::make_controlled(controls.abs_tol, controls.rel_tol,
                                      ode::runge_kutta_dopri5<State>());
  try {
    ode::integrate_times(stepper, system, state, times.begin(), times.end(),
                         std::min(0.05, (times.back() - times.front()) / 100.0), observer);
  } catch (const std::overflow_error&) {
    throw std::runtime_error("integrator step size underflow");
  }
  return traj;
}

}  // namespace phasegraph
