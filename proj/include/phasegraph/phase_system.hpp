#ifndef PHASEGRAPH_PHASE_SYSTEM_HPP
#define PHASEGRAPH_PHASE_SYSTEM_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "phasegraph/graph.hpp"

namespace phasegraph {

/// Wraps an angle to the principal value in (-pi, pi].
double wrap_angle(double x);
/// Wraps an angle to [0, 2*pi).
double wrap_positive(double x);

/// 2*pi-periodic coupling function supplied together with its first two
/// derivatives. `odd` marks H(-x) = -H(x), which the solvers exploit.
class Coupling {
 public:
  Coupling(std::function<double(double)> h, std::function<double(double)> dh,
           std::function<double(double)> ddh, std::string name, bool odd);

  static Coupling sine();
  /// Trigonometric interpolant through uniform samples of H over [0, 2*pi).
  /// The interpolant is smooth and exactly periodic; derivatives are the
  /// interpolant's own.
  static Coupling from_table(const std::vector<double>& samples);

  double h(double x) const { return h_(x); }
  double dh(double x) const { return dh_(x); }
  double ddh(double x) const { return ddh_(x); }
  const std::string& name() const { return name_; }
  bool odd() const { return odd_; }
  /// sup |H''| over a period (sampled; exact 1 for sine).
  double sup_ddh() const { return sup_ddh_; }
  /// samples behind a "table" coupling; empty otherwise
  const std::vector<double>& table() const { return table_; }

 private:
  std::function<double(double)> h_, dh_, ddh_;
  std::string name_;
  bool odd_ = false;
  double sup_ddh_ = 0.0;
  std::vector<double> table_;

  void verify_periodicity() const;
};

/// The coupled phase model: lattice-indexed oscillators, symmetric influence
/// topology, coupling H, intrinsic frequencies omega_v.
class PhaseSystem {
 public:
  PhaseSystem(LatticeSpec lattice, Coupling coupling, double omega);
  PhaseSystem(LatticeSpec lattice, Coupling coupling, Vector omega);

  int size() const { return lattice_.size(); }
  const LatticeSpec& lattice() const { return lattice_; }
  const Neighborhoods& neighborhoods() const { return nbhd_; }
  const Coupling& coupling() const { return coupling_; }
  const Vector& omega() const { return omega_; }
  bool uniform_omega() const { return uniform_omega_; }

  nlohmann::json to_json() const;

 private:
  LatticeSpec lattice_;
  Neighborhoods nbhd_;
  Coupling coupling_;
  Vector omega_;
  bool uniform_omega_ = false;
};

struct PhaseLockedSolution {
  Vector lags;              // stored in [0, 2*pi)
  double Omega = 0.0;
  double residual_inf = 0.0;
  int newton_iterations = 0;

  nlohmann::json to_json(const PhaseSystem& sys) const;
};

/// residual_v = (omega_v - Omega) + sum_{v' in N(v)} H(lag_{v'} - lag_v)
Vector phase_lag_residual(const PhaseSystem& sys, const Vector& lags, double Omega);

struct SolveOptions {
  double tol = 1e-12;       // Newton stops below this residual sup norm
  int max_iterations = 60;
  int pin_vertex = 0;       // removes the uniform-shift kernel direction
  double pin_value = 0.0;
  /// When set, Omega is held fixed; otherwise Omega = omega for uniform
  /// omega and odd H, and is solved as an extra unknown when omega varies.
  std::optional<double> Omega;
};

/// Damped Newton iteration for the phase-lag equation. The Jacobian is the
/// (unnormalized) linearization; one lag is pinned because the equation is
/// invariant under uniform shifts.
PhaseLockedSolution solve_phase_locked(const PhaseSystem& sys, const Vector& initial_lags,
                                       const SolveOptions& opts = {});

/// Right-hand side of the perturbation system,
/// rhs_v = (omega_v - Omega) + sum H(lag_{v'} + psi_{v'} - lag_v - psi_v).
Vector perturbation_rhs(const PhaseSystem& sys, const PhaseLockedSolution& sol,
                        const Vector& psi);

struct IntegrationControls {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  std::vector<double> output_times;       // strictly increasing, first >= 0
  double boundary_mass_warn_fraction = 0.01;
};

struct PerturbationTrajectory {
  std::vector<double> times;
  std::vector<double> l1, l2, linf;
  std::vector<double> qform;             // Q over the influence topology
  std::vector<double> boundary_mass;     // l1 mass on the outermost ring (free mode)
  bool boundary_flagged = false;
  std::vector<Vector> snapshots;         // states at snapshot_times, if requested
  std::vector<double> snapshot_times;
};

/// Integrates the perturbation system with an adaptive embedded Runge-Kutta
/// pair (Dormand-Prince 5(4)), recording norms and the boundary-mass
/// diagnostic at each output time.
PerturbationTrajectory integrate_perturbation(const PhaseSystem& sys,
                                              const PhaseLockedSolution& sol,
                                              const Vector& psi0,
                                              const IntegrationControls& controls,
                                              const std::vector<double>& snapshot_times = {});

/// Indices of the outermost lattice ring (free mode); empty on a torus.
std::vector<int> boundary_ring(const LatticeSpec& spec);

}  // namespace phasegraph

#endif
