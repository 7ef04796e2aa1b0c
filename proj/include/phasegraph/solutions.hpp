#ifndef PHASEGRAPH_SOLUTIONS_HPP
#define PHASEGRAPH_SOLUTIONS_HPP

#include "phasegraph/phase_system.hpp"

namespace phasegraph {

/// Phase-locked families of the sine-coupled nearest-neighbor lattice.

/// Trivial family: all lags zero. Requires H(0) = 0.
PhaseLockedSolution trivial_lags(const PhaseSystem& sys);

/// Doubly periodic lags 2*pi*[i]_{N1}/N1 + 2*pi*[j]_{N2}/N2 on a torus whose
/// extents N1 and N2 divide. N1, N2 >= 5 keeps the induced weights positive.
PhaseLockedSolution doubly_periodic_lags(const PhaseSystem& sys, int n1, int n2);

/// Rotating-wave construction on an even free lattice of extent 2R centred
/// between the four core cells. The Newton solve runs on the fundamental
/// sector {1 <= j < i <= R} with the dihedral symmetry baked in: quarter
/// turns advance lags by pi/2, the sector diagonal is held at zero, and the
/// core ring carries {0, pi/2, pi, 3*pi/2}.
struct RotatingWaveSpec {
  int extent = 40;          // lattice is extent x extent, extent = 2R, >= 8
  double newton_tol = 1e-12;
  int max_iterations = 60;
};

struct RotatingWaveResult {
  PhaseSystem system;
  PhaseLockedSolution solution;
  int radius = 0;           // R: sector rows 1..R
  /// sector invariants checked post-hoc (outermost rings excluded)
  bool invariants_ok = false;
  std::string invariant_witness;  // empty when invariants_ok
};

RotatingWaveResult rotating_wave_lags(const RotatingWaveSpec& spec);

/// Maps lattice coordinates (i, j) of the rotating-wave lattice, centred so
/// the core cells are (0,0), (0,1), (1,0), (1,1), to their lag.
double rotating_wave_lag_at(const RotatingWaveResult& wave, int i, int j);

/// Trivial lags on a 1D range-n chain (the negative example family).
PhaseLockedSolution chain_lags(const PhaseSystem& sys);

/// Lag field CSV (columns i, j, theta) for external visualization.
std::string lag_field_csv(const PhaseSystem& sys, const PhaseLockedSolution& sol);

}  // namespace phasegraph

#endif
