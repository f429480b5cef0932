#pragma once

// Quantum-dot / microcavity Hamiltonians.
//
// All energies are in units of the cavity leak rate Gamma and measured from
// the exciton energy eps0: only detunings enter the rotating-frame numerics.
//
// The biexciton couples cross-polarized: g_B (|X_R><B| a_L^+ + |X_L><B| a_R^+)
// + h.c. This is the choice under which the singlet
// (|X_R,0,1> - |X_L,1,0>)/sqrt(2) is an exact dressed state and under which
// N_R and N_L are separately conserved, so a two-color CW drive can be moved
// into a single time-independent rotating frame.

#include "qdcav/fock_basis.hpp"

#include <numbers>
#include <optional>

namespace qdcav {

struct ModelParams {
  // Exciton energy. Optional: only used for the absolute-energy form of H0
  // and for the weak-coupling guard.
  std::optional<double> eps0;
  double g = 0.0;        // exciton-cavity coupling
  double g_B = 0.0;      // biexciton-cavity coupling
  double delta_B = 0.0;  // biexciton binding energy
  double gamma_X = 0.0;  // exciton damping
  double gamma_B = 0.0;  // biexciton damping
  double Gamma = 1.0;    // cavity leak rate (the unit)
  double E_R = 0.0;      // drive amplitudes, units sqrt(Gamma)
  double E_L = 0.0;
  double omega_R_det = 0.0;  // drive detunings Omega_k - eps0
  double omega_L_det = 0.0;

  // Phase of the coupling terms, e^{i phase} g |G><X_k| a_k^+ + h.c. The
  // default pi/2 is the factor i of the reference Hamiltonian; other values are
  // gauge-equivalent and only used to check that observables do not depend on it.
  double exciton_phase = std::numbers::pi / 2;
  double biexciton_phase = std::numbers::pi / 2;

  // Throws ConfigError on negative rates/couplings, Gamma <= 0, or a violated
  // weak-coupling guard when eps0 is set.
  void validate() const;
};

// Ratio above which max(g, g_B) / eps0 is rejected when eps0 is given.
inline constexpr double kWeakCouplingRatio = 0.1;

// Commutator norm above which the rotating frame is declared inconsistent.
inline constexpr double kConservationTolerance = 1e-10;

// Undriven Hamiltonian H0 with absolute energies (eps0 defaults to 0).
Operator build_h0(const ProductBasis& basis, const ModelParams& p);

// Time-stripped drive sqrt(Gamma) sum_k E_k (i a_k^+ - i a_k).
Operator build_drive(const ProductBasis& basis, const ModelParams& p);

// H0 - Omega_R N_R - Omega_L N_L + H_drive, assembled directly from detunings
// so eps0 cancels exactly. Throws NumericalError if H0 fails to commute with
// N_R or N_L.
Operator rotating_frame_hamiltonian(const ProductBasis& basis, const ModelParams& p);

// The R<->L mirrored parameter set: drives and detunings swapped.
ModelParams mirrored(const ModelParams& p);

}  // namespace qdcav
