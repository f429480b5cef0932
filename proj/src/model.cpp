#include "qdcav/model.hpp"

#include "qdcav/error.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include <fmt/format.h>

namespace qdcav {

namespace {

void require_non_negative(double v, const char* name) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw ConfigError(fmt::format("{} must be finite and >= 0, got {}", name, v));
  }
}

// Coupling part of H0: exciton and cross-polarized biexciton terms plus h.c.
Operator coupling_terms(const ProductBasis& basis, const ModelParams& p) {
  const cplx ex = std::polar(p.g, p.exciton_phase);
  const cplx bx = std::polar(p.g_B, p.biexciton_phase);
  const Operator ar_dag = creation(basis, Polarization::R);
  const Operator al_dag = creation(basis, Polarization::L);

  Operator raising = ex * (qd_transition(basis, QdLevel::XR, QdLevel::G) * ar_dag +
                           qd_transition(basis, QdLevel::XL, QdLevel::G) * al_dag);
  raising += bx * (qd_transition(basis, QdLevel::B, QdLevel::XR) * al_dag +
                   qd_transition(basis, QdLevel::B, QdLevel::XL) * ar_dag);
  return raising + raising.adjoint();
}

// H0 measured from eps0 * (N_R + N_L).
Operator h0_shift(const ProductBasis& basis, const ModelParams& p) {
  Operator h = coupling_terms(basis, p);
  for (int i = 0; i < basis.dim(); ++i) {
    if (basis.state_at(i).qd == QdLevel::B) h.matrix()(i, i) -= p.delta_B;
  }
  return h;
}

}  // namespace

void ModelParams::validate() const {
  require_non_negative(g, "g");
  require_non_negative(g_B, "g_B");
  require_non_negative(delta_B, "delta_B");
  require_non_negative(gamma_X, "gamma_X");
  require_non_negative(gamma_B, "gamma_B");
  require_non_negative(E_R, "E_R");
  require_non_negative(E_L, "E_L");
  if (!(Gamma > 0.0) || !std::isfinite(Gamma)) {
    throw ConfigError(fmt::format("Gamma must be > 0, got {}", Gamma));
  }
  if (!std::isfinite(omega_R_det) || !std::isfinite(omega_L_det)) {
    throw ConfigError("drive detunings must be finite");
  }
  if (eps0) {
    if (!(*eps0 > 0.0)) throw ConfigError(fmt::format("eps0 must be > 0, got {}", *eps0));
    const double strongest = std::max(g, g_B);
    if (strongest > kWeakCouplingRatio * *eps0) {
      throw ConfigError(fmt::format(
          "weak-coupling guard: max(g, g_B) = {} exceeds {} * eps0 = {}", strongest,
          kWeakCouplingRatio, kWeakCouplingRatio * *eps0));
    }
  }
}

Operator build_h0(const ProductBasis& basis, const ModelParams& p) {
  Operator h = h0_shift(basis, p);
  const double eps0 = p.eps0.value_or(0.0);
  if (eps0 != 0.0) {
    for (int i = 0; i < basis.dim(); ++i) {
      h.matrix()(i, i) += eps0 * basis.total_excitations(i);
    }
  }
  return h;
}

Operator build_drive(const ProductBasis& basis, const ModelParams& p) {
  const double s = std::sqrt(p.Gamma);
  const cplx i{0.0, 1.0};
  Operator raising = (i * s * p.E_R) * creation(basis, Polarization::R) +
                     (i * s * p.E_L) * creation(basis, Polarization::L);
  return raising + raising.adjoint();
}

Operator rotating_frame_hamiltonian(const ProductBasis& basis, const ModelParams& p) {
  Operator h = h0_shift(basis, p);
  const Operator n_r = excitation_number(basis, Polarization::R);
  const Operator n_l = excitation_number(basis, Polarization::L);
  const double drift = std::max(commutator(h, n_r).matrix().cwiseAbs().maxCoeff(),
                                commutator(h, n_l).matrix().cwiseAbs().maxCoeff());
  if (drift > kConservationTolerance) {
    throw NumericalError(fmt::format(
        "H0 does not conserve N_R, N_L (commutator {:.3e}); no time-independent frame exists",
        drift));
  }
  for (int i = 0; i < basis.dim(); ++i) {
    h.matrix()(i, i) -= p.omega_R_det * basis.excitations(i, Polarization::R) +
                        p.omega_L_det * basis.excitations(i, Polarization::L);
  }
  return h + build_drive(basis, p);
}

ModelParams mirrored(const ModelParams& p) {
  ModelParams m = p;
  std::swap(m.E_R, m.E_L);
  std::swap(m.omega_R_det, m.omega_L_det);
  return m;
}

}  // namespace qdcav
