#pragma once

// Dressed states of H0 in the zero-, one- and two-excitation manifolds and the
// photon transition amplitudes between them.
//
// Labels. Within each polarized doublet the "+" member is the lower-energy
// state: with the i-coupling phase of H0,
//   |k+> = (|G,1_k> + i|X_k,0>)/sqrt(2)   at eps0 - g,
//   |k-> = (|G,1_k> - i|X_k,0>)/sqrt(2)   at eps0 + g,
// and likewise |RR+> sits at 2 eps0 - sqrt(2) g. With this reading
// gamma_{L+;T1} vanishes at g = g_minus(delta_B, g_B).
//
// The cross-polarized block holds the singlet |S> (shift exactly 0) and three
// triplets T1, T2, T3 at 2 eps0 - a_j with a_1 < a_2 < a_3.

#include "qdcav/fock_basis.hpp"

#include <array>
#include <span>
#include <string>
#include <vector>

namespace qdcav {

enum class DressedLabel : std::uint8_t {
  G0 = 0,
  Rp, Rm, Lp, Lm,
  RRp, RRm, LLp, LLm,
  S, T1, T2, T3,
};

inline constexpr int kDressedCount = 13;

std::string to_string(DressedLabel label);
int manifold_of(DressedLabel label);
// R<->L image: R+ <-> L+, RR- <-> LL-, S -> S (up to sign), T_j -> T_j.
DressedLabel mirror(DressedLabel label);

struct DressedState {
  int manifold = 0;
  double energy_shift = 0.0;  // eigenvalue - manifold * eps0
  CVector vector;             // ProductBasis order
  DressedLabel label = DressedLabel::G0;
};

// Eigenpairs of H0 indexed by DressedLabel.
class DressedSpectrum {
 public:
  DressedSpectrum(std::vector<DressedState> states, bool degenerate_cross_block);

  const DressedState& at(DressedLabel label) const {
    return states_[static_cast<std::size_t>(label)];
  }
  std::span<const DressedState> states() const { return states_; }
  // Two cross-polarized eigenvalues coincided within kDegeneracyTolerance; the
  // S/T assignment then used the deterministic fallback ordering.
  bool degenerate_cross_block() const { return degenerate_cross_block_; }

 private:
  std::vector<DressedState> states_;
  bool degenerate_cross_block_ = false;
};

inline constexpr double kDegeneracyTolerance = 1e-9;

// Diagonalizes h0 in each (N_R, N_L) sector of manifolds 0..2. h0 may carry
// absolute energies; eps0 is read back from <G,1,0|h0|G,1,0>. Throws
// NumericalError if h0 is not Hermitian or mixes sectors.
DressedSpectrum diagonalize_manifolds(const Operator& h0, const ProductBasis& basis);

// Roots a_1 < a_2 < a_3 of a^3 - dB a^2 - 2 (g^2 + g_B^2) a + 2 g^2 dB = 0, i.e.
// Delta_B times the real roots of x^3 - x^2 - (p+q) x + p with
// p = 2 (g/dB)^2, q = 2 (g_B/dB)^2. Throws ConfigError for delta_B <= 0.
std::array<double, 3> cubic_shifts(double g, double g_B, double delta_B);

// Exciton coupling at which gamma_{L+;T1} vanishes:
// (sqrt(dB^2 + 16 g_B^2) - dB) / 4.
double g_minus(double delta_B, double g_B);

// gamma(n, m, pol) = <n| a_pol |m> for n one manifold below m; zero otherwise.
class TransitionTable {
 public:
  TransitionTable(const DressedSpectrum& dressed, const ProductBasis& basis);

  cplx operator()(DressedLabel lower, DressedLabel upper, Polarization pol) const {
    return gamma_[static_cast<std::size_t>(pol)](static_cast<int>(lower), static_cast<int>(upper));
  }
  const CMatrix& matrix(Polarization pol) const { return gamma_[static_cast<std::size_t>(pol)]; }

 private:
  std::array<CMatrix, 2> gamma_;
};

TransitionTable transition_table(const DressedSpectrum& dressed, const ProductBasis& basis);

}  // namespace qdcav
