#pragma once

// Cascade photon pairs: transition operators T(nm), the two-photon
// polarization density matrix, concurrence and entanglement of formation.
//
// A pair |n(w1) m(w2)> is made by a two-excitation dressed state emitting an
// m-polarized photon (w2) into the one-excitation intermediate state of
// polarization n, which then emits the n-polarized photon (w1):
//   T(nm) = gamma^(n)_{G0; n_b} sum_j gamma^(m)_{n_b; j} |G,0,0><j|
// with n_b the selected branch of the n doublet and j over all eight
// two-excitation dressed states.
//
// Pair basis order: |LR>, |RL>, |LL>, |RR>.

#include "qdcav/dressed.hpp"
#include "qdcav/fock_basis.hpp"
#include "qdcav/lindblad.hpp"

#include <array>
#include <optional>
#include <string>

namespace qdcav {

// Energy branch of the intermediate one-excitation state: upper = eps0 + g
// (the k- states), lower = eps0 - g (the k+ states).
enum class CascadeBranch { upper, lower };

std::string to_string(CascadeBranch branch);
// Accepts "upper" / "lower"; throws ConfigError otherwise.
CascadeBranch parse_branch(const std::string& text);

DressedLabel intermediate_label(Polarization pol, CascadeBranch branch);

enum PairIndex : int { kLR = 0, kRL = 1, kLL = 2, kRR = 3 };
inline constexpr std::array<std::array<Polarization, 2>, 4> kPairOrder = {{
    {Polarization::L, Polarization::R},
    {Polarization::R, Polarization::L},
    {Polarization::L, Polarization::L},
    {Polarization::R, Polarization::R},
}};

// Optional Lorentzian weight on the first emitted photon: each term j is
// multiplied by (w/2)^2 / ((E_j - E_nb - w2)^2 + (w/2)^2). Off unless a
// positive width is given.
struct FrequencyFilter {
  double width = 0.0;
  double omega2 = 0.0;
};

Operator build_transition_operator(Polarization n, Polarization m, const TransitionTable& table,
                                   const DressedSpectrum& dressed, const ProductBasis& basis,
                                   CascadeBranch branch, std::optional<FrequencyFilter> filter = {});

// T(LR), T(RL), T(LL), T(RR).
std::array<Operator, 4> build_transition_operators(const TransitionTable& table,
                                                   const DressedSpectrum& dressed,
                                                   const ProductBasis& basis, CascadeBranch branch,
                                                   std::optional<FrequencyFilter> filter = {});

struct PairDensityMatrix {
  Eigen::Matrix4cd rho4;
  double omega1 = 0.0;  // photon from the intermediate state, detuning from eps0
  double omega2 = 0.0;  // photon from the two-excitation state
};

// Photon detunings (w1, w2): w1 = +g on the upper branch, -g on the lower,
// w2 = W_R' + W_L' - w1.
std::pair<double, double> pair_frequencies(const ModelParams& p, CascadeBranch branch);

// rho4(a, b) proportional to Tr[rho T^+(a) T(b)], normalized to unit trace and
// Hermitized. Returns nullopt when no diagonal element exceeds kMinPairFlux.
std::optional<PairDensityMatrix> pair_density_matrix(const CMatrix& rho, const std::array<Operator, 4>& T,
                                                     double omega1 = 0.0, double omega2 = 0.0);

inline constexpr double kMinPairFlux = 1e-300;

// Wootters concurrence of a two-qubit state in the pair basis order. Values
// within kConcurrenceSnap of 0 or 1 are returned as exactly 0 or 1.
inline constexpr double kConcurrenceSnap = 1e-12;
double concurrence(const Eigen::Matrix4cd& rho4);
inline double concurrence(const PairDensityMatrix& p) { return concurrence(p.rho4); }

double eof_from_concurrence(double c);
inline double eof(const Eigen::Matrix4cd& rho4) { return eof_from_concurrence(concurrence(rho4)); }
inline double eof(const PairDensityMatrix& p) { return eof(p.rho4); }

// Writes "i,j,re,im" rows in the pair basis order.
void write_pair_csv(std::ostream& os, const PairDensityMatrix& p);

}  // namespace qdcav
