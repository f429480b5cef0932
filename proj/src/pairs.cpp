#include "qdcav/pairs.hpp"

#include "qdcav/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>

#include <fmt/format.h>

namespace qdcav {

std::string to_string(CascadeBranch branch) {
  return branch == CascadeBranch::upper ? "upper" : "lower";
}

CascadeBranch parse_branch(const std::string& text) {
  if (text == "upper") return CascadeBranch::upper;
  if (text == "lower") return CascadeBranch::lower;
  throw ConfigError(fmt::format("branch must be 'upper' or 'lower', got '{}'", text));
}

DressedLabel intermediate_label(Polarization pol, CascadeBranch branch) {
  if (pol == Polarization::R) return branch == CascadeBranch::upper ? DressedLabel::Rm : DressedLabel::Rp;
  return branch == CascadeBranch::upper ? DressedLabel::Lm : DressedLabel::Lp;
}

Operator build_transition_operator(Polarization n, Polarization m, const TransitionTable& table,
                                   const DressedSpectrum& dressed, const ProductBasis& basis,
                                   CascadeBranch branch, std::optional<FrequencyFilter> filter) {
  const DressedLabel mid = intermediate_label(n, branch);
  const cplx to_ground = table(DressedLabel::G0, mid, n);
  const double mid_energy = dressed.at(mid).energy_shift;

  CVector bra = CVector::Zero(basis.dim());  // conjugate of the row <v|
  for (const DressedState& j : dressed.states()) {
    if (j.manifold != 2) continue;
    cplx amp = to_ground * table(mid, j.label, m);
    if (amp == cplx{}) continue;
    if (filter && filter->width > 0.0) {
      const double half = 0.5 * filter->width;
      const double detuning = j.energy_shift - mid_energy - filter->omega2;
      amp *= half * half / (detuning * detuning + half * half);
    }
    bra += std::conj(amp) * j.vector;
  }
  Operator T(basis);
  T.matrix().row(basis.index({QdLevel::G, 0, 0})) = bra.adjoint();
  return T;
}

std::array<Operator, 4> build_transition_operators(const TransitionTable& table,
                                                   const DressedSpectrum& dressed,
                                                   const ProductBasis& basis, CascadeBranch branch,
                                                   std::optional<FrequencyFilter> filter) {
  auto make = [&](std::size_t k) {
    return build_transition_operator(kPairOrder[k][0], kPairOrder[k][1], table, dressed, basis, branch,
                                     filter);
  };
  return {make(0), make(1), make(2), make(3)};
}

std::pair<double, double> pair_frequencies(const ModelParams& p, CascadeBranch branch) {
  const double w1 = branch == CascadeBranch::upper ? p.g : -p.g;
  return {w1, p.omega_R_det + p.omega_L_det - w1};
}

std::optional<PairDensityMatrix> pair_density_matrix(const CMatrix& rho, const std::array<Operator, 4>& T,
                                                     double omega1, double omega2) {
  // Tr[rho T_a^+ T_b] = Tr[(T_b rho) T_a^+]; form T_b rho once per b.
  std::array<CMatrix, 4> t_rho;
  for (std::size_t b = 0; b < 4; ++b) t_rho[b] = T[b].matrix() * rho;
  Eigen::Matrix4cd m;
  for (std::size_t a = 0; a < 4; ++a) {
    for (std::size_t b = 0; b < 4; ++b) {
      m(static_cast<int>(a), static_cast<int>(b)) =
          (t_rho[b].array() * T[a].matrix().conjugate().array()).sum();
    }
  }
  const double flux = m.diagonal().real().maxCoeff();
  if (!(flux > kMinPairFlux)) return std::nullopt;
  m = (0.5 * (m + m.adjoint())).eval();
  m /= m.trace().real();
  return PairDensityMatrix{m, omega1, omega2};
}

double concurrence(const Eigen::Matrix4cd& rho4) {
  // sigma_y (x) sigma_y in the |LR>, |RL>, |LL>, |RR> order (L = 0, R = 1).
  Eigen::Matrix4cd yy = Eigen::Matrix4cd::Zero();
  yy(0, 1) = yy(1, 0) = 1.0;
  yy(2, 3) = yy(3, 2) = -1.0;
  const Eigen::Matrix4cd flipped = yy * rho4.conjugate() * yy;
  const Eigen::Matrix4cd product = rho4 * flipped;
  Eigen::ComplexEigenSolver<Eigen::Matrix4cd> es(product, false);
  std::array<double, 4> lam{};
  for (int i = 0; i < 4; ++i) lam[static_cast<std::size_t>(i)] = std::sqrt(std::max(0.0, es.eigenvalues()(i).real()));
  std::sort(lam.begin(), lam.end(), std::greater<>());
  const double c = lam[0] - lam[1] - lam[2] - lam[3];
  if (c < kConcurrenceSnap) return 0.0;
  if (c > 1.0 - kConcurrenceSnap) return 1.0;
  return c;
}

double eof_from_concurrence(double c) {
  c = std::clamp(c, 0.0, 1.0);
  const double x = 0.5 * (1.0 + std::sqrt(1.0 - c * c));
  auto plogp = [](double v) { return v > 0.0 ? -v * std::log2(v) : 0.0; };
  return std::clamp(plogp(x) + plogp(1.0 - x), 0.0, 1.0);
}

void write_pair_csv(std::ostream& os, const PairDensityMatrix& p) {
  os << fmt::format("# basis=LR,RL,LL,RR omega1={:.17g} omega2={:.17g}\n", p.omega1, p.omega2);
  os << "i,j,re,im\n";
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      os << fmt::format("{},{},{:.17g},{:.17g}\n", i, j, p.rho4(i, j).real(), p.rho4(i, j).imag());
    }
  }
}

}  // namespace qdcav
