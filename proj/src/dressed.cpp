#include "qdcav/dressed.hpp"

#include "qdcav/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <utility>

#include <fmt/format.h>

namespace qdcav {

std::string to_string(DressedLabel label) {
  static constexpr std::array<const char*, kDressedCount> names = {
      "G0", "R+", "R-", "L+", "L-", "RR+", "RR-", "LL+", "LL-", "S", "T1", "T2", "T3"};
  return names[static_cast<std::size_t>(label)];
}

int manifold_of(DressedLabel label) {
  const int i = static_cast<int>(label);
  if (i == 0) return 0;
  return i <= 4 ? 1 : 2;
}

DressedLabel mirror(DressedLabel label) {
  switch (label) {
    case DressedLabel::Rp: return DressedLabel::Lp;
    case DressedLabel::Rm: return DressedLabel::Lm;
    case DressedLabel::Lp: return DressedLabel::Rp;
    case DressedLabel::Lm: return DressedLabel::Rm;
    case DressedLabel::RRp: return DressedLabel::LLp;
    case DressedLabel::RRm: return DressedLabel::LLm;
    case DressedLabel::LLp: return DressedLabel::RRp;
    case DressedLabel::LLm: return DressedLabel::RRm;
    default: return label;
  }
}

DressedSpectrum::DressedSpectrum(std::vector<DressedState> states, bool degenerate_cross_block)
    : states_(std::move(states)), degenerate_cross_block_(degenerate_cross_block) {
  if (states_.size() != static_cast<std::size_t>(kDressedCount)) {
    throw std::invalid_argument("dressed spectrum needs exactly 13 states");
  }
  for (std::size_t i = 0; i < states_.size(); ++i) {
    if (static_cast<std::size_t>(states_[i].label) != i) {
      throw std::invalid_argument("dressed states must be stored in label order");
    }
  }
}

namespace {

// Largest-magnitude component made real positive. Ties within 1e-9 go to the
// lowest index so equal-weight doublets get a reproducible phase.
void fix_phase(CVector& v) {
  const double top = v.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) >= top - 1e-9) {
      v *= std::conj(v(i)) / std::abs(v(i));
      v(i) = std::abs(v(i));
      return;
    }
  }
}

struct SectorEigen {
  Eigen::VectorXd values;  // ascending
  CMatrix vectors;         // sector-local columns
  bool degenerate = false;
};

// Replaces the eigenvectors of each cluster of (numerically) equal eigenvalues
// by the Gram-Schmidt orthonormalization of the references projected onto the
// cluster, so degenerate subspaces get a deterministic basis.
void canonicalize_clusters(SectorEigen& se, const std::vector<CVector>& refs) {
  const Eigen::Index n = se.values.size();
  Eigen::Index start = 0;
  while (start < n) {
    Eigen::Index stop = start + 1;
    while (stop < n && se.values(stop) - se.values(stop - 1) <= kDegeneracyTolerance) ++stop;
    const Eigen::Index size = stop - start;
    if (size > 1) {
      se.degenerate = true;
      const CMatrix cluster = se.vectors.middleCols(start, size);
      std::vector<CVector> picked;
      for (const CVector& ref : refs) {
        if (static_cast<Eigen::Index>(picked.size()) == size) break;
        CVector v = cluster * (cluster.adjoint() * ref);
        for (const CVector& q : picked) v -= q * q.dot(v);
        const double norm = v.norm();
        if (norm > 1e-6) picked.push_back(v / norm);
      }
      if (static_cast<Eigen::Index>(picked.size()) != size) {
        throw NumericalError("could not build a deterministic basis for a degenerate sector");
      }
      const double mean = se.values.segment(start, size).mean();
      for (Eigen::Index k = 0; k < size; ++k) {
        se.vectors.col(start + k) = picked[static_cast<std::size_t>(k)];
        se.values(start + k) = mean;
      }
    }
    start = stop;
  }
}

}  // namespace

DressedSpectrum diagonalize_manifolds(const Operator& h0, const ProductBasis& basis) {
  if (!(h0.basis() == basis)) throw std::invalid_argument("h0 is defined on a different basis");
  if (basis.n_max() < 2) {
    throw ConfigError("dressed-state analysis needs n_max >= 2 (co-polarized two-photon states)");
  }
  const CMatrix& h = h0.matrix();
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  if (h0.hermiticity_residual() > 1e-12 * scale) {
    throw NumericalError("h0 is not Hermitian");
  }
  const double eps0 = h(basis.index({QdLevel::G, 1, 0}), basis.index({QdLevel::G, 1, 0})).real();

  std::vector<DressedState> out(kDressedCount);
  bool cross_degenerate = false;

  auto sector_indices = [&](int nr, int nl) {
    std::vector<int> idx;
    for (int i = 0; i < basis.dim(); ++i) {
      if (basis.excitations(i, Polarization::R) == nr && basis.excitations(i, Polarization::L) == nl) {
        idx.push_back(i);
      }
    }
    return idx;
  };

  auto solve_sector = [&](const std::vector<int>& idx, const std::vector<CVector>& refs_full) {
    const auto k = static_cast<Eigen::Index>(idx.size());
    CMatrix block(k, k);
    for (Eigen::Index r = 0; r < k; ++r) {
      for (Eigen::Index c = 0; c < k; ++c) block(r, c) = h(idx[r], idx[c]);
    }
    // Leakage out of the sector would mean H0 does not conserve (N_R, N_L).
    for (int r : idx) {
      for (int c = 0; c < basis.dim(); ++c) {
        if (std::find(idx.begin(), idx.end(), c) != idx.end()) continue;
        if (std::abs(h(r, c)) > 1e-10 * scale) {
          throw NumericalError("h0 couples different excitation sectors");
        }
      }
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> es(block);
    SectorEigen se{es.eigenvalues(), es.eigenvectors(), false};
    std::vector<CVector> refs;
    for (const CVector& rf : refs_full) {
      CVector local(k);
      for (Eigen::Index r = 0; r < k; ++r) local(r) = rf(idx[r]);
      refs.push_back(local);
    }
    for (Eigen::Index r = 0; r < k; ++r) refs.push_back(CVector::Unit(k, r));
    canonicalize_clusters(se, refs);
    return se;
  };

  auto embed = [&](const std::vector<int>& idx, const CVector& local) {
    CVector v = CVector::Zero(basis.dim());
    for (std::size_t r = 0; r < idx.size(); ++r) v(idx[r]) = local(static_cast<Eigen::Index>(r));
    fix_phase(v);
    return v;
  };

  auto store = [&](DressedLabel label, double value, CVector v) {
    DressedState& s = out[static_cast<std::size_t>(label)];
    s.label = label;
    s.manifold = manifold_of(label);
    s.energy_shift = value - s.manifold * eps0;
    s.vector = std::move(v);
  };

  {
    const std::vector<int> idx = sector_indices(0, 0);
    store(DressedLabel::G0, h(idx[0], idx[0]).real(), embed(idx, CVector::Ones(1)));
  }

  struct Doublet {
    int nr, nl;
    DressedLabel lower, upper;
  };
  for (const Doublet& d : {Doublet{1, 0, DressedLabel::Rp, DressedLabel::Rm},
                           Doublet{0, 1, DressedLabel::Lp, DressedLabel::Lm},
                           Doublet{2, 0, DressedLabel::RRp, DressedLabel::RRm},
                           Doublet{0, 2, DressedLabel::LLp, DressedLabel::LLm}}) {
    const std::vector<int> idx = sector_indices(d.nr, d.nl);
    if (idx.size() != 2) throw NumericalError("polarized doublet sector does not have two states");
    const SectorEigen se = solve_sector(idx, {});
    store(d.lower, se.values(0), embed(idx, se.vectors.col(0)));
    store(d.upper, se.values(1), embed(idx, se.vectors.col(1)));
  }

  {
    const std::vector<int> idx = sector_indices(1, 1);
    if (idx.size() != 4) throw NumericalError("cross-polarized sector does not have four states");
    const double r2 = std::numbers::sqrt2;
    CVector singlet = CVector::Zero(basis.dim());
    singlet(basis.index({QdLevel::XR, 0, 1})) = 1.0 / r2;
    singlet(basis.index({QdLevel::XL, 1, 0})) = -1.0 / r2;
    const CVector biexciton = CVector::Unit(basis.dim(), basis.index({QdLevel::B, 0, 0}));
    const CVector photons = CVector::Unit(basis.dim(), basis.index({QdLevel::G, 1, 1}));

    SectorEigen se = solve_sector(idx, {singlet, biexciton, photons});
    cross_degenerate = se.degenerate;

    std::vector<CVector> full;
    for (Eigen::Index c = 0; c < 4; ++c) full.push_back(embed(idx, se.vectors.col(c)));

    std::size_t s_pos = 0;
    double best = -1.0;
    for (std::size_t c = 0; c < full.size(); ++c) {
      const double ov = std::abs(singlet.dot(full[c]));
      if (ov > best) {
        best = ov;
        s_pos = c;
      }
    }
    if (best < 1.0 - 1e-8) {
      throw NumericalError(fmt::format("no eigenvector matches the singlet (best overlap {:.3e})", best));
    }
    store(DressedLabel::S, se.values(static_cast<Eigen::Index>(s_pos)), full[s_pos]);

    // Triplets by ascending a = -shift, i.e. descending eigenvalue; the stable
    // sort keeps the canonical order inside degenerate clusters.
    std::vector<std::size_t> rest;
    for (std::size_t c = 0; c < full.size(); ++c) {
      if (c != s_pos) rest.push_back(c);
    }
    std::stable_sort(rest.begin(), rest.end(), [&](std::size_t a, std::size_t b) {
      return se.values(static_cast<Eigen::Index>(a)) > se.values(static_cast<Eigen::Index>(b));
    });
    const std::array<DressedLabel, 3> t_labels = {DressedLabel::T1, DressedLabel::T2, DressedLabel::T3};
    for (std::size_t j = 0; j < 3; ++j) {
      store(t_labels[j], se.values(static_cast<Eigen::Index>(rest[j])), full[rest[j]]);
    }
  }

  return DressedSpectrum(std::move(out), cross_degenerate);
}

std::array<double, 3> cubic_shifts(double g, double g_B, double delta_B) {
  if (!(delta_B > 0.0)) {
    throw ConfigError(fmt::format(
        "cubic_shifts needs delta_B > 0 (got {}); diagonalize the cross block instead", delta_B));
  }
  const double p = 2.0 * (g / delta_B) * (g / delta_B);
  const double q = 2.0 * (g_B / delta_B) * (g_B / delta_B);

  // x = t + 1/3 removes the quadratic term: t^3 + P t + Q = 0 with P < 0, and
  // the three real roots follow from the trigonometric form.
  const double P = -(p + q) - 1.0 / 3.0;
  const double Q = -2.0 / 27.0 - (p + q) / 3.0 + p;
  const double m = 2.0 * std::sqrt(-P / 3.0);
  const double arg = std::clamp(3.0 * Q / (P * m), -1.0, 1.0);
  const double theta = std::acos(arg) / 3.0;

  auto f = [&](double x) { return ((x - 1.0) * x - (p + q)) * x + p; };
  auto df = [&](double x) { return (3.0 * x - 2.0) * x - (p + q); };

  std::array<double, 3> a{};
  for (int k = 0; k < 3; ++k) {
    double x = m * std::cos(theta - 2.0 * std::numbers::pi * k / 3.0) + 1.0 / 3.0;
    const double slope = df(x);
    if (std::abs(slope) > 1e-8) x -= f(x) / slope;
    a[static_cast<std::size_t>(k)] = x * delta_B;
  }
  std::sort(a.begin(), a.end());
  return a;
}

double g_minus(double delta_B, double g_B) {
  if (!(delta_B >= 0.0) || !(g_B >= 0.0)) {
    throw ConfigError(fmt::format("g_minus needs delta_B >= 0 and g_B >= 0 (got {}, {})", delta_B, g_B));
  }
  if (g_B == 0.0) return 0.0;
  // Same value as (sqrt(dB^2 + 16 g_B^2) - dB) / 4 without the cancellation at large dB.
  return 4.0 * g_B * g_B / (std::sqrt(delta_B * delta_B + 16.0 * g_B * g_B) + delta_B);
}

TransitionTable::TransitionTable(const DressedSpectrum& dressed, const ProductBasis& basis) {
  const std::array<Operator, 2> lowering = {annihilation(basis, Polarization::R),
                                            annihilation(basis, Polarization::L)};
  for (std::size_t pol = 0; pol < 2; ++pol) {
    CMatrix& table = gamma_[pol];
    table = CMatrix::Zero(kDressedCount, kDressedCount);
    for (const DressedState& upper : dressed.states()) {
      if (upper.manifold == 0) continue;
      const CVector lowered = lowering[pol].matrix() * upper.vector;
      for (const DressedState& lower : dressed.states()) {
        if (lower.manifold + 1 != upper.manifold) continue;
        table(static_cast<int>(lower.label), static_cast<int>(upper.label)) = lower.vector.dot(lowered);
      }
    }
  }
}

TransitionTable transition_table(const DressedSpectrum& dressed, const ProductBasis& basis) {
  return TransitionTable(dressed, basis);
}

}  // namespace qdcav
