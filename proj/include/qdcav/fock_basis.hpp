#pragma once

// Truncated product space |Y, n_R, n_L> of a four-level quantum dot and two
// circularly polarized cavity modes, plus the elementary operators built on it.
//
// Ordering (version kBasisOrderingVersion): QD level major (G, X_R, X_L, B),
// then n_R, then n_L, so
//   index(qd, n_R, n_L) = (qd * (n_max+1) + n_R) * (n_max+1) + n_L.

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace qdcav {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr int kBasisOrderingVersion = 1;

enum class QdLevel : std::uint8_t { G = 0, XR = 1, XL = 2, B = 3 };
enum class Polarization : std::uint8_t { R = 0, L = 1 };

inline constexpr int kQdLevelCount = 4;

std::string to_string(QdLevel level);
std::string to_string(Polarization pol);

// Mirror image under R <-> L relabeling.
constexpr QdLevel mirror(QdLevel level) {
  switch (level) {
    case QdLevel::XR: return QdLevel::XL;
    case QdLevel::XL: return QdLevel::XR;
    default: return level;
  }
}
constexpr Polarization mirror(Polarization pol) {
  return pol == Polarization::R ? Polarization::L : Polarization::R;
}

struct BasisState {
  QdLevel qd = QdLevel::G;
  int n_r = 0;
  int n_l = 0;

  friend bool operator==(const BasisState&, const BasisState&) = default;
};

// Excitation content of a QD level as (R, L) quanta. The biexciton carries one
// of each, which is what makes N_R and N_L separately conserved by H0.
int qd_excitations(QdLevel level, Polarization pol);

class ProductBasis {
 public:
  // Throws ConfigError for n_max < 1.
  explicit ProductBasis(int n_max);

  int n_max() const { return data_->n_max; }
  int dim() const { return static_cast<int>(data_->states.size()); }

  const BasisState& state_at(int i) const { return data_->states.at(static_cast<std::size_t>(i)); }
  std::span<const BasisState> states() const { return data_->states; }

  // Throws std::out_of_range for photon numbers outside [0, n_max].
  int index(const BasisState& s) const;
  bool contains(const BasisState& s) const;

  // Eigenvalue of N_pol on basis state i.
  int excitations(int i, Polarization pol) const;
  int total_excitations(int i) const {
    return excitations(i, Polarization::R) + excitations(i, Polarization::L);
  }

  // Index of the R<->L mirror image of state i.
  int mirror_index(int i) const;

  friend bool operator==(const ProductBasis& a, const ProductBasis& b) {
    return a.n_max() == b.n_max();
  }

 private:
  struct Data {
    int n_max = 0;
    std::vector<BasisState> states;
  };
  std::shared_ptr<const Data> data_;
};

ProductBasis build_basis(int n_max);

// Dense operator on a ProductBasis. Energies are in units of the cavity leak
// rate Gamma.
class Operator {
 public:
  explicit Operator(ProductBasis basis);
  Operator(ProductBasis basis, CMatrix elements);

  static Operator identity(const ProductBasis& basis);

  const ProductBasis& basis() const { return basis_; }
  const CMatrix& matrix() const { return m_; }
  CMatrix& matrix() { return m_; }
  int dim() const { return static_cast<int>(m_.rows()); }

  cplx element(const BasisState& row, const BasisState& col) const;
  Operator adjoint() const;
  // max |M - M^dagger|
  double hermiticity_residual() const;

  Operator& operator+=(const Operator& o);
  Operator& operator-=(const Operator& o);
  Operator& operator*=(cplx s);

  friend Operator operator+(Operator a, const Operator& b) { return a += b; }
  friend Operator operator-(Operator a, const Operator& b) { return a -= b; }
  friend Operator operator*(Operator a, cplx s) { return a *= s; }
  friend Operator operator*(cplx s, Operator a) { return a *= s; }
  friend Operator operator*(const Operator& a, const Operator& b);

 private:
  void check_same_basis(const Operator& o) const;

  ProductBasis basis_;
  CMatrix m_;
};

// [a, b] = ab - ba
Operator commutator(const Operator& a, const Operator& b);

// Bosonic lowering operator of one cavity polarization; sqrt(n) between n and
// n-1 photons, identity on the QD and on the other mode.
Operator annihilation(const ProductBasis& basis, Polarization pol);
Operator creation(const ProductBasis& basis, Polarization pol);

// |to><from| on the QD factor, identity on both photon modes.
Operator qd_transition(const ProductBasis& basis, QdLevel from, QdLevel to);

// N_pol = a_pol^dagger a_pol + (QD excitation content in pol).
Operator excitation_number(const ProductBasis& basis, Polarization pol);

// Image of a matrix in this basis under the R<->L relabeling of states:
// out(mirror(i), mirror(j)) = m(i, j).
CMatrix mirror_permute(const ProductBasis& basis, const CMatrix& m);

// Nonzero entries as "row,col,re,im" lines after a header that records the
// basis ordering version.
void write_operator_csv(std::ostream& os, const Operator& op, double drop_below = 0.0);

}  // namespace qdcav
