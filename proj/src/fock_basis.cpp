#include "qdcav/fock_basis.hpp"

#include "qdcav/error.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

namespace qdcav {

std::string to_string(QdLevel level) {
  switch (level) {
    case QdLevel::G: return "G";
    case QdLevel::XR: return "X_R";
    case QdLevel::XL: return "X_L";
    case QdLevel::B: return "B";
  }
  return "?";
}

std::string to_string(Polarization pol) { return pol == Polarization::R ? "R" : "L"; }

int qd_excitations(QdLevel level, Polarization pol) {
  switch (level) {
    case QdLevel::G: return 0;
    case QdLevel::XR: return pol == Polarization::R ? 1 : 0;
    case QdLevel::XL: return pol == Polarization::L ? 1 : 0;
    case QdLevel::B: return 1;
  }
  return 0;
}

ProductBasis::ProductBasis(int n_max) {
  if (n_max < 1) {
    throw ConfigError(fmt::format(
        "photon truncation n_max must be >= 1 (the cascade needs two-photon states), got {}", n_max));
  }
  auto data = std::make_shared<Data>();
  data->n_max = n_max;
  data->states.reserve(static_cast<std::size_t>(kQdLevelCount * (n_max + 1) * (n_max + 1)));
  for (int q = 0; q < kQdLevelCount; ++q) {
    for (int nr = 0; nr <= n_max; ++nr) {
      for (int nl = 0; nl <= n_max; ++nl) {
        data->states.push_back({static_cast<QdLevel>(q), nr, nl});
      }
    }
  }
  data_ = std::move(data);
}

bool ProductBasis::contains(const BasisState& s) const {
  return s.n_r >= 0 && s.n_l >= 0 && s.n_r <= n_max() && s.n_l <= n_max();
}

int ProductBasis::index(const BasisState& s) const {
  if (!contains(s)) {
    throw std::out_of_range(fmt::format("state |{},{},{}> outside truncation n_max={}",
                                        to_string(s.qd), s.n_r, s.n_l, n_max()));
  }
  const int n = n_max() + 1;
  return (static_cast<int>(s.qd) * n + s.n_r) * n + s.n_l;
}

int ProductBasis::excitations(int i, Polarization pol) const {
  const BasisState& s = state_at(i);
  return (pol == Polarization::R ? s.n_r : s.n_l) + qd_excitations(s.qd, pol);
}

int ProductBasis::mirror_index(int i) const {
  const BasisState& s = state_at(i);
  return index({mirror(s.qd), s.n_l, s.n_r});
}

ProductBasis build_basis(int n_max) { return ProductBasis(n_max); }

Operator::Operator(ProductBasis basis)
    : basis_(std::move(basis)), m_(CMatrix::Zero(basis_.dim(), basis_.dim())) {}

Operator::Operator(ProductBasis basis, CMatrix elements)
    : basis_(std::move(basis)), m_(std::move(elements)) {
  if (m_.rows() != basis_.dim() || m_.cols() != basis_.dim()) {
    throw std::invalid_argument(fmt::format("operator is {}x{} but basis dimension is {}",
                                            m_.rows(), m_.cols(), basis_.dim()));
  }
}

Operator Operator::identity(const ProductBasis& basis) {
  return Operator(basis, CMatrix::Identity(basis.dim(), basis.dim()));
}

cplx Operator::element(const BasisState& row, const BasisState& col) const {
  return m_(basis_.index(row), basis_.index(col));
}

Operator Operator::adjoint() const { return Operator(basis_, m_.adjoint()); }

double Operator::hermiticity_residual() const {
  return (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
}

void Operator::check_same_basis(const Operator& o) const {
  if (!(basis_ == o.basis_)) {
    throw std::invalid_argument("operators live on different product bases");
  }
}

Operator& Operator::operator+=(const Operator& o) {
  check_same_basis(o);
  m_ += o.m_;
  return *this;
}

Operator& Operator::operator-=(const Operator& o) {
  check_same_basis(o);
  m_ -= o.m_;
  return *this;
}

Operator& Operator::operator*=(cplx s) {
  m_ *= s;
  return *this;
}

Operator operator*(const Operator& a, const Operator& b) {
  a.check_same_basis(b);
  return Operator(a.basis_, a.m_ * b.m_);
}

Operator commutator(const Operator& a, const Operator& b) { return a * b - b * a; }

Operator annihilation(const ProductBasis& basis, Polarization pol) {
  Operator op(basis);
  for (int col = 0; col < basis.dim(); ++col) {
    BasisState s = basis.state_at(col);
    int& n = pol == Polarization::R ? s.n_r : s.n_l;
    if (n == 0) continue;
    const double amp = std::sqrt(static_cast<double>(n));
    --n;
    op.matrix()(basis.index(s), col) = amp;
  }
  return op;
}

Operator creation(const ProductBasis& basis, Polarization pol) {
  return annihilation(basis, pol).adjoint();
}

Operator qd_transition(const ProductBasis& basis, QdLevel from, QdLevel to) {
  Operator op(basis);
  for (int col = 0; col < basis.dim(); ++col) {
    const BasisState& s = basis.state_at(col);
    if (s.qd != from) continue;
    op.matrix()(basis.index({to, s.n_r, s.n_l}), col) = 1.0;
  }
  return op;
}

Operator excitation_number(const ProductBasis& basis, Polarization pol) {
  Operator op(basis);
  for (int i = 0; i < basis.dim(); ++i) {
    op.matrix()(i, i) = static_cast<double>(basis.excitations(i, pol));
  }
  return op;
}

CMatrix mirror_permute(const ProductBasis& basis, const CMatrix& m) {
  CMatrix out(m.rows(), m.cols());
  for (int c = 0; c < basis.dim(); ++c) {
    const int mc = basis.mirror_index(c);
    for (int r = 0; r < basis.dim(); ++r) out(basis.mirror_index(r), mc) = m(r, c);
  }
  return out;
}

void write_operator_csv(std::ostream& os, const Operator& op, double drop_below) {
  os << fmt::format("# basis_ordering={} n_max={} dim={}\n", kBasisOrderingVersion,
                    op.basis().n_max(), op.dim());
  os << "row,col,re,im\n";
  const CMatrix& m = op.matrix();
  for (int c = 0; c < m.cols(); ++c) {
    for (int r = 0; r < m.rows(); ++r) {
      const cplx v = m(r, c);
      if (v == cplx{} || std::abs(v) < drop_below) continue;
      os << fmt::format("{},{},{:.17g},{:.17g}\n", r, c, v.real(), v.imag());
    }
  }
}

}  // namespace qdcav
