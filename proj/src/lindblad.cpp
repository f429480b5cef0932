#include "qdcav/lindblad.hpp"

#include "qdcav/error.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>
#include <random>
#include <vector>

#include <fmt/format.h>

namespace qdcav {

namespace {

struct Entry {
  int row;
  int col;
  cplx value;
};

std::vector<Entry> nonzeros(const CMatrix& m) {
  std::vector<Entry> out;
  for (int c = 0; c < m.cols(); ++c) {
    for (int r = 0; r < m.rows(); ++r) {
      if (m(r, c) != cplx{}) out.push_back({r, c, m(r, c)});
    }
  }
  return out;
}

// target += scale * (a (x) b), touching only the nonzero products.
void add_kron(CMatrix& target, const CMatrix& a, const CMatrix& b, cplx scale) {
  const auto nb = nonzeros(b);
  const auto rows_b = static_cast<int>(b.rows());
  const auto cols_b = static_cast<int>(b.cols());
  for (const Entry& ea : nonzeros(a)) {
    const cplx s = scale * ea.value;
    for (const Entry& eb : nb) {
      target(ea.row * rows_b + eb.row, ea.col * cols_b + eb.col) += s * eb.value;
    }
  }
}

CVector vec(const CMatrix& rho) {
  return Eigen::Map<const CVector>(rho.data(), rho.size());
}

void add_hamiltonian(CMatrix& m, const Operator& h) {
  const CMatrix id = CMatrix::Identity(h.dim(), h.dim());
  add_kron(m, id, h.matrix(), cplx{0.0, -1.0});
  add_kron(m, h.matrix().transpose(), id, cplx{0.0, 1.0});
}

void add_dissipator(CMatrix& m, const Operator& c, double rate) {
  if (!(rate >= 0.0)) throw ConfigError(fmt::format("dissipation rate must be >= 0, got {}", rate));
  if (rate == 0.0) return;
  const CMatrix id = CMatrix::Identity(c.dim(), c.dim());
  const CMatrix cdc = c.matrix().adjoint() * c.matrix();
  add_kron(m, c.matrix().conjugate(), c.matrix(), rate);
  add_kron(m, id, cdc, -0.5 * rate);
  add_kron(m, cdc.transpose(), id, -0.5 * rate);
}

// Solves with a factorization of `a`, estimating the reciprocal condition
// number from one extra solve against a fixed pseudo-random right-hand side
// (|A^-1 r| / |r| bounds |A^-1| from below) and applying one step of iterative
// refinement, which recovers relative accuracy on the smallest entries.
template <class Solve>
CVector solve_checked(const CMatrix& a, const CVector& b, Solve&& solve, double& rcond) {
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  CVector probe(b.size());
  for (auto& v : probe) v = cplx(u(rng), u(rng));
  const CVector y = solve(probe);
  const double norm_a = a.cwiseAbs().colwise().sum().maxCoeff();
  rcond = y.allFinite() ? probe.lpNorm<1>() / (norm_a * y.lpNorm<1>()) : 0.0;
  if (!(rcond > kSingularRcond)) {
    throw NumericalError(fmt::format(
        "steady state is not unique: reciprocal condition {:.3e} of the trace-constrained Liouvillian "
        "(check dissipation rates and photon truncation)",
        rcond));
  }
  CVector x = solve(b);
  x += solve(b - a * x);
  return x;
}

}  // namespace

Liouvillian::Liouvillian(int d) : d_(d), m_(CMatrix::Zero(d * d, d * d)) {}

Liouvillian::Liouvillian(CMatrix matrix) : d_(0), m_(std::move(matrix)) {
  const auto n = m_.rows();
  d_ = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
  if (m_.cols() != n || static_cast<Eigen::Index>(d_) * d_ != n) {
    throw std::invalid_argument("Liouvillian matrix must be d^2 x d^2");
  }
}

CMatrix Liouvillian::apply(const CMatrix& rho) const {
  if (rho.rows() != d_ || rho.cols() != d_) throw std::invalid_argument("rho has wrong dimension");
  const CVector out = m_ * vec(rho);
  return Eigen::Map<const CMatrix>(out.data(), d_, d_);
}

double Liouvillian::trace_preservation_residual() const {
  Eigen::RowVectorXcd acc = Eigen::RowVectorXcd::Zero(m_.cols());
  for (int i = 0; i < d_; ++i) acc += m_.row(i + d_ * i);
  return acc.cwiseAbs().maxCoeff();
}

Liouvillian& Liouvillian::operator+=(const Liouvillian& o) {
  if (o.d_ != d_) throw std::invalid_argument("Liouvillian dimension mismatch");
  m_ += o.m_;
  return *this;
}

Liouvillian hamiltonian_term(const Operator& h) {
  const int d = h.dim();
  CMatrix m = CMatrix::Zero(d * d, d * d);
  add_hamiltonian(m, h);
  return Liouvillian(std::move(m));
}

Liouvillian dissipator(const Operator& c, double rate) {
  const int d = c.dim();
  CMatrix m = CMatrix::Zero(d * d, d * d);
  add_dissipator(m, c, rate);
  return Liouvillian(std::move(m));
}

Liouvillian build_liouvillian(const Operator& h_rot, const ModelParams& p, const ProductBasis& basis) {
  if (!(h_rot.basis() == basis)) throw std::invalid_argument("h_rot is defined on a different basis");
  const int d = basis.dim();
  CMatrix m = CMatrix::Zero(d * d, d * d);
  add_hamiltonian(m, h_rot);
  add_dissipator(m, qd_transition(basis, QdLevel::XR, QdLevel::G), p.gamma_X);
  add_dissipator(m, qd_transition(basis, QdLevel::XL, QdLevel::G), p.gamma_X);
  add_dissipator(m, qd_transition(basis, QdLevel::B, QdLevel::XR), p.gamma_B);
  add_dissipator(m, qd_transition(basis, QdLevel::B, QdLevel::XL), p.gamma_B);
  add_dissipator(m, annihilation(basis, Polarization::R), p.Gamma);
  add_dissipator(m, annihilation(basis, Polarization::L), p.Gamma);
  return Liouvillian(std::move(m));
}

SteadyState steady_state(const Liouvillian& L, SteadySolver solver) {
  const int d = L.dim();
  const Eigen::Index n = static_cast<Eigen::Index>(d) * d;
  const double l_max = L.matrix().cwiseAbs().maxCoeff();
  if (L.trace_preservation_residual() > 1e-10 * std::max(1.0, l_max)) {
    throw NumericalError("Liouvillian is not trace preserving");
  }

  CMatrix system = L.matrix();
  system.row(0).setZero();
  for (int i = 0; i < d; ++i) system(0, i + d * i) = 1.0;
  CVector rhs = CVector::Zero(n);
  rhs(0) = 1.0;

  SteadyState out;
  out.liouvillian_max = l_max;
  CVector x;
  if (solver == SteadySolver::dense_lu) {
    const Eigen::PartialPivLU<CMatrix> lu(system);
    x = solve_checked(system, rhs, [&](const CVector& b) -> CVector { return lu.solve(b); }, out.rcond);
  } else {
    Eigen::SparseMatrix<cplx> sparse = system.sparseView();
    sparse.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<cplx>, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(sparse);
    if (lu.info() != Eigen::Success) {
      throw NumericalError("steady state is not unique: sparse LU found a singular system (" +
                           lu.lastErrorMessage() + ")");
    }
    x = solve_checked(system, rhs, [&](const CVector& b) -> CVector { return lu.solve(b); }, out.rcond);
  }
  if (!x.allFinite()) throw NumericalError("steady-state solve produced non-finite values");

  CMatrix rho = Eigen::Map<const CMatrix>(x.data(), d, d);
  rho = (0.5 * (rho + rho.adjoint())).eval();
  rho /= rho.trace().real();

  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho);
  out.min_eigenvalue = es.eigenvalues().minCoeff();
  if (out.min_eigenvalue < -kPositivityTolerance) {
    throw NumericalError(fmt::format("steady state is not positive: eigenvalue {:.3e}", out.min_eigenvalue));
  }
  if (out.min_eigenvalue < -kClipFloor) {
    const Eigen::VectorXd clipped = es.eigenvalues().cwiseMax(0.0);
    rho = es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().adjoint();
    rho /= rho.trace().real();
    out.clipped = true;
  }

  out.residual = L.apply(rho).cwiseAbs().maxCoeff();
  if (out.residual > kSteadyResidualTolerance * l_max) {
    throw NumericalError(fmt::format("steady-state residual {:.3e} exceeds {:.1e} * |L|_max", out.residual,
                                     kSteadyResidualTolerance));
  }
  out.rho = std::move(rho);
  return out;
}

double shell_population(const CMatrix& rho, const ProductBasis& basis) {
  double total = 0.0;
  for (int i = 0; i < basis.dim(); ++i) {
    const BasisState& s = basis.state_at(i);
    if (s.n_r == basis.n_max() || s.n_l == basis.n_max()) total += rho(i, i).real();
  }
  return total;
}

}  // namespace qdcav
