#pragma once

// Liouvillian superoperator of the rotating-frame master equation and its
// steady state.
//
// Superoperators act on column-stacked density matrices:
//   vec(rho)[i + d*j] = rho(i, j),   vec(A rho B) = (B^T (x) A) vec(rho).

#include "qdcav/fock_basis.hpp"
#include "qdcav/model.hpp"

namespace qdcav {

class Liouvillian {
 public:
  // Zero superoperator on a Hilbert space of dimension d.
  explicit Liouvillian(int d);
  explicit Liouvillian(CMatrix matrix);

  int dim() const { return d_; }  // Hilbert-space dimension
  const CMatrix& matrix() const { return m_; }

  CMatrix apply(const CMatrix& rho) const;

  // max_k |sum_i L(i + d*i, k)|: how far vec(1)^T fails to be a left null vector.
  double trace_preservation_residual() const;

  Liouvillian& operator+=(const Liouvillian& o);
  friend Liouvillian operator+(Liouvillian a, const Liouvillian& b) { return a += b; }

 private:
  int d_;
  CMatrix m_;
};

// -i [h, .]
Liouvillian hamiltonian_term(const Operator& h);

// rate * (c rho c^+ - {c^+ c, rho} / 2). Throws ConfigError for rate < 0.
Liouvillian dissipator(const Operator& c, double rate);

// -i[H, .] + gamma_X sum_k D[|G><X_k|] + gamma_B sum_k D[|X_k><B|]
//          + Gamma sum_k D[a_k]
Liouvillian build_liouvillian(const Operator& h_rot, const ModelParams& p, const ProductBasis& basis);

enum class SteadySolver { dense_lu, sparse_lu };

struct SteadyState {
  CMatrix rho;
  double residual = 0.0;        // max |L rho| after hygiene
  double liouvillian_max = 0.0; // max |L|, the residual's scale
  double rcond = 0.0;           // 1-norm reciprocal condition estimate of the solved system
  double min_eigenvalue = 0.0;  // before clipping
  bool clipped = false;
};

// Bound on |L rho|_max relative to |L|_max.
inline constexpr double kSteadyResidualTolerance = 1e-9;
// Eigenvalues below -kPositivityTolerance are an error.
inline constexpr double kPositivityTolerance = 1e-8;
// Eigenvalues in [-kPositivityTolerance, -kClipFloor) are clipped to zero.
// Above the floor the solve is left untouched: rebuilding rho from its
// eigenvectors would cost ~1e-16 absolute accuracy on the tiny two-excitation
// coherences the pair matrix is made of.
inline constexpr double kClipFloor = 1e-12;
// Reciprocal condition number below which the null space is called ambiguous.
inline constexpr double kSingularRcond = 1e-14;

// Solves L rho = 0 with trace(rho) = 1 by replacing the rho(0,0) row of L by
// the trace functional. Throws NumericalError when the null space is not
// one-dimensional, the residual bound fails, or rho is not positive.
SteadyState steady_state(const Liouvillian& L, SteadySolver solver = SteadySolver::dense_lu);

// Total population of states with n_R = n_max or n_L = n_max.
double shell_population(const CMatrix& rho, const ProductBasis& basis);

// Shell population above which the photon truncation is suspect.
inline constexpr double kShellWarning = 1e-4;

}  // namespace qdcav
