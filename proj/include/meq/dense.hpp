#pragma once

// Dense linear-algebra kernels: symmetric eigendecompositions, Sylvester and
// Lyapunov solves via Schur or spectral reduction, pivoted linear solves, and
// the nearest-semidefinite projection. Everything is value-semantic and pure;
// all tolerances are relative and overridable per call.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace meq {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Column-stacking vec operator.
inline Vector vec(const Matrix& X) {
  return Eigen::Map<const Vector>(X.data(), X.size());
}

/// Inverse of vec: reshape a column-stacked vector into a rows x cols matrix.
inline Matrix unvec(const Vector& x, Index rows, Index cols) {
  if (x.size() != rows * cols)
    throw std::invalid_argument("unvec: size mismatch");
  return Eigen::Map<const Matrix>(x.data(), rows, cols);
}

/// Kronecker product A (x) B.
inline Matrix kron(const Matrix& A, const Matrix& B) {
  Matrix K(A.rows() * B.rows(), A.cols() * B.cols());
  for (Index j = 0; j < A.cols(); ++j)
    for (Index i = 0; i < A.rows(); ++i)
      K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return K;
}

inline bool is_symmetric(const Matrix& A, double rel_tol = 1e-12) {
  if (A.rows() != A.cols()) return false;
  const double nrm = A.norm();
  if (nrm == 0.0) return true;
  return (A - A.transpose()).norm() <= rel_tol * nrm;
}

struct SymEigDecomposition {
  Vector eigenvalues;   // ascending
  Matrix eigenvectors;  // orthogonal, A = Q diag(eigenvalues) Q^T
};

/// Eigendecomposition of a symmetric matrix. Eigenvalues come out ascending.
inline SymEigDecomposition sym_eig(const Matrix& A, double sym_rel_tol = 1e-12) {
  if (A.rows() != A.cols() || A.rows() < 1)
    throw std::invalid_argument("sym_eig: matrix must be square and nonempty");
  if (!is_symmetric(A, sym_rel_tol))
    throw std::invalid_argument("sym_eig: matrix is not symmetric to tolerance");
  Eigen::SelfAdjointEigenSolver<Matrix> es(A);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("sym_eig: eigensolver did not converge");
  return {es.eigenvalues(), es.eigenvectors()};
}

/// Solve M x = f by partially pivoted LU with a relative pivot guard.
inline Vector solve_linear_dense(const Matrix& M, const Vector& f,
                                 double pivot_rel_tol = 1e-14) {
  if (M.rows() != M.cols())
    throw std::invalid_argument("solve_linear_dense: matrix must be square");
  if (M.rows() != f.size())
    throw std::invalid_argument("solve_linear_dense: dimension mismatch");
  Eigen::PartialPivLU<Matrix> lu(M);
  const double min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (min_pivot <= pivot_rel_tol * M.norm())
    throw std::runtime_error("solve_linear_dense: matrix singular to working precision");
  return lu.solve(f);
}

namespace detail {

// Eigenvalues of an upper quasi-triangular (real Schur) matrix, read off the
// 1x1 and 2x2 diagonal blocks.
inline std::vector<std::complex<double>> quasi_triangular_eigenvalues(const Matrix& T) {
  std::vector<std::complex<double>> ev;
  const Index n = T.rows();
  Index i = 0;
  while (i < n) {
    if (i + 1 < n && T(i + 1, i) != 0.0) {
      const double a = T(i, i), b = T(i, i + 1);
      const double c = T(i + 1, i), d = T(i + 1, i + 1);
      const double tr = a + d;
      const double disc = (a - d) * (a - d) + 4.0 * b * c;  // < 0 for a Schur 2x2 block
      const double re = tr / 2.0;
      const double im = std::sqrt(std::max(0.0, -disc)) / 2.0;
      ev.emplace_back(re, im);
      ev.emplace_back(re, -im);
      i += 2;
    } else {
      ev.emplace_back(T(i, i), 0.0);
      ++i;
    }
  }
  return ev;
}

// Starting indices of the diagonal blocks of an upper quasi-triangular matrix.
inline std::vector<Index> quasi_triangular_blocks(const Matrix& T) {
  std::vector<Index> starts;
  Index i = 0;
  while (i < T.rows()) {
    starts.push_back(i);
    i += (i + 1 < T.rows() && T(i + 1, i) != 0.0) ? 2 : 1;
  }
  return starts;
}

// Solve the small Sylvester block A Z + Z B^T = C with A, B of order <= 2 via
// its Kronecker form; vec(Z B^T) = (B (x) I) vec(Z).
inline Matrix solve_sylvester_tiny(const Matrix& A, const Matrix& B, const Matrix& C) {
  const Index r = A.rows(), q = B.rows();
  Matrix K = kron(Matrix::Identity(q, q), A) + kron(B, Matrix::Identity(r, r));
  Eigen::PartialPivLU<Matrix> lu(K);
  const double min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (min_pivot <= 1e-14 * (A.norm() + B.norm() + 1e-300))
    throw std::runtime_error("solve_sylvester_dense: near-singular Sylvester operator");
  Vector z = lu.solve(vec(C));
  return unvec(z, r, q);
}

// Back-substitution for T X + X S^T = C with T, S upper quasi-triangular.
// Blocks are processed right-to-left, bottom-to-top.
inline Matrix quasi_triangular_sylvester(const Matrix& T, const Matrix& S, const Matrix& C) {
  const Index n = T.rows(), p = S.rows();
  const auto tb = quasi_triangular_blocks(T);
  const auto sb = quasi_triangular_blocks(S);
  Matrix X = Matrix::Zero(n, p);
  for (Index jb = static_cast<Index>(sb.size()) - 1; jb >= 0; --jb) {
    const Index j0 = sb[jb];
    const Index qj = (jb + 1 < static_cast<Index>(sb.size()) ? sb[jb + 1] : p) - j0;
    // Contribution of already-solved column blocks L > J: X(:,L) S(J,L)^T.
    Matrix col_rhs = C.middleCols(j0, qj);
    const Index solved0 = j0 + qj;
    if (solved0 < p)
      col_rhs.noalias() -= X.middleCols(solved0, p - solved0) *
                           S.block(j0, solved0, qj, p - solved0).transpose();
    for (Index ib = static_cast<Index>(tb.size()) - 1; ib >= 0; --ib) {
      const Index i0 = tb[ib];
      const Index ri = (ib + 1 < static_cast<Index>(tb.size()) ? tb[ib + 1] : n) - i0;
      Matrix rhs = col_rhs.middleRows(i0, ri);
      const Index below0 = i0 + ri;
      if (below0 < n)
        rhs.noalias() -= T.block(i0, below0, ri, n - below0) *
                         X.block(below0, j0, n - below0, qj);
      X.block(i0, j0, ri, qj) =
          solve_sylvester_tiny(T.block(i0, i0, ri, ri), S.block(j0, j0, qj, qj), rhs);
    }
  }
  return X;
}

inline void check_sylvester_separation(const std::vector<std::complex<double>>& eva,
                                       const std::vector<std::complex<double>>& evb,
                                       double scale, double sep_rel_tol) {
  double sep = std::numeric_limits<double>::infinity();
  for (const auto& la : eva)
    for (const auto& mb : evb) sep = std::min(sep, std::abs(la + mb));
  if (sep <= sep_rel_tol * scale)
    throw std::runtime_error("solve_sylvester_dense: spectra of A and -B not separated");
}

}  // namespace detail

/// Solve A X + X B = C. Symmetric pairs go through the spectral reduction,
/// everything else through real Schur forms of A and B^T; the Lyapunov case
/// B = A^T reuses a single decomposition. Cost O(n^3 + p^3), never O(n^3 p^3).
inline Matrix solve_sylvester_dense(const Matrix& A, const Matrix& B, const Matrix& C,
                                    double sep_rel_tol = 1e-12) {
  const Index n = A.rows(), p = B.rows();
  if (A.cols() != n || B.cols() != p || C.rows() != n || C.cols() != p)
    throw std::invalid_argument("solve_sylvester_dense: dimension mismatch");
  const double scale = A.norm() + B.norm();

  if (is_symmetric(A) && is_symmetric(B)) {
    const SymEigDecomposition ea = sym_eig(A);
    const bool lyapunov = (&A == &B) || (n == p && (B - A).norm() == 0.0);
    const SymEigDecomposition eb = lyapunov ? ea : sym_eig(B);
    double sep = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < p; ++j)
        sep = std::min(sep, std::abs(ea.eigenvalues[i] + eb.eigenvalues[j]));
    if (sep <= sep_rel_tol * scale)
      throw std::runtime_error("solve_sylvester_dense: spectra of A and -B not separated");
    Matrix Ct = ea.eigenvectors.transpose() * C * eb.eigenvectors;
    for (Index j = 0; j < p; ++j)
      for (Index i = 0; i < n; ++i)
        Ct(i, j) /= ea.eigenvalues[i] + eb.eigenvalues[j];
    return ea.eigenvectors * Ct * eb.eigenvectors.transpose();
  }

  // General path: A = U T U^T, B^T = V S V^T, i.e. B = V S^T V^T, so that
  // T Xt + Xt S^T = U^T C V with both T and S upper quasi-triangular.
  Eigen::RealSchur<Matrix> schur_a(A);
  if (schur_a.info() != Eigen::Success)
    throw std::runtime_error("solve_sylvester_dense: Schur decomposition of A failed");
  const Matrix& T = schur_a.matrixT();
  const Matrix& U = schur_a.matrixU();

  const bool lyapunov = n == p && (B - A.transpose()).norm() == 0.0;
  Matrix S, V;
  if (lyapunov) {
    S = T;
    V = U;
  } else {
    Eigen::RealSchur<Matrix> schur_b(B.transpose());
    if (schur_b.info() != Eigen::Success)
      throw std::runtime_error("solve_sylvester_dense: Schur decomposition of B failed");
    S = schur_b.matrixT();
    V = schur_b.matrixU();
  }

  detail::check_sylvester_separation(detail::quasi_triangular_eigenvalues(T),
                                     detail::quasi_triangular_eigenvalues(S), scale,
                                     sep_rel_tol);

  Matrix Ct = U.transpose() * C * V;
  Matrix Xt = detail::quasi_triangular_sylvester(T, S, Ct);
  return U * Xt * V.transpose();
}

enum class ConeSign { negative, positive };

/// Nearest (Frobenius) matrix in the chosen semidefinite cone: eigendecompose
/// and clip the offending eigenvalue signs.
inline Matrix project_to_semidefinite_cone(const Matrix& Y, ConeSign sign,
                                           double sym_rel_tol = 1e-12) {
  const SymEigDecomposition e = sym_eig(Y, sym_rel_tol);
  Vector clipped = e.eigenvalues;
  for (Index i = 0; i < clipped.size(); ++i)
    clipped[i] = sign == ConeSign::negative ? std::min(clipped[i], 0.0)
                                            : std::max(clipped[i], 0.0);
  Matrix P = e.eigenvectors * clipped.asDiagonal() * e.eigenvectors.transpose();
  return (P + P.transpose()) / 2.0;
}

}  // namespace meq
