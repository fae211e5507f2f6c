#pragma once

// Orthonormal (block) Krylov bases K_k(A, B0) with the Arnoldi relation
//   A V_k = [V_k, V_next] H_under,
// built incrementally so projection solvers can expand one step at a time.
// Full reorthogonalization is the default; the optimality and bound results
// downstream assume orthonormal bases.

#include "meq/dense.hpp"

#include <functional>

namespace meq {

enum class Reorth { none, full };

using MatVec = std::function<Matrix(const Matrix&)>;

struct KrylovBasis {
  Matrix V;        // n x (k q), orthonormal columns
  Matrix V_next;   // n x q, next block (zero columns after breakdown)
  Matrix H_under;  // (k+1) q x k q
  Matrix L_b;      // q x q, start block B0 = V_1 L_b
  Index block_size = 1;  // q
  Index steps = 0;       // k
  bool breakdown = false;

  Matrix H_square() const { return H_under.topRows(steps * block_size); }
};

/// Incremental block Arnoldi process. advance() performs one block step and
/// returns false once the requested step count is reached or the new block
/// lost rank (deflation: we terminate early and report the achieved space).
class BlockArnoldi {
 public:
  BlockArnoldi(MatVec apply, const Matrix& B0, Index max_steps,
               Reorth reorth = Reorth::full, double deflation_rel_tol = 1e-12)
      : apply_(std::move(apply)),
        n_(B0.rows()),
        q_(B0.cols()),
        max_steps_(max_steps),
        reorth_(reorth),
        deflation_rel_tol_(deflation_rel_tol) {
    if (q_ < 1 || n_ < 1) throw std::invalid_argument("BlockArnoldi: empty start block");
    if (max_steps_ * q_ > n_)
      throw std::invalid_argument("BlockArnoldi: k*q exceeds the ambient dimension");
    V_.resize(n_, max_steps_ * q_);
    H_.setZero((max_steps_ + 1) * q_, max_steps_ * q_);
    V_next_.setZero(n_, q_);

    Eigen::HouseholderQR<Matrix> qr(B0);
    Matrix Q = qr.householderQ() * Matrix::Identity(n_, q_);
    Matrix R = qr.matrixQR().topRows(q_).triangularView<Eigen::Upper>();
    for (Index i = 0; i < q_; ++i) {
      if (R(i, i) < 0.0) {
        Q.col(i) = -Q.col(i);
        R.row(i) = -R.row(i);
      }
    }
    const double b_scale = R.cwiseAbs().maxCoeff();
    for (Index i = 0; i < q_; ++i)
      if (std::abs(R(i, i)) <= 1e-12 * std::max(b_scale, 1e-300))
        throw std::invalid_argument("BlockArnoldi: start block is rank deficient");
    V_.leftCols(q_) = Q;
    L_b_ = R;
  }

  BlockArnoldi(const Matrix& A, const Matrix& B0, Index max_steps,
               Reorth reorth = Reorth::full, double deflation_rel_tol = 1e-12)
      : BlockArnoldi([A](const Matrix& X) -> Matrix { return A * X; }, B0,
                     max_steps, reorth, deflation_rel_tol) {
    if (A.rows() != A.cols() || A.rows() != B0.rows())
      throw std::invalid_argument("BlockArnoldi: A/B0 dimension mismatch");
  }

  Index steps() const { return k_; }
  Index block_size() const { return q_; }
  bool breakdown() const { return breakdown_; }
  double operator_norm_estimate() const { return norm_est_; }
  const Matrix& L_b() const { return L_b_; }

  /// Orthonormal basis of the space built so far (n x kq).
  auto V() const { return V_.leftCols(k_ * q_); }
  /// The next block (n x q); zero after breakdown.
  const Matrix& V_next() const { return V_next_; }
  /// Arnoldi matrix with the trailing block row, ((k+1)q x kq).
  auto H_under() const { return H_.topLeftCorner((k_ + 1) * q_, k_ * q_); }
  /// Leading square part of H_under (kq x kq).
  auto H_square() const { return H_.topLeftCorner(k_ * q_, k_ * q_); }

  bool advance() {
    if (breakdown_ || k_ >= max_steps_) return false;
    Matrix W = apply_(V_.middleCols(k_ * q_, q_));
    if (W.rows() != n_ || W.cols() != q_)
      throw std::invalid_argument("BlockArnoldi: operator returned wrong shape");
    norm_est_ = std::max(norm_est_, W.norm() / std::sqrt(static_cast<double>(q_)));

    // Block modified Gram-Schmidt, optionally a second pass.
    const int passes = reorth_ == Reorth::full ? 2 : 1;
    for (int pass = 0; pass < passes; ++pass) {
      for (Index b = 0; b <= k_; ++b) {
        auto Vb = V_.middleCols(b * q_, q_);
        Matrix h = Vb.transpose() * W;
        W.noalias() -= Vb * h;
        H_.block(b * q_, k_ * q_, q_, q_) += h;
      }
    }

    Eigen::HouseholderQR<Matrix> qr(W);
    Matrix Q = qr.householderQ() * Matrix::Identity(n_, q_);
    Matrix R = qr.matrixQR().topRows(q_).triangularView<Eigen::Upper>();
    for (Index i = 0; i < q_; ++i) {
      if (R(i, i) < 0.0) {
        Q.col(i) = -Q.col(i);
        R.row(i) = -R.row(i);
      }
    }

    const double sigma_min =
        q_ == 1 ? std::abs(R(0, 0))
                : Eigen::JacobiSVD<Matrix>(R).singularValues().minCoeff();
    ++k_;
    if (sigma_min <= deflation_rel_tol_ * std::max(norm_est_, 1e-300)) {
      // Invariant subspace reached: the dropped block has norm below the
      // deflation threshold, so A V = [V, 0] H_under holds to tolerance.
      breakdown_ = true;
      V_next_.setZero();
      return false;
    }
    H_.block(k_ * q_, (k_ - 1) * q_, q_, q_) = R;
    if (k_ < max_steps_) V_.middleCols(k_ * q_, q_) = Q;
    V_next_ = Q;
    return true;
  }

  KrylovBasis basis() const {
    KrylovBasis b;
    b.V = V();
    b.V_next = V_next_;
    b.H_under = H_under();
    b.L_b = L_b_;
    b.block_size = q_;
    b.steps = k_;
    b.breakdown = breakdown_;
    return b;
  }

 private:
  MatVec apply_;
  Index n_, q_, max_steps_;
  Reorth reorth_;
  double deflation_rel_tol_;
  Matrix V_, V_next_, H_, L_b_;
  Index k_ = 0;
  bool breakdown_ = false;
  double norm_est_ = 0.0;
};

/// Run k steps of block Arnoldi and return the final basis.
inline KrylovBasis block_arnoldi(const MatVec& apply, const Matrix& B0, Index k,
                                 Reorth reorth = Reorth::full) {
  BlockArnoldi process(apply, B0, k, reorth);
  while (process.advance()) {
  }
  return process.basis();
}

inline KrylovBasis block_arnoldi(const Matrix& A, const Matrix& B0, Index k,
                                 Reorth reorth = Reorth::full) {
  BlockArnoldi process(A, B0, k, reorth);
  while (process.advance()) {
  }
  return process.basis();
}

/// Extreme Ritz values (theta_min, theta_max) of the projected matrix, for
/// the symmetric path where H_square is (block) tridiagonal.
inline std::pair<double, double> ritz_extremes(const Matrix& H_square,
                                               double sym_rel_tol = 1e-10) {
  if (!is_symmetric(H_square, sym_rel_tol))
    throw std::invalid_argument("ritz_extremes: H_square not symmetric");
  Matrix Hs = (H_square + H_square.transpose()) / 2.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(Hs, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("ritz_extremes: eigensolver did not converge");
  return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

inline std::pair<double, double> ritz_extremes(const KrylovBasis& basis,
                                               double sym_rel_tol = 1e-10) {
  return ritz_extremes(Matrix(basis.H_square()), sym_rel_tol);
}

}  // namespace meq
