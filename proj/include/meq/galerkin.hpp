#pragma once

// Galerkin projection solvers for Lyapunov, Sylvester and multiterm linear
// matrix equations: impose V^T R_k W = 0 on the residual, solve the projected
// equation in the compressed space, and track residual / error histories.
// For spd operators the Galerkin iterate minimizes the S-norm error over the
// space, so the recorded error curves are non-increasing as the spaces grow.

#include "meq/dense.hpp"
#include "meq/krylov.hpp"
#include "meq/operator.hpp"
#include "meq/solution.hpp"

#include <chrono>
#include <optional>

namespace meq {

enum class StopRule { residual, error_fro, error_snorm };

struct GalerkinOptions {
  double tol = 1e-6;
  int max_steps = 100;
  StopRule stop = StopRule::residual;
  const Matrix* X_ref = nullptr;  // enables error columns and error stopping
  bool track_ritz = false;
  bool store_cores = false;  // keep Y_k for every step (desk-scale diagnostics)
  Reorth reorth = Reorth::full;
};

namespace detail {

using SolverClock = std::chrono::steady_clock;

inline double elapsed_seconds(SolverClock::time_point t0) {
  return std::chrono::duration<double>(SolverClock::now() - t0).count();
}

inline bool stop_satisfied(const IterationRecord& rec, const GalerkinOptions& opts) {
  switch (opts.stop) {
    case StopRule::residual: return rec.residual_rel <= opts.tol;
    case StopRule::error_fro: return rec.error_fro_rel <= opts.tol;
    case StopRule::error_snorm: return rec.error_snorm_rel <= opts.tol;
  }
  return false;
}

inline void require_ref_for_error_stop(const GalerkinOptions& opts) {
  if (opts.stop != StopRule::residual && opts.X_ref == nullptr)
    throw std::invalid_argument("error-based stopping requires a reference solution");
}

// || F - S(X_k) ||_F for the Lyapunov / Sylvester pair expressed in the
// Krylov bases through the Arnoldi relation: the residual equals the norm of
//   M - H_A Y J^T - J Y H_B^T
// on the extended (k+1)-block coordinates, with M carrying the right-hand
// side factor L_1 L_2^T in its leading block.
inline double relation_residual_norm(const Matrix& Hu_a, const Matrix& Hu_b,
                                     const Matrix& Y, const Matrix& L1L2t) {
  const Index ra = Hu_a.rows(), rb = Hu_b.rows();
  const Index ca = Hu_a.cols(), cb = Hu_b.cols();
  Matrix small = Matrix::Zero(ra, rb);
  small.topLeftCorner(L1L2t.rows(), L1L2t.cols()) = L1L2t;
  small.leftCols(cb).noalias() -= Hu_a * Y;
  small.topRows(ca).noalias() -= Y * Hu_b.transpose();
  return small.norm();
}

}  // namespace detail

/// S-norm of the error X_ref - X_k under the (spd) operator.
inline double error_s_norm(const MultitermOperator& op, const Matrix& X_ref,
                           const Matrix& X_k) {
  return op.s_norm(X_ref - X_k);
}

/// Galerkin solver for A X + X A^T = B0 B0^T on the block Krylov space
/// K_k(A, B0). The projected Lyapunov equation H Y + Y H^T = (V^T B0)(V^T B0)^T
/// is solved densely at every step.
inline ProjectionSolution galerkin_lyapunov(const Matrix& A, const Matrix& B0,
                                            GalerkinOptions opts = {}) {
  const Index n = A.rows();
  if (A.cols() != n || B0.rows() != n)
    throw std::invalid_argument("galerkin_lyapunov: dimension mismatch");
  detail::require_ref_for_error_stop(opts);
  const auto t0 = detail::SolverClock::now();

  ProjectionSolution sol;
  const bool symmetric_a = is_symmetric(A);
  if (!symmetric_a)
    sol.warnings.push_back(
        "A is not symmetric: the solver proceeds, but the S-norm optimality of the "
        "Galerkin iterate is not guaranteed");

  const Index q = B0.cols();
  const Index max_steps = std::min<Index>(opts.max_steps, n / q);
  BlockArnoldi arnoldi(A, B0, max_steps, opts.reorth);
  const Matrix rhs_core = arnoldi.L_b() * arnoldi.L_b().transpose();
  const double f_norm = rhs_core.norm();
  const double ref_norm = opts.X_ref ? opts.X_ref->norm() : kNaN;
  double ref_snorm = kNaN;
  if (opts.X_ref && symmetric_a) {
    const double q2 = 2.0 * vec(*opts.X_ref).dot(vec(Matrix(A * *opts.X_ref)));
    ref_snorm = std::sqrt(std::max(0.0, q2));
  }

  Index last = 0;
  for (;;) {
    arnoldi.advance();
    if (arnoldi.steps() == last) break;
    last = arnoldi.steps();
    const Index kq = last * q;

    Matrix H = arnoldi.H_square();
    Matrix C = Matrix::Zero(kq, kq);
    C.topLeftCorner(q, q) = rhs_core;
    Matrix Y = solve_sylvester_dense(H, H.transpose(), C);

    IterationRecord rec;
    rec.k = static_cast<int>(last);
    rec.residual_rel =
        detail::relation_residual_norm(arnoldi.H_under(), arnoldi.H_under(), Y,
                                       rhs_core) /
        f_norm;
    if (opts.X_ref) {
      Matrix E = *opts.X_ref - arnoldi.V() * Y * arnoldi.V().transpose();
      rec.error_fro_rel = E.norm() / ref_norm;
      if (symmetric_a) {
        const double q2 = 2.0 * vec(E).dot(vec(Matrix(A * E)));
        rec.error_snorm_rel = std::sqrt(std::max(0.0, q2)) / ref_snorm;
      }
    }
    if (opts.track_ritz && is_symmetric(Matrix(H), 1e-10)) {
      auto [tmin, tmax] = ritz_extremes(Matrix(H));
      rec.theta_min = tmin;
      rec.theta_max = tmax;
    }
    rec.seconds = detail::elapsed_seconds(t0);
    sol.history.push_back(rec);
    if (opts.store_cores) sol.cores.push_back(Y);
    sol.Y = std::move(Y);

    if (detail::stop_satisfied(rec, opts)) {
      sol.stop = StopReason::converged;
      break;
    }
    if (arnoldi.breakdown()) {
      sol.stop = StopReason::breakdown;
      break;
    }
  }
  sol.V = arnoldi.V();
  sol.W = sol.V;
  return sol;
}

/// Galerkin solver for A X + X B = b1 b2^T on the pair of Krylov spaces
/// K_k(A, b1), K_k(B, b2). Right-hand-side scaling rides in the QR factors of
/// the seed blocks, so the solution satisfies the unnormalized equation.
inline ProjectionSolution galerkin_sylvester(const Matrix& A, const Matrix& B,
                                             const Matrix& b1, const Matrix& b2,
                                             GalerkinOptions opts = {}) {
  const Index n = A.rows(), p = B.rows();
  if (A.cols() != n || B.cols() != p || b1.rows() != n || b2.rows() != p)
    throw std::invalid_argument("galerkin_sylvester: dimension mismatch");
  detail::require_ref_for_error_stop(opts);
  const auto t0 = detail::SolverClock::now();

  ProjectionSolution sol;
  const bool symmetric = is_symmetric(A) && is_symmetric(B);
  if (!symmetric)
    sol.warnings.push_back(
        "A or B is not symmetric: S-norm optimality is not guaranteed");

  const Index qa = b1.cols(), qb = b2.cols();
  BlockArnoldi pa(A, b1, std::min<Index>(opts.max_steps, n / qa), opts.reorth);
  BlockArnoldi pb(B, b2, std::min<Index>(opts.max_steps, p / qb), opts.reorth);
  const Matrix L1L2t = pa.L_b() * pb.L_b().transpose();
  const double f_norm = L1L2t.norm();
  const double ref_norm = opts.X_ref ? opts.X_ref->norm() : kNaN;
  double ref_snorm = kNaN;
  if (opts.X_ref && symmetric) {
    const Matrix& X = *opts.X_ref;
    const double q2 = vec(X).dot(vec(Matrix(A * X))) + vec(X).dot(vec(Matrix(X * B)));
    ref_snorm = std::sqrt(std::max(0.0, q2));
  }

  // The two sides advance in lockstep until one saturates (its space is full
  // or an invariant subspace was hit); the other then keeps growing, so the
  // nested-space optimality is preserved throughout.
  int step = 0;
  Index last_a = 0, last_b = 0;
  for (;;) {
    pa.advance();
    pb.advance();
    if (pa.steps() == last_a && pb.steps() == last_b) break;
    last_a = pa.steps();
    last_b = pb.steps();
    ++step;
    const Index kla = last_a * qa, klb = last_b * qb;

    Matrix C = Matrix::Zero(kla, klb);
    C.topLeftCorner(qa, qb) = L1L2t;
    Matrix Y = solve_sylvester_dense(Matrix(pa.H_square()), Matrix(pb.H_square()), C);

    IterationRecord rec;
    rec.k = step;
    rec.residual_rel =
        detail::relation_residual_norm(Matrix(pa.H_under()), Matrix(pb.H_under()), Y,
                                       L1L2t) /
        f_norm;
    if (opts.X_ref) {
      Matrix E = *opts.X_ref - pa.V() * Y * pb.V().transpose();
      rec.error_fro_rel = E.norm() / ref_norm;
      if (symmetric) {
        const double q2 =
            vec(E).dot(vec(Matrix(A * E))) + vec(E).dot(vec(Matrix(E * B)));
        rec.error_snorm_rel = std::sqrt(std::max(0.0, q2)) / ref_snorm;
      }
    }
    if (opts.track_ritz && is_symmetric(Matrix(pa.H_square()), 1e-10)) {
      auto [tmin, tmax] = ritz_extremes(Matrix(pa.H_square()));
      rec.theta_min = tmin;
      rec.theta_max = tmax;
    }
    rec.seconds = detail::elapsed_seconds(t0);
    sol.history.push_back(rec);
    if (opts.store_cores) sol.cores.push_back(Y);
    sol.Y = std::move(Y);
    sol.V = pa.V();
    sol.W = pb.V();

    if (detail::stop_satisfied(rec, opts)) {
      sol.stop = StopReason::converged;
      break;
    }
    if ((pa.breakdown() || last_a * qa >= n) && (pb.breakdown() || last_b * qb >= p)) {
      sol.stop = StopReason::breakdown;
      break;
    }
  }
  return sol;
}

/// Approximation space recipe: a matvec to expand with and the seed block.
struct KrylovSpaceSpec {
  MatVec apply;
  Matrix seed;
};

/// Galerkin solver for the multiterm equation S(X) = F1 F2^T. The reduced
/// operator has terms (V^T A_j V, W^T B_j W); its Kronecker matrix is
/// assembled and solved densely, which is cheap at the reduced scale. The
/// spaces may saturate at different sizes (e.g. p << n); a saturated side is
/// frozen while the other keeps growing.
inline ProjectionSolution galerkin_multiterm(const MultitermOperator& op,
                                             const Matrix& F1, const Matrix& F2,
                                             const KrylovSpaceSpec& left,
                                             const KrylovSpaceSpec& right,
                                             GalerkinOptions opts = {}) {
  const Index n = op.rows(), p = op.cols();
  if (F1.rows() != n || F2.rows() != p || F1.cols() != F2.cols())
    throw std::invalid_argument("galerkin_multiterm: right-hand side shape mismatch");
  detail::require_ref_for_error_stop(opts);
  const auto t0 = detail::SolverClock::now();

  const Index ql = left.seed.cols(), qr = right.seed.cols();
  BlockArnoldi pl(left.apply, left.seed, std::min<Index>(opts.max_steps, n / ql),
                  opts.reorth);
  BlockArnoldi pr(right.apply, right.seed, std::min<Index>(opts.max_steps, p / qr),
                  opts.reorth);

  const Matrix F = F1 * F2.transpose();
  const double f_norm = F.norm();
  const int ell = op.num_terms();

  ProjectionSolution sol;
  const double ref_norm = opts.X_ref ? opts.X_ref->norm() : kNaN;
  const double ref_snorm = opts.X_ref ? op.s_norm(*opts.X_ref) : kNaN;

  int step = 0;
  Index last_l = 0, last_r = 0;
  for (;;) {
    pl.advance();
    pr.advance();
    if (pl.steps() == last_l && pr.steps() == last_r) break;
    last_l = pl.steps();
    last_r = pr.steps();
    ++step;
    const Index kl = last_l * ql, kr = last_r * qr;

    auto V = pl.V();
    auto W = pr.V();
    Matrix Kred = Matrix::Zero(kl * kr, kl * kr);
    for (int j = 0; j < ell; ++j) {
      Matrix Ared = V.transpose() * op.A(j) * V;
      Matrix Bred = W.transpose() * op.B(j) * W;
      Kred += kron(Bred.transpose(), Ared);
    }
    Matrix Fred = (V.transpose() * F1) * (W.transpose() * F2).transpose();
    Matrix Y = unvec(solve_linear_dense(Kred, vec(Fred)), kl, kr);

    Matrix Xk = V * Y * W.transpose();
    IterationRecord rec;
    rec.k = step;
    rec.residual_rel = (F - op.apply(Xk)).norm() / f_norm;
    if (opts.X_ref) {
      Matrix E = *opts.X_ref - Xk;
      rec.error_fro_rel = E.norm() / ref_norm;
      rec.error_snorm_rel = op.s_norm(E) / ref_snorm;
    }
    rec.seconds = detail::elapsed_seconds(t0);
    sol.history.push_back(rec);
    if (opts.store_cores) sol.cores.push_back(Y);
    sol.Y = std::move(Y);
    sol.V = V;
    sol.W = W;

    if (detail::stop_satisfied(rec, opts)) {
      sol.stop = StopReason::converged;
      break;
    }
    if ((pl.breakdown() || pl.steps() * ql >= n) &&
        (pr.breakdown() || pr.steps() * qr >= p)) {
      sol.stop = StopReason::breakdown;
      break;
    }
  }
  return sol;
}

/// Convenience overload: block Krylov spaces grown with the first (dominant)
/// coefficient pair, seeded by the right-hand-side factors.
inline ProjectionSolution galerkin_multiterm(const MultitermOperator& op,
                                             const Matrix& F1, const Matrix& F2,
                                             GalerkinOptions opts = {}) {
  Matrix A1 = op.A(0);
  Matrix B1t = op.B(0).transpose();
  KrylovSpaceSpec left{[A1](const Matrix& X) -> Matrix { return A1 * X; }, F1};
  KrylovSpaceSpec right{[B1t](const Matrix& X) -> Matrix { return B1t * X; }, F2};
  return galerkin_multiterm(op, F1, F2, left, right, opts);
}

}  // namespace meq
