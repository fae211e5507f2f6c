#pragma once

// Minimal-residual Petrov-Galerkin solver for Lyapunov equations with
// F = -B0 B0^T. The test space is S times the trial space, so the computed
// core minimizes the residual Frobenius norm
//   || H_under Y [I,0] + [I;0] Y H_under^T + blkdiag(L_b L_b^T, 0) ||_F
// over Y. The first-order conditions are a generalized Sylvester equation
// whose solution can be obtained directly (Kronecker form at the reduced
// scale), by a fixed-point splitting, or by CG on the normal equations; a
// semidefinite-cone-constrained variant restores the sign structure of the
// exact solution via monotone accelerated projected gradient.

#include "meq/dense.hpp"
#include "meq/galerkin.hpp"
#include "meq/krylov.hpp"
#include "meq/solution.hpp"

#include <chrono>

namespace meq {

/// Reduced minimal-residual problem data at step k: everything is expressed
/// through H_under and the leading right-hand-side block.
struct ReducedMinresProblem {
  Matrix H_under;  // (k+1)q x kq
  Matrix M_top;    // q x q, equals L_b L_b^T
  Matrix D;        // kq x kq, symmetric

  static ReducedMinresProblem build(const Matrix& H_under, const Matrix& L_b) {
    ReducedMinresProblem prob;
    prob.H_under = H_under;
    prob.M_top = L_b * L_b.transpose();
    const Index kq = H_under.cols();
    const Index q = L_b.rows();
    Matrix H = H_under.topRows(kq);
    Matrix Mt = Matrix::Zero(kq, kq);
    Mt.topLeftCorner(q, q) = prob.M_top;
    prob.D = H.transpose() * Mt + Mt * H;
    if ((prob.D - prob.D.transpose()).norm() > 1e-12 * std::max(1.0, prob.D.norm()))
      throw std::runtime_error("ReducedMinresProblem: D failed the symmetry invariant");
    prob.D = ((prob.D + prob.D.transpose()) / 2.0).eval();
    return prob;
  }

  Index size() const { return H_under.cols(); }           // kq
  Index extended_size() const { return H_under.rows(); }  // (k+1)q
  Matrix H_square() const { return H_under.topRows(size()); }

  /// Residual matrix H_under Y J^T + J Y H_under^T + M on the extended basis.
  Matrix residual_matrix(const Matrix& Y) const {
    const Index r = extended_size(), c = size();
    Matrix S = Matrix::Zero(r, r);
    S.topLeftCorner(M_top.rows(), M_top.cols()) = M_top;
    S.leftCols(c).noalias() += H_under * Y;
    S.topRows(c).noalias() += Y * H_under.transpose();
    return S;
  }

  double objective(const Matrix& Y) const { return residual_matrix(Y).norm(); }

  /// Normal operator G(Y) = Hu^T Hu Y + Y Hu^T Hu + H Y H + H^T Y H^T.
  Matrix normal_apply(const Matrix& Y) const {
    Matrix G = H_under.transpose() * (H_under * Y);
    G.noalias() += (Y * H_under.transpose()) * H_under;
    Matrix H = H_square();
    G.noalias() += H * Y * H;
    G.noalias() += H.transpose() * Y * H.transpose();
    return G;
  }

  /// Gradient of || residual ||_F^2 at Y, i.e. 2 (G(Y) + D).
  Matrix gradient(const Matrix& Y) const { return 2.0 * (normal_apply(Y) + D); }
};

/// Direct solution of the generalized Sylvester equation
///   Hu^T Hu Y + Y Hu^T Hu + H Y H + H^T Y H^T + D = 0
/// through its Kronecker form; reduced sizes keep this cheap.
inline Matrix solve_reduced_minres(const ReducedMinresProblem& prob) {
  const Index u = prob.size();
  Matrix G = prob.H_under.transpose() * prob.H_under;
  Matrix H = prob.H_square();
  Matrix I = Matrix::Identity(u, u);
  Matrix K = kron(I, G) + kron(G, I) + kron(H.transpose(), H) +
             kron(H, H.transpose());
  Vector y;
  try {
    y = solve_linear_dense(K, -vec(prob.D));
  } catch (const std::runtime_error&) {
    throw std::runtime_error("solve_reduced_minres: singular normal operator");
  }
  Matrix Y = unvec(y, u, u);
  return ((Y + Y.transpose()) / 2.0).eval();
}

struct FixedPointOptions {
  double tol = 1e-12;          // relative change between sweeps
  int max_iterations = 100000;
  double radius_refuse = 1.0 - 1e-6;  // refuse when the estimate reaches this
  int power_iterations = 2000;
};

struct FixedPointResult {
  Matrix Y;
  double spectral_radius_estimate = 0.0;
  int iterations = 0;
  bool converged = false;
};

namespace detail {

// Spectral solve of L(Z) = G Z + Z G = C for spd G via its eigendecomposition.
struct LyapunovSplitSolver {
  Vector lambda;
  Matrix Q;

  explicit LyapunovSplitSolver(const Matrix& G) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(G);
    if (es.info() != Eigen::Success)
      throw std::runtime_error("fixed point: eigendecomposition of Hu^T Hu failed");
    lambda = es.eigenvalues();
    Q = es.eigenvectors();
    const double lmax = lambda.cwiseAbs().maxCoeff();
    if (2.0 * lambda.minCoeff() <= 1e-14 * std::max(lmax, 1e-300))
      throw std::runtime_error("fixed point: splitting operator L is singular");
  }

  Matrix solve(const Matrix& C) const {
    Matrix Ct = Q.transpose() * C * Q;
    for (Index j = 0; j < Ct.cols(); ++j)
      for (Index i = 0; i < Ct.rows(); ++i) Ct(i, j) /= lambda[i] + lambda[j];
    return Q * Ct * Q.transpose();
  }
};

}  // namespace detail

/// Fixed-point iteration Z_{m+1} = L^{-1}(-D - N(Z_m)) with the splitting
/// L(Z) = Hu^T Hu Z + Z Hu^T Hu and N(Z) = H Z H + H^T Z H^T. The spectral
/// radius of L^{-1} N is estimated by power iteration first; the iteration is
/// refused when it is not safely below one.
inline FixedPointResult solve_reduced_minres_fixed_point(
    const ReducedMinresProblem& prob, FixedPointOptions opts = {}) {
  const Index u = prob.size();
  Matrix G = prob.H_under.transpose() * prob.H_under;
  Matrix H = prob.H_square();
  detail::LyapunovSplitSolver lsolve(G);
  auto n_apply = [&H](const Matrix& Z) -> Matrix {
    return H * Z * H + H.transpose() * Z * H.transpose();
  };
  auto l_apply = [&G](const Matrix& Z) -> Matrix { return G * Z + Z * G; };

  // Power iteration on L^{-1} N, self-adjoint in the L-inner product; the
  // Rayleigh quotient there converges at the squared rate.
  FixedPointResult result;
  {
    Matrix Z = prob.D.norm() > 0.0 ? Matrix(prob.D / prob.D.norm())
                                   : Matrix(Matrix::Identity(u, u) / std::sqrt((double)u));
    double rho = 0.0;
    for (int it = 0; it < opts.power_iterations; ++it) {
      Matrix W = lsolve.solve(n_apply(Z));
      const double num = vec(Z).dot(vec(l_apply(W)));
      const double den = vec(Z).dot(vec(l_apply(Z)));
      const double rho_new = den > 0.0 ? std::abs(num / den) : 0.0;
      const double wn = W.norm();
      if (wn == 0.0) {
        rho = 0.0;
        break;
      }
      Z = W / wn;
      if (it > 2 && std::abs(rho_new - rho) <= 1e-13 * std::max(rho_new, 1e-30)) {
        rho = rho_new;
        break;
      }
      rho = rho_new;
    }
    result.spectral_radius_estimate = rho;
  }
  if (result.spectral_radius_estimate >= opts.radius_refuse)
    throw std::runtime_error(
        "solve_reduced_minres_fixed_point: spectral radius of the splitting is not "
        "below one (estimate " +
        std::to_string(result.spectral_radius_estimate) + ")");

  Matrix Z = Matrix::Zero(u, u);
  for (int m = 1; m <= opts.max_iterations; ++m) {
    Matrix Z_next = lsolve.solve(-prob.D - n_apply(Z));
    const double change = (Z_next - Z).norm();
    Z = std::move(Z_next);
    ++result.iterations;
    if (change <= opts.tol * std::max(Z.norm(), 1e-300)) {
      result.converged = true;
      break;
    }
  }
  if (!result.converged)
    throw std::runtime_error("solve_reduced_minres_fixed_point: no convergence");
  result.Y = ((Z + Z.transpose()) / 2.0).eval();
  return result;
}

/// CG on the normal equations G(Y) = -D in the Frobenius inner product.
inline Matrix solve_reduced_minres_cg(const ReducedMinresProblem& prob,
                                      double tol = 1e-12, int max_iterations = 0) {
  const Index u = prob.size();
  if (max_iterations <= 0) max_iterations = static_cast<int>(4 * u * u + 100);
  Matrix Y = Matrix::Zero(u, u);
  Matrix R = -prob.D;
  Matrix P = R;
  double rs = R.squaredNorm();
  const double stop2 = tol * tol * prob.D.squaredNorm();
  for (int it = 0; it < max_iterations && rs > stop2; ++it) {
    Matrix GP = prob.normal_apply(P);
    const double curvature = vec(P).dot(vec(GP));
    if (curvature <= 0.0)
      throw std::runtime_error("solve_reduced_minres_cg: normal operator not spd");
    const double alpha = rs / curvature;
    Y.noalias() += alpha * P;
    R.noalias() -= alpha * GP;
    const double rs_new = R.squaredNorm();
    P = R + (rs_new / rs) * P;
    rs = rs_new;
  }
  return ((Y + Y.transpose()) / 2.0).eval();
}

struct ConstraintSpec {
  enum class Sign { none, negative, positive };
  Sign sign = Sign::none;
  double eig_violation_tol = 1e-10;  // relative to ||Y||_2

  static ConstraintSpec none() { return {}; }
  static ConstraintSpec negative_cone(double tol = 1e-10) {
    return {Sign::negative, tol};
  }
  static ConstraintSpec positive_cone(double tol = 1e-10) {
    return {Sign::positive, tol};
  }
};

struct ConstrainedCoreOptions {
  double fp_tol_rel = 1e-8;   // fixed-point residual relative to ||D||_F
  int max_sweeps = 50000;
  int stall_window = 100;
  double stall_tol = 1e-14;
  const Matrix* warm_start = nullptr;
  // The unconstrained minimizer, when available: if it already lies in the
  // cone it is the exact constrained minimizer and no sweeps are needed.
  const Matrix* unconstrained = nullptr;
};

struct ConstrainedCoreResult {
  Matrix Y;
  double objective = 0.0;
  double fp_residual = 0.0;
  int sweeps = 0;
  bool converged = false;
  bool stalled = false;
};

/// Cone-constrained residual minimization min_{Y in cone} ||A(Y) + M||_F via
/// monotone accelerated projected gradient (MFISTA) with step 1/L, L from
/// power iteration on the normal operator. The returned core satisfies the
/// projected-gradient fixed-point condition to fp_tol_rel * ||D||_F.
inline ConstrainedCoreResult constrained_core(const ReducedMinresProblem& prob,
                                              ConeSign cone,
                                              ConstrainedCoreOptions opts = {}) {
  const Index u = prob.size();
  const double d_norm = std::max(prob.D.norm(), 1e-300);

  // Lipschitz constant of the gradient: 2 lambda_max of the normal operator.
  double lmax = 0.0;
  {
    Matrix Z = Matrix::Identity(u, u) / std::sqrt(static_cast<double>(u));
    for (int it = 0; it < 200; ++it) {
      Matrix W = prob.normal_apply(Z);
      const double wn = W.norm();
      if (wn == 0.0) break;
      const double est = vec(Z).dot(vec(W));
      Z = W / wn;
      if (it > 3 && std::abs(est - lmax) <= 1e-8 * std::max(est, 1e-30)) {
        lmax = est;
        break;
      }
      lmax = est;
    }
    lmax = std::max(lmax, 1e-300);
  }
  const double L = 2.0 * lmax * 1.02;
  const double step = 1.0 / L;

  auto project = [cone](const Matrix& Z) {
    return project_to_semidefinite_cone((Z + Z.transpose()) / 2.0, cone);
  };

  ConstrainedCoreResult res;
  // If the unconstrained minimizer already lies in the cone it is the exact
  // constrained minimizer. Solve for it when the caller did not pass one in.
  Matrix uncon_local;
  const Matrix* uncon = opts.unconstrained;
  if (uncon == nullptr) {
    try {
      uncon_local = solve_reduced_minres(prob);
      uncon = &uncon_local;
    } catch (const std::runtime_error&) {
    }
  }
  if (uncon) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(
        ((*uncon + uncon->transpose()) / 2.0).eval(), Eigen::EigenvaluesOnly);
    const double scale = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
    const double worst = cone == ConeSign::negative ? es.eigenvalues().maxCoeff()
                                                    : -es.eigenvalues().minCoeff();
    if (worst <= 1e-14 * scale) {
      res.Y = project(*uncon);
      res.objective = prob.objective(res.Y);
      res.fp_residual = (res.Y - project(res.Y - step * prob.gradient(res.Y))).norm();
      res.converged = true;
      return res;
    }
  }
  Matrix X = opts.warm_start ? project(*opts.warm_start) : Matrix::Zero(u, u);
  Matrix Yextr = X;
  double fX = prob.objective(X);
  double t = 1.0;
  double best_recent = fX;
  int since_progress = 0;

  for (int m = 1; m <= opts.max_sweeps; ++m) {
    ++res.sweeps;
    Matrix Z = project(Yextr - step * prob.gradient(Yextr));
    const double fZ = prob.objective(Z);
    const double t_next = (1.0 + std::sqrt(1.0 + 4.0 * t * t)) / 2.0;
    // Monotone acceptance: keep the better of the proximal point and the
    // previous iterate, extrapolate through both.
    Matrix X_new = fZ <= fX ? Z : X;
    const double fX_new = std::min(fZ, fX);
    Yextr = X_new + (t / t_next) * (Z - X_new) + ((t - 1.0) / t_next) * (X_new - X);
    X = std::move(X_new);
    fX = fX_new;
    t = t_next;

    const Matrix Xfp = project(X - step * prob.gradient(X));
    res.fp_residual = (X - Xfp).norm();
    if (res.fp_residual <= opts.fp_tol_rel * d_norm) {
      res.converged = true;
      break;
    }
    if (best_recent - fX < opts.stall_tol * std::max(1.0, best_recent)) {
      if (++since_progress >= opts.stall_window) {
        res.stalled = true;
        break;
      }
    } else {
      since_progress = 0;
      best_recent = fX;
    }
  }
  res.Y = std::move(X);
  res.objective = fX;
  return res;
}

struct DefinitenessRecord {
  int k = 0;
  int wrong_sign_count = 0;
  double min_wrong = kNaN;  // smallest wrong-sign eigenvalue magnitude bearer
  double max_wrong = kNaN;
};

/// Per-step census of eigenvalues violating the cone sign. Eigenvalues within
/// zero_rel_tol * ||Y||_2 of zero count as compliant.
inline std::vector<DefinitenessRecord> definiteness_diagnostics(
    const std::vector<Matrix>& cores, ConeSign cone, double zero_rel_tol = 1e-12) {
  std::vector<DefinitenessRecord> out;
  out.reserve(cores.size());
  int k = 0;
  for (const Matrix& Y : cores) {
    ++k;
    Eigen::SelfAdjointEigenSolver<Matrix> es((Y + Y.transpose()) / 2.0,
                                             Eigen::EigenvaluesOnly);
    const Vector& lam = es.eigenvalues();
    const double scale = std::max(lam.cwiseAbs().maxCoeff(), 1e-300);
    DefinitenessRecord rec;
    rec.k = k;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (Index i = 0; i < lam.size(); ++i) {
      const double v = cone == ConeSign::negative ? lam[i] : -lam[i];
      if (v > zero_rel_tol * scale) {
        ++rec.wrong_sign_count;
        lo = std::min(lo, lam[i]);
        hi = std::max(hi, lam[i]);
      }
    }
    if (rec.wrong_sign_count > 0) {
      rec.min_wrong = cone == ConeSign::negative ? lo : hi;
      rec.max_wrong = cone == ConeSign::negative ? hi : lo;
    }
    out.push_back(rec);
  }
  return out;
}

enum class ReducedSolver { direct, fixed_point, cg_normal };

struct MinresOptions {
  double tol = 1e-6;
  int max_steps = 100;
  ConstraintSpec constraint = ConstraintSpec::none();
  int constraint_period = 1;  // solve the constrained problem every d steps
  ReducedSolver reduced_solver = ReducedSolver::direct;
  Reorth reorth = Reorth::full;
  bool store_cores = false;
};

/// Minimal-residual solution for A X + X A^T = -B0 B0^T. history.residual_rel
/// tracks the unconstrained minimum; the constrained-track values (when a
/// cone is imposed) ride alongside.
struct MinresSolution : ProjectionSolution {
  std::vector<double> residual_rel_con;  // NaN where not computed
  std::vector<DefinitenessRecord> definiteness;  // census of unconstrained cores
  std::vector<double> con_violation;  // max cone violation of constrained cores
  Matrix Y_unconstrained;
  std::vector<Matrix> cores_uncon;  // populated when store_cores is set
  std::vector<Matrix> cores_con;
};

inline MinresSolution minres_lyapunov(const Matrix& A, const Matrix& B0,
                                      MinresOptions opts = {}) {
  const Index n = A.rows();
  if (A.cols() != n || B0.rows() != n)
    throw std::invalid_argument("minres_lyapunov: dimension mismatch");
  const auto t0 = std::chrono::steady_clock::now();

  MinresSolution sol;
  const Index q = B0.cols();
  BlockArnoldi arnoldi(A, B0, std::min<Index>(opts.max_steps, n / q), opts.reorth);
  const double f_norm = (arnoldi.L_b() * arnoldi.L_b().transpose()).norm();
  const bool constrained = opts.constraint.sign != ConstraintSpec::Sign::none;
  const ConeSign cone = opts.constraint.sign == ConstraintSpec::Sign::positive
                            ? ConeSign::positive
                            : ConeSign::negative;

  Index last = 0;
  for (;;) {
    arnoldi.advance();
    if (arnoldi.steps() == last) break;
    last = arnoldi.steps();

    ReducedMinresProblem prob =
        ReducedMinresProblem::build(arnoldi.H_under(), arnoldi.L_b());
    Matrix Y_uncon;
    switch (opts.reduced_solver) {
      case ReducedSolver::direct:
        Y_uncon = solve_reduced_minres(prob);
        break;
      case ReducedSolver::fixed_point:
        try {
          Y_uncon = solve_reduced_minres_fixed_point(prob).Y;
        } catch (const std::runtime_error& e) {
          sol.warnings.push_back(std::string("fixed point refused at k=") +
                                 std::to_string(last) + " (" + e.what() +
                                 "); fell back to the direct solve");
          Y_uncon = solve_reduced_minres(prob);
        }
        break;
      case ReducedSolver::cg_normal:
        Y_uncon = solve_reduced_minres_cg(prob);
        break;
    }

    IterationRecord rec;
    rec.k = static_cast<int>(last);
    rec.residual_rel = prob.objective(Y_uncon) / f_norm;

    double res_con = kNaN;
    double violation = kNaN;
    if (constrained &&
        (last % opts.constraint_period == 0 || arnoldi.breakdown() ||
         rec.residual_rel <= opts.tol)) {
      ConstrainedCoreOptions copts;
      copts.warm_start = &Y_uncon;
      copts.unconstrained = &Y_uncon;
      ConstrainedCoreResult cres = constrained_core(prob, cone, copts);
      if (cres.stalled)
        sol.warnings.push_back("constrained core stalled at k=" +
                               std::to_string(last));
      res_con = cres.objective / f_norm;
      Eigen::SelfAdjointEigenSolver<Matrix> es(cres.Y, Eigen::EigenvaluesOnly);
      const double scale = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
      violation = cone == ConeSign::negative
                      ? std::max(0.0, es.eigenvalues().maxCoeff()) / scale
                      : std::max(0.0, -es.eigenvalues().minCoeff()) / scale;
      sol.Y = cres.Y;
      if (opts.store_cores) sol.cores_con.push_back(cres.Y);
    }
    sol.residual_rel_con.push_back(res_con);
    sol.con_violation.push_back(violation);
    if (constrained) {
      std::vector<Matrix> one{Y_uncon};
      sol.definiteness.push_back(definiteness_diagnostics(one, cone).front());
    }
    if (opts.store_cores) sol.cores_uncon.push_back(Y_uncon);
    sol.Y_unconstrained = std::move(Y_uncon);
    if (!constrained) sol.Y = sol.Y_unconstrained;

    rec.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    sol.history.push_back(rec);

    if (rec.residual_rel <= opts.tol) {
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

/// Diagnostics CSV: one row per step with both residual tracks and the
/// wrong-sign eigenvalue census of the unconstrained core.
inline void write_minres_diagnostics_csv(std::ostream& out, const MinresSolution& sol) {
  out << "k,residual_rel_uncon,residual_rel_con,n_pos_eig,min_pos_eig,max_pos_eig\n";
  for (size_t i = 0; i < sol.history.size(); ++i) {
    const DefinitenessRecord rec =
        i < sol.definiteness.size() ? sol.definiteness[i] : DefinitenessRecord{};
    out << sol.history[i].k << ',' << csv::format_value(sol.history[i].residual_rel)
        << ',' << csv::format_value(sol.residual_rel_con[i]) << ','
        << rec.wrong_sign_count << ',' << csv::format_value(rec.min_wrong) << ','
        << csv::format_value(rec.max_wrong) << '\n';
  }
}

inline void write_minres_diagnostics_csv(const std::string& path,
                                         const MinresSolution& sol) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("write_minres_diagnostics_csv: cannot open " + path);
  write_minres_diagnostics_csv(out, sol);
}

}  // namespace meq
