#pragma once

// Matrix-free conjugate gradients on the vectorized system
// S_l vec(X) = vec(F). The iteration works directly on n x p matrices with
// Frobenius inner products, which is arithmetic-for-arithmetic the vector CG
// on the Kronecker form under column-major vec, and never assembles S_l.
// Extreme Ritz values come from the Lanczos tridiagonal rebuilt out of the
// CG coefficients.

#include "meq/operator.hpp"
#include "meq/solution.hpp"

#include <chrono>

namespace meq {

struct CgIterationRecord {
  int k = 0;
  double res2_rel = kNaN;    // ||r_k||_2 / ||f||_2
  double errA_rel = kNaN;    // energy-norm error vs reference, when supplied
  double errF_rel = kNaN;    // Frobenius-relative error vs reference
  double theta_min = kNaN;   // extreme Ritz values of the CG tridiagonal
  double theta_max = kNaN;
  double seconds = 0.0;
};

enum class CgStopRule { residual, error_fro, error_energy };

struct CgOptions {
  double tol = 1e-8;
  int max_steps = 1000;
  CgStopRule stop = CgStopRule::residual;
  const Matrix* X_ref = nullptr;
  bool track_ritz = false;
};

struct CgTrace {
  std::vector<CgIterationRecord> records;
  std::vector<double> alphas;  // CG step sizes
  std::vector<double> betas;   // CG direction updates
  StopReason stop = StopReason::max_iterations;

  int iterations() const { return static_cast<int>(records.size()); }
  bool converged() const { return stop == StopReason::converged; }
};

namespace detail {

// Lanczos tridiagonal T_k from the CG coefficients:
//   T(j,j)   = 1/alpha_j + beta_{j-1}/alpha_{j-1},
//   T(j,j+1) = sqrt(beta_j)/alpha_j.
inline Matrix cg_lanczos_tridiagonal(const std::vector<double>& alphas,
                                     const std::vector<double>& betas, int k) {
  Matrix T = Matrix::Zero(k, k);
  for (int j = 0; j < k; ++j) {
    T(j, j) = 1.0 / alphas[j];
    if (j > 0) T(j, j) += betas[j - 1] / alphas[j - 1];
    if (j + 1 < k) {
      const double off = std::sqrt(std::max(0.0, betas[j])) / alphas[j];
      T(j, j + 1) = off;
      T(j + 1, j) = off;
    }
  }
  return T;
}

}  // namespace detail

/// Energy norm sqrt(e^T S_l e) of e = vec(X_ref) - vec(X_k), evaluated with
/// one operator application and no assembly.
inline double energy_norm_error(const MultitermOperator& op, const Matrix& X_ref,
                                const Matrix& X_k) {
  Matrix E = X_ref - X_k;
  const double q = vec(E).dot(vec(op.apply(E)));
  if (q < -1e-12 * E.squaredNorm())
    throw std::runtime_error("energy_norm_error: negative quadratic form");
  return std::sqrt(std::max(0.0, q));
}

/// CG on S_l vec(X) = vec(F) with zero initial guess. The operator must be
/// spd (caller-asserted); a non-positive curvature direction aborts the run.
inline std::pair<Matrix, CgTrace> cg_kron(const MultitermOperator& op, const Matrix& F,
                                          CgOptions opts = {}) {
  if (F.rows() != op.rows() || F.cols() != op.cols())
    throw std::invalid_argument("cg_kron: right-hand side shape mismatch");
  if (opts.stop != CgStopRule::residual && opts.X_ref == nullptr)
    throw std::invalid_argument("cg_kron: error-based stopping requires a reference");
  const auto t0 = std::chrono::steady_clock::now();

  CgTrace trace;
  Matrix X = Matrix::Zero(op.rows(), op.cols());
  Matrix R = F;
  Matrix P = R;
  double rs = R.squaredNorm();
  const double f_norm = std::sqrt(rs);
  const double ref_norm = opts.X_ref ? opts.X_ref->norm() : kNaN;
  double ref_energy = kNaN;
  if (opts.X_ref) {
    const double q = vec(*opts.X_ref).dot(vec(op.apply(*opts.X_ref)));
    ref_energy = std::sqrt(std::max(0.0, q));
  }

  for (int k = 1; k <= opts.max_steps; ++k) {
    Matrix SP = op.apply(P);
    const double curvature = vec(P).dot(vec(SP));
    if (curvature <= 0.0)
      throw std::runtime_error("cg_kron: non-positive curvature, operator not spd");
    const double alpha = rs / curvature;
    X.noalias() += alpha * P;
    R.noalias() -= alpha * SP;
    const double rs_new = R.squaredNorm();
    const double beta = rs_new / rs;
    trace.alphas.push_back(alpha);
    trace.betas.push_back(beta);

    CgIterationRecord rec;
    rec.k = k;
    rec.res2_rel = std::sqrt(rs_new) / f_norm;
    if (opts.X_ref) {
      rec.errF_rel = (*opts.X_ref - X).norm() / ref_norm;
      rec.errA_rel = energy_norm_error(op, *opts.X_ref, X) / ref_energy;
    }
    if (opts.track_ritz) {
      Matrix T = detail::cg_lanczos_tridiagonal(trace.alphas, trace.betas, k);
      Eigen::SelfAdjointEigenSolver<Matrix> es(T, Eigen::EigenvaluesOnly);
      rec.theta_min = es.eigenvalues().minCoeff();
      rec.theta_max = es.eigenvalues().maxCoeff();
    }
    rec.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    trace.records.push_back(rec);

    const bool done = opts.stop == CgStopRule::residual ? rec.res2_rel <= opts.tol
                      : opts.stop == CgStopRule::error_fro
                          ? rec.errF_rel <= opts.tol
                          : rec.errA_rel <= opts.tol;
    if (done) {
      trace.stop = StopReason::converged;
      break;
    }
    P = R + beta * P;
    rs = rs_new;
  }
  return {std::move(X), std::move(trace)};
}

/// Extreme Ritz values (theta_min, theta_max) per step, recomputed from the
/// stored CG coefficients.
inline std::vector<std::pair<double, double>> cg_ritz_extremes(const CgTrace& trace) {
  std::vector<std::pair<double, double>> out;
  const int kmax = static_cast<int>(trace.alphas.size());
  out.reserve(kmax);
  for (int k = 1; k <= kmax; ++k) {
    Matrix T = detail::cg_lanczos_tridiagonal(trace.alphas, trace.betas, k);
    Eigen::SelfAdjointEigenSolver<Matrix> es(T, Eigen::EigenvaluesOnly);
    out.emplace_back(es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff());
  }
  return out;
}

/// CSV export with the CG trace schema.
inline void write_cg_trace_csv(std::ostream& out, const CgTrace& trace,
                               bool zero_seconds = false) {
  out << "k,res2_rel,errA_rel,errF_rel,theta_min,theta_max,seconds\n";
  for (const CgIterationRecord& r : trace.records) {
    out << r.k << ',' << csv::format_value(r.res2_rel) << ','
        << csv::format_value(r.errA_rel) << ',' << csv::format_value(r.errF_rel) << ','
        << csv::format_value(r.theta_min) << ',' << csv::format_value(r.theta_max)
        << ',' << csv::format_value(zero_seconds ? 0.0 : r.seconds) << '\n';
  }
}

inline void write_cg_trace_csv(const std::string& path, const CgTrace& trace,
                               bool zero_seconds = false) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_cg_trace_csv: cannot open " + path);
  write_cg_trace_csv(out, trace, zero_seconds);
}

}  // namespace meq
