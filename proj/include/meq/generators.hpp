#pragma once

// Seeded problem generators: spd matrices with prescribed spectra under a
// random orthogonal similarity, antistable nonnormal matrices via a
// conditioned random similarity, and spd multiterm operators built from a
// dominant definite pair plus controlled indefinite perturbations. A fixed
// seed reproduces the same problem bit for bit on one platform.

#include "meq/dense.hpp"
#include "meq/operator.hpp"

#include <random>

namespace meq {

struct SpectrumSpec {
  enum class Kind { loguniform, explicit_list, example42 };
  Kind kind = Kind::loguniform;
  double a = 1.0;    // loguniform interval [a, b], endpoints pinned
  double b = 100.0;
  std::vector<double> values;  // explicit_list

  static SpectrumSpec loguniform(double a, double b) {
    if (!(a > 0.0 && b >= a))
      throw std::invalid_argument("SpectrumSpec: need 0 < a <= b");
    SpectrumSpec s;
    s.kind = Kind::loguniform;
    s.a = a;
    s.b = b;
    return s;
  }
  static SpectrumSpec explicit_list(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("SpectrumSpec: empty list");
    SpectrumSpec s;
    s.kind = Kind::explicit_list;
    s.values = std::move(v);
    return s;
  }
  /// lambda_1 = 0.001, lambda_2 = 2, ..., lambda_n = n.
  static SpectrumSpec example42() {
    SpectrumSpec s;
    s.kind = Kind::example42;
    return s;
  }

  Vector eigenvalues(Index n) const {
    Vector lam(n);
    switch (kind) {
      case Kind::loguniform: {
        // The draw below is only used through gen_* which re-seed; keep this
        // path deterministic by requiring the caller to sample.
        throw std::logic_error("SpectrumSpec: loguniform needs an RNG, use sample()");
      }
      case Kind::explicit_list: {
        if (static_cast<Index>(values.size()) != n)
          throw std::invalid_argument("SpectrumSpec: list length != n");
        for (Index i = 0; i < n; ++i) lam[i] = values[i];
        return lam;
      }
      case Kind::example42: {
        if (n < 2) throw std::invalid_argument("SpectrumSpec: example42 needs n >= 2");
        lam[0] = 0.001;
        for (Index i = 1; i < n; ++i) lam[i] = static_cast<double>(i + 1);
        return lam;
      }
    }
    throw std::logic_error("SpectrumSpec: unreachable");
  }

  Vector sample(Index n, std::mt19937_64& rng) const {
    if (kind != Kind::loguniform) return eigenvalues(n);
    Vector lam(n);
    std::uniform_real_distribution<double> u(std::log(a), std::log(b));
    for (Index i = 0; i < n; ++i) lam[i] = std::exp(u(rng));
    std::sort(lam.data(), lam.data() + n);
    // Pin the endpoints so kappa is exactly b/a for any n.
    lam[0] = a;
    if (n > 1) lam[n - 1] = b;
    return lam;
  }
};

namespace detail {

inline Matrix standard_normal_matrix(Index r, Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix M(r, c);
  for (Index j = 0; j < c; ++j)
    for (Index i = 0; i < r; ++i) M(i, j) = g(rng);
  return M;
}

// QR of a standard-normal matrix with the R diagonal sign fixed, i.e. a
// Haar-distributed orthogonal factor.
inline Matrix random_orthogonal(Index n, std::mt19937_64& rng) {
  Matrix G = standard_normal_matrix(n, n, rng);
  Eigen::HouseholderQR<Matrix> qr(G);
  Matrix Q = qr.householderQ() * Matrix::Identity(n, n);
  for (Index i = 0; i < n; ++i)
    if (qr.matrixQR()(i, i) < 0.0) Q.col(i) = -Q.col(i);
  return Q;
}

}  // namespace detail

/// Seeded unit-norm standard normal vector.
inline Vector gen_unit_vector(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Vector b = detail::standard_normal_matrix(n, 1, rng);
  b.normalize();
  return b;
}

/// A = Q D Q^T with a seeded random orthogonal Q; the eigenvalues are exactly
/// the requested spectrum.
inline Matrix gen_spd(Index n, const SpectrumSpec& spec, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Vector lam = spec.sample(n, rng);
  for (Index i = 0; i < n; ++i)
    if (!(lam[i] > 0.0)) throw std::invalid_argument("gen_spd: spectrum must be positive");
  Matrix Q = detail::random_orthogonal(n, rng);
  Matrix A = Q * lam.asDiagonal() * Q.transpose();
  return ((A + A.transpose()) / 2.0).eval();
}

/// A = Q D Q^{-1} with positive eigenvalues (antistable) and a nonorthogonal
/// random Q whose condition number is controlled: Q = U S V^T with random
/// orthogonal U, V and log-uniform singular values pinned to [1, q_cond].
/// A raw Gaussian Q is rejected and regenerated when it exceeds the cap, but
/// the constructed factor always satisfies it by design.
inline Matrix gen_antistable_nonnormal(Index n, const SpectrumSpec& spec,
                                       std::uint64_t seed, double q_cond = 100.0,
                                       double q_cond_cap = 1e3) {
  if (!(q_cond >= 1.0 && q_cond <= q_cond_cap))
    throw std::invalid_argument("gen_antistable_nonnormal: need 1 <= q_cond <= cap");
  std::mt19937_64 rng(seed);
  Vector lam = spec.sample(n, rng);
  for (Index i = 0; i < n; ++i)
    if (!(lam[i] > 0.0))
      throw std::invalid_argument("gen_antistable_nonnormal: spectrum must be positive");
  if (n == 1) {
    Matrix A(1, 1);
    A << lam[0];
    return A;
  }
  for (int attempt = 0; attempt < 16; ++attempt) {
    Matrix U = detail::random_orthogonal(n, rng);
    Matrix Vt = detail::random_orthogonal(n, rng);
    std::uniform_real_distribution<double> u(0.0, std::log(q_cond));
    Vector sv(n);
    for (Index i = 0; i < n; ++i) sv[i] = std::exp(u(rng));
    std::sort(sv.data(), sv.data() + n);
    sv[0] = 1.0;
    sv[n - 1] = q_cond;
    const double cond = sv[n - 1] / sv[0];
    if (cond > q_cond_cap) continue;  // regenerate
    Matrix Q = U * sv.asDiagonal() * Vt.transpose();
    Matrix Qinv = Vt * sv.cwiseInverse().asDiagonal() * U.transpose();
    return Q * lam.asDiagonal() * Qinv;
  }
  throw std::runtime_error("gen_antistable_nonnormal: conditioning cap never met");
}

struct MultitermGenOptions {
  double dominant_a_max = 8.0;   // spectrum of A_1 in [1, dominant_a_max]
  double dominant_b_max = 4.0;   // spectrum of B_1 in [1, dominant_b_max]
  double perturbation = 0.5;     // fraction of the spd margin spent on terms >= 2
  Index verify_cap = 900;        // assemble-and-check threshold for is_spd
};

/// Multiterm operator with a dominant spd pair and symmetric indefinite
/// perturbation terms scaled so that
///   lambda_min(S_l) >= lambda_min(A_1) lambda_min(B_1) - sum ||A_j|| ||B_j|| > 0,
/// which certifies positive definiteness at any scale. Small instances are
/// additionally verified through the assembled Kronecker matrix.
inline MultitermOperator gen_multiterm_spd(Index n, Index p, int ell,
                                           std::uint64_t seed,
                                           MultitermGenOptions opts = {}) {
  if (ell < 1) throw std::invalid_argument("gen_multiterm_spd: need ell >= 1");
  std::mt19937_64 rng(seed);
  std::vector<MultitermOperator::Term> terms;
  {
    Vector la = SpectrumSpec::loguniform(1.0, opts.dominant_a_max).sample(n, rng);
    Matrix Qa = detail::random_orthogonal(n, rng);
    Matrix A1 = Qa * la.asDiagonal() * Qa.transpose();
    Vector lb = SpectrumSpec::loguniform(1.0, opts.dominant_b_max).sample(p, rng);
    Matrix Qb = detail::random_orthogonal(p, rng);
    Matrix B1 = Qb * lb.asDiagonal() * Qb.transpose();
    terms.emplace_back(((A1 + A1.transpose()) / 2.0).eval(),
                       ((B1 + B1.transpose()) / 2.0).eval());
  }
  if (ell > 1) {
    const double margin = 1.0;  // lambda_min(A_1) * lambda_min(B_1), both pinned to 1
    const double budget = opts.perturbation * margin / static_cast<double>(ell - 1);
    for (int j = 1; j < ell; ++j) {
      Matrix Ga = detail::standard_normal_matrix(n, n, rng);
      Matrix Aj = ((Ga + Ga.transpose()) / 2.0).eval();
      Matrix Gb = detail::standard_normal_matrix(p, p, rng);
      Matrix Bj = ((Gb + Gb.transpose()) / 2.0).eval();
      const double na = Aj.operatorNorm();
      const double nb = Bj.operatorNorm();
      const double s = std::sqrt(budget / (na * nb));
      terms.emplace_back(s * Aj, s * Bj);
    }
  }
  MultitermOperator op(std::move(terms));
  if (n * p <= opts.verify_cap && is_spd(op, opts.verify_cap) != OperatorKind::spd)
    throw std::runtime_error("gen_multiterm_spd: spd verification failed");
  return op;
}

}  // namespace meq
