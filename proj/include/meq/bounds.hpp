#pragma once

// Closed-form convergence bounds and iteration-count estimates for the
// Galerkin and CG methods on Lyapunov and Sylvester equations with spd data,
// driven by extreme eigenvalues only.

#include <cmath>
#include <stdexcept>
#include <utility>

namespace meq {

/// Extreme spectral data for bound evaluation. The A part is mandatory; the
/// B part is set for Sylvester bounds. For symmetric matrices alpha_min (the
/// field-of-values abscissa) coincides with lambda_min.
struct SpectralSummary {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double lambda_min_b = 0.0;
  double lambda_max_b = 0.0;
  bool has_b = false;

  static SpectralSummary single(double lmin, double lmax) {
    if (!(0.0 < lmin && lmin <= lmax))
      throw std::invalid_argument("SpectralSummary: need 0 < lambda_min <= lambda_max");
    SpectralSummary s;
    s.lambda_min = lmin;
    s.lambda_max = lmax;
    return s;
  }

  static SpectralSummary pair(double lmin_a, double lmax_a, double lmin_b,
                              double lmax_b) {
    SpectralSummary s = single(lmin_a, lmax_a);
    if (!(0.0 < lmin_b && lmin_b <= lmax_b))
      throw std::invalid_argument("SpectralSummary: need 0 < lambda_min_b <= lambda_max_b");
    s.lambda_min_b = lmin_b;
    s.lambda_max_b = lmax_b;
    s.has_b = true;
    return s;
  }

  double alpha_min() const { return lambda_min; }
  double kappa() const { return lambda_max / lambda_min; }
  /// Condition number of A + lambda_min I.
  double kappa_hat() const { return (lambda_max + lambda_min) / (2.0 * lambda_min); }
  /// Condition number of A + lambda_min(B) I.
  double kappa_hat_a() const {
    require_b();
    return (lambda_max + lambda_min_b) / (lambda_min + lambda_min_b);
  }
  /// Condition number of B + lambda_min(A) I.
  double kappa_hat_b() const {
    require_b();
    return (lambda_max_b + lambda_min) / (lambda_min_b + lambda_min);
  }

 private:
  void require_b() const {
    if (!has_b) throw std::invalid_argument("SpectralSummary: B part not set");
  }
};

namespace detail {

inline double rho_of(double kappa_like) {
  const double s = std::sqrt(kappa_like);
  return (s - 1.0) / (s + 1.0);
}

// 0^0 = 1 so that k = 0 bounds stay finite when the rate vanishes.
inline double pow_rate(double rho, int k) {
  return k == 0 ? 1.0 : std::pow(rho, k);
}

}  // namespace detail

/// Absolute Lyapunov error bound, valid in both the 2-norm and the Frobenius
/// norm, for rank-one unit right-hand sides and the Krylov space K_k(A, b):
///   2 (sqrt(kh)+1) / (lambda_min sqrt(kh)) * ((sqrt(kh)-1)/(sqrt(kh)+1))^k.
inline double galerkin_lyapunov_bound(const SpectralSummary& s, int k) {
  const double kh = s.kappa_hat();
  if (kh < 1.0) throw std::invalid_argument("galerkin_lyapunov_bound: kappa_hat < 1");
  const double sk = std::sqrt(kh);
  return 2.0 * (sk + 1.0) / (s.lambda_min * sk) * detail::pow_rate(detail::rho_of(kh), k);
}

/// Relative Frobenius-error bound for the Galerkin method:
///   4 (sqrt(kh)+1) sqrt(kh) * rho_hat^k.
inline double galerkin_relative_bound(const SpectralSummary& s, int k) {
  const double kh = s.kappa_hat();
  if (kh < 1.0) throw std::invalid_argument("galerkin_relative_bound: kappa_hat < 1");
  const double sk = std::sqrt(kh);
  return 4.0 * (sk + 1.0) * sk * detail::pow_rate(detail::rho_of(kh), k);
}

/// Sylvester two-space bound with shifted condition numbers kappa_hat_A and
/// kappa_hat_B.
inline double sylvester_bound(const SpectralSummary& s, int k) {
  const double ka = s.kappa_hat_a(), kb = s.kappa_hat_b();
  const double sa = std::sqrt(ka), sb = std::sqrt(kb);
  const double term_a = (sa + 1.0) / sa * detail::pow_rate(detail::rho_of(ka), k);
  const double term_b = (sb + 1.0) / sb * detail::pow_rate(detail::rho_of(kb), k);
  return 2.0 / (s.lambda_min + s.lambda_min_b) * (term_a + term_b);
}

/// Classical CG bounds on the Kronecker system: relative energy-norm error
/// 2 rho^k and relative Frobenius error 2 sqrt(kappa) rho^k.
inline std::pair<double, double> cg_bounds(const SpectralSummary& s, int k) {
  const double kappa = s.kappa();
  const double r = detail::pow_rate(detail::rho_of(kappa), k);
  return {2.0 * r, 2.0 * std::sqrt(kappa) * r};
}

enum class BoundMethod { cg, galerkin };

/// Sufficient iteration counts k*: the smallest k whose relative bound drops
/// below eps, clamped at zero.
inline int k_star(const SpectralSummary& s, double eps, BoundMethod method) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("k_star: need eps in (0,1)");
  double level, rho;
  if (method == BoundMethod::cg) {
    const double kappa = s.kappa();
    level = eps / (2.0 * std::sqrt(kappa));
    rho = detail::rho_of(kappa);
  } else {
    const double kh = s.kappa_hat();
    const double sk = std::sqrt(kh);
    level = eps / (4.0 * sk * (sk + 1.0));
    rho = detail::rho_of(kh);
  }
  if (level >= 1.0) return 0;
  if (rho <= 0.0) return 1;  // the k >= 1 bound is identically zero
  const double k = std::log(level) / std::log(rho);
  return std::max(0, static_cast<int>(std::ceil(k)));
}

/// kappa_hat and the identity value kappa/2 + 1/2; the two agree to roundoff.
inline std::pair<double, double> kappa_hat_identity_check(const SpectralSummary& s) {
  return {s.kappa_hat(), 0.5 * s.kappa() + 0.5};
}

}  // namespace meq
