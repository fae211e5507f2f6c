#pragma once

// The multiterm linear operator S(X) = sum_j A_j X B_j, its adjoint, its
// Kronecker matrix S_l = sum_j B_j^T (x) A_j, the induced S-norm, and the
// spd classification of S_l.

#include "meq/dense.hpp"
#include "meq/matrix_market.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <utility>
#include <vector>

namespace meq {

inline constexpr Index kDefaultKroneckerCap = 20000;

class MultitermOperator {
 public:
  using Term = std::pair<Matrix, Matrix>;  // (A_j n x n, B_j p x p)

  explicit MultitermOperator(std::vector<Term> terms) : terms_(std::move(terms)) {
    if (terms_.empty())
      throw std::invalid_argument("MultitermOperator: at least one term required");
    const Index n = terms_[0].first.rows();
    const Index p = terms_[0].second.rows();
    for (const Term& t : terms_) {
      if (t.first.rows() != n || t.first.cols() != n)
        throw std::invalid_argument("MultitermOperator: all A_j must be n x n");
      if (t.second.rows() != p || t.second.cols() != p)
        throw std::invalid_argument("MultitermOperator: all B_j must be p x p");
    }
  }

  /// Lyapunov operator X -> A X + X A^T as the two-term pair {(A, I), (I, A^T)}.
  static MultitermOperator lyapunov(const Matrix& A) {
    const Index n = A.rows();
    std::vector<Term> t;
    t.emplace_back(A, Matrix::Identity(n, n));
    t.emplace_back(Matrix::Identity(n, n), A.transpose());
    return MultitermOperator(std::move(t));
  }

  /// Sylvester operator X -> A X + X B as {(A, I_p), (I_n, B)}.
  static MultitermOperator sylvester(const Matrix& A, const Matrix& B) {
    std::vector<Term> t;
    t.emplace_back(A, Matrix::Identity(B.rows(), B.rows()));
    t.emplace_back(Matrix::Identity(A.rows(), A.rows()), B);
    return MultitermOperator(std::move(t));
  }

  Index rows() const { return terms_[0].first.rows(); }
  Index cols() const { return terms_[0].second.rows(); }
  int num_terms() const { return static_cast<int>(terms_.size()); }
  const Matrix& A(int j) const { return terms_[j].first; }
  const Matrix& B(int j) const { return terms_[j].second; }

  Matrix apply(const Matrix& X) const {
    check_shape(X);
    Matrix Y = Matrix::Zero(rows(), cols());
    for (const Term& t : terms_) Y.noalias() += t.first * X * t.second;
    return Y;
  }

  /// Adjoint S*(X) = sum_j A_j^T X B_j^T in the Frobenius inner product.
  Matrix apply_adjoint(const Matrix& X) const {
    check_shape(X);
    Matrix Y = Matrix::Zero(rows(), cols());
    for (const Term& t : terms_)
      Y.noalias() += t.first.transpose() * X * t.second.transpose();
    return Y;
  }

  /// S_l = sum_j B_j^T (x) A_j, for oracle and diagnostic use at desk scale.
  Matrix assemble_kronecker(Index cap = kDefaultKroneckerCap) const {
    const Index np = rows() * cols();
    if (np > cap)
      throw std::invalid_argument("assemble_kronecker: n*p exceeds cap");
    Matrix S = Matrix::Zero(np, np);
    for (const Term& t : terms_) S += kron(t.second.transpose(), t.first);
    return S;
  }

  /// ||X||_S = sqrt(trace(sum_j X^T A_j X B_j)) = sqrt(<X, S(X)>_F).
  /// Only meaningful for spd S; a significantly negative quadratic form
  /// signals a non-spd operator and throws.
  double s_norm(const Matrix& X) const {
    const double q = vec(X).dot(vec(apply(X)));
    const double xf2 = X.squaredNorm();
    if (q < -1e-12 * xf2)
      throw std::runtime_error("s_norm: quadratic form negative; operator not spd");
    return std::sqrt(std::max(0.0, q));
  }

 private:
  void check_shape(const Matrix& X) const {
    if (X.rows() != rows() || X.cols() != cols())
      throw std::invalid_argument("MultitermOperator: operand shape mismatch");
  }

  std::vector<Term> terms_;
};

enum class OperatorKind { spd, symmetric_indefinite, nonsymmetric };

inline const char* to_string(OperatorKind k) {
  switch (k) {
    case OperatorKind::spd: return "spd";
    case OperatorKind::symmetric_indefinite: return "symmetric-indefinite";
    case OperatorKind::nonsymmetric: return "nonsymmetric";
  }
  return "?";
}

/// Classify S_l as spd / symmetric-indefinite / nonsymmetric by assembling the
/// Kronecker matrix; only valid within the cap. At larger scales callers must
/// assert definiteness themselves.
inline OperatorKind is_spd(const MultitermOperator& op, Index cap = kDefaultKroneckerCap,
                           double sym_rel_tol = 1e-12, double pd_rel_tol = 1e-12) {
  Matrix S = op.assemble_kronecker(cap);
  if (!is_symmetric(S, sym_rel_tol)) return OperatorKind::nonsymmetric;
  Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("is_spd: eigensolver did not converge");
  const double lmin = es.eigenvalues().minCoeff();
  const double lmax_abs = es.eigenvalues().cwiseAbs().maxCoeff();
  return lmin > pd_rel_tol * lmax_abs ? OperatorKind::spd
                                      : OperatorKind::symmetric_indefinite;
}

/// Write the operator as a JSON manifest plus one MatrixMarket file per
/// coefficient. Returns the manifest path.
inline std::string save_operator_manifest(const MultitermOperator& op,
                                          const std::string& dir,
                                          const std::string& name) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  nlohmann::json j;
  j["name"] = name;
  j["n"] = op.rows();
  j["p"] = op.cols();
  j["terms"] = nlohmann::json::array();
  for (int t = 0; t < op.num_terms(); ++t) {
    const std::string af = name + "_A" + std::to_string(t + 1) + ".mtx";
    const std::string bf = name + "_B" + std::to_string(t + 1) + ".mtx";
    write_matrix_market((fs::path(dir) / af).string(), op.A(t));
    write_matrix_market((fs::path(dir) / bf).string(), op.B(t));
    j["terms"].push_back({{"A", af}, {"B", bf}});
  }
  const std::string manifest = (fs::path(dir) / (name + ".json")).string();
  std::ofstream out(manifest);
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error("save_operator_manifest: write failed");
  return manifest;
}

inline MultitermOperator load_operator_manifest(const std::string& manifest_path) {
  namespace fs = std::filesystem;
  std::ifstream in(manifest_path);
  if (!in)
    throw std::runtime_error("load_operator_manifest: cannot open " + manifest_path);
  nlohmann::json j = nlohmann::json::parse(in);
  const fs::path dir = fs::path(manifest_path).parent_path();
  std::vector<MultitermOperator::Term> terms;
  for (const auto& t : j.at("terms")) {
    Matrix A = read_matrix_market((dir / t.at("A").get<std::string>()).string());
    Matrix B = read_matrix_market((dir / t.at("B").get<std::string>()).string());
    terms.emplace_back(std::move(A), std::move(B));
  }
  return MultitermOperator(std::move(terms));
}

}  // namespace meq
