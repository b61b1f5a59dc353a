#include "vrpca/oracle.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "vrpca/errors.hpp"

namespace vrpca {

double OracleResult::eigengap() const noexcept {
  return spectrum.size() < 2 ? 0.0 : spectrum[0] - spectrum[1];
}

std::vector<double> materialize_covariance(const DataMatrix& X) {
  const auto d = static_cast<Eigen::Index>(X.dim());
  std::vector<double> out(X.dim() * X.dim(), 0.0);
  Eigen::Map<Eigen::MatrixXd> A(out.data(), d, d);
  if (X.is_sparse()) {
    for (std::size_t i = 0; i < X.count(); ++i) {
      const ColumnView x = X.column(i);
      for (std::size_t a = 0; a < x.nnz(); ++a) {
        for (std::size_t b = 0; b < x.nnz(); ++b) {
          A(x.indices[a], x.indices[b]) += x.values[a] * x.values[b];
        }
      }
    }
  } else {
    const auto values = X.dense_values();
    Eigen::Map<const Eigen::MatrixXd> M(values.data(), d, static_cast<Eigen::Index>(X.count()));
    A.noalias() = M * M.transpose();
  }
  A /= static_cast<double>(X.count());
  return out;
}

OracleResult oracle_compute(const DataMatrix& X, std::size_t k) {
  if (k < 1 || k > X.dim()) {
    throw DomainError("oracle: k must lie in [1, d], got " + std::to_string(k));
  }
  if (X.dim() > kOracleMaxDim) {
    throw DomainError("oracle: d = " + std::to_string(X.dim()) + " exceeds the dense limit " +
                      std::to_string(kOracleMaxDim) + "; skip the oracle for inputs this large");
  }
  const auto d = static_cast<Eigen::Index>(X.dim());
  auto a_values = materialize_covariance(X);
  Eigen::Map<const Eigen::MatrixXd> A(a_values.data(), d, d);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(A);
  if (eig.info() != Eigen::Success) throw DomainError("oracle: eigensolver did not converge");

  // Eigen returns ascending eigenvalues.
  const Eigen::VectorXd& vals = eig.eigenvalues();
  const Eigen::MatrixXd& vecs = eig.eigenvectors();

  std::vector<double> spectrum(X.dim());
  for (Eigen::Index j = 0; j < d; ++j) spectrum[j] = vals(d - 1 - j);
  std::vector<double> top_values;

  Matrix V(X.dim(), k);
  for (std::size_t j = 0; j < k; ++j) {
    const Eigen::Index src = d - 1 - static_cast<Eigen::Index>(j);
    top_values.push_back(vals(src));
    // Sign convention: largest-magnitude entry positive.
    Eigen::Index arg = 0;
    vecs.col(src).cwiseAbs().maxCoeff(&arg);
    const double sign = vecs(arg, src) < 0.0 ? -1.0 : 1.0;
    for (Eigen::Index r = 0; r < d; ++r) V(r, j) = sign * vecs(r, src);
  }
  double top = 0.0;
  for (double s : top_values) top += s;
  return OracleResult{std::move(top_values), Basis::from_orthonormal(std::move(V), 1e-10),
                      static_cast<double>(X.count()) * top, std::move(spectrum), X.count()};
}

}  // namespace vrpca
