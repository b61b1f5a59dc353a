#ifndef VRPCA_ORACLE_HPP
#define VRPCA_ORACLE_HPP

#include <cstddef>
#include <vector>

#include "vrpca/data_matrix.hpp"

namespace vrpca {

/// Ground truth from a dense eigendecomposition of A = (1/n) X X^T.
///
/// This path never touches the solvers or covariance_apply: A is formed
/// explicitly and handed to a dense symmetric eigensolver.
struct OracleResult {
  std::vector<double> eigenvalues;  // top k, non-increasing
  Basis eigenvectors;               // d x k, column j pairs with eigenvalues[j]
  double opt_objective = 0.0;       // n * sum of the top k eigenvalues
  std::vector<double> spectrum;     // all d eigenvalues, non-increasing
  std::size_t count_n = 0;

  std::size_t rank() const noexcept { return eigenvalues.size(); }
  /// s_1 - s_2 of A (0 when d == 1).
  double eigengap() const noexcept;
};

inline constexpr std::size_t kOracleMaxDim = 4000;

/// Throws DomainError when k is out of range or d exceeds kOracleMaxDim.
OracleResult oracle_compute(const DataMatrix& X, std::size_t k);

/// (1/n) X X^T as a dense column-major d x d array.
std::vector<double> materialize_covariance(const DataMatrix& X);

}  // namespace vrpca

#endif  // VRPCA_ORACLE_HPP
