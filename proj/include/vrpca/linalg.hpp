#ifndef VRPCA_LINALG_HPP
#define VRPCA_LINALG_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "vrpca/data_matrix.hpp"

namespace vrpca {

// Small dense helpers.
double dot(std::span<const double> a, std::span<const double> b) noexcept;
double squared_norm(std::span<const double> a) noexcept;
/// y += a * x
void axpy(double a, std::span<const double> x, std::span<double> y) noexcept;
/// Scales `v` to unit length; throws DegenerateIterateError on a zero vector.
void normalize(std::span<double> v);

/// Set the OpenMP thread count used by the parallel kernels (0 = runtime default).
void set_num_threads(int threads);
int num_threads();

/// A * B with A = (1/n) X X^T, computed column by column without forming A.
///
/// Parallel over data columns. With `deterministic` set, the columns are cut
/// into a fixed number of contiguous chunks (independent of the thread count)
/// whose partial sums are added in chunk order, so the result is
/// bit-reproducible. Otherwise per-thread partials are combined in whatever
/// order threads finish.
Matrix covariance_apply(const DataMatrix& X, const Matrix& B, bool deterministic = true);
Matrix covariance_apply(const DataMatrix& X, const Basis& B, bool deterministic = true);
std::vector<double> covariance_apply(const DataMatrix& X, std::span<const double> w,
                                     bool deterministic = true);

/// Single-threaded reference for covariance_apply: one sequential pass over
/// the columns. Kept for tests and the benchmark.
Matrix covariance_apply_serial(const DataMatrix& X, const Matrix& B);

/// Orthonormalizes the columns of M with modified Gram-Schmidt, plus one
/// re-orthogonalization sweep when k > 1. Column order is preserved, so a
/// nearly orthonormal M comes back nearly unchanged. Throws
/// RankDeficiencyError when a residual norm drops below 1e-12.
Basis gram_schmidt(Matrix M);

inline constexpr double kRankTolerance = 1e-12;

/// One (eigenvalue, unit eigenvector) pair removed from the covariance.
struct DeflationPair {
  double eigenvalue = 0.0;
  std::vector<double> vector;
};

/// x (x^T w) - sum_l s_l v_l (v_l^T w)
std::vector<double> deflated_apply(const ColumnView& x, std::span<const double> w,
                                   std::span<const DeflationPair> deflation);
std::vector<double> deflated_apply(std::span<const double> x, std::span<const double> w,
                                   std::span<const DeflationPair> deflation);

/// B <- B - sum_l s_l v_l (v_l^T B), column by column.
void subtract_deflation(Matrix& B, const Matrix& input, std::span<const DeflationPair> deflation);

/// (A - sum_l s_l v_l v_l^T) B
Matrix deflated_covariance_apply(const DataMatrix& X, const Matrix& B,
                                 std::span<const DeflationPair> deflation,
                                 bool deterministic = true);

}  // namespace vrpca

#endif  // VRPCA_LINALG_HPP
