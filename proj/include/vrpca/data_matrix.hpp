#ifndef VRPCA_DATA_MATRIX_HPP
#define VRPCA_DATA_MATRIX_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace vrpca {

/// Dense column-major real matrix. Used for d x k iterates and small helpers.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  /// Single-column matrix holding a copy of `v`.
  static Matrix column_vector(std::span<const double> v);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[c * rows_ + r]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[c * rows_ + r]; }

  std::span<double> col(std::size_t c) { return {data_.data() + c * rows_, rows_}; }
  std::span<const double> col(std::size_t c) const { return {data_.data() + c * rows_, rows_}; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  Matrix operator-() const;
  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Read-only view of one data column, dense or sparse.
///
/// For a sparse column `indices` holds the strictly increasing row indices of
/// the stored values; for a dense column `indices` is empty and `values` has
/// length d.
struct ColumnView {
  std::span<const double> values;
  std::span<const std::uint32_t> indices;

  bool is_sparse() const noexcept { return !indices.empty() || values.empty(); }
  std::size_t nnz() const noexcept { return values.size(); }

  /// <x, w> for a dense d-vector w.
  double dot(std::span<const double> w) const noexcept {
    double s = 0.0;
    if (is_sparse()) {
      for (std::size_t j = 0; j < values.size(); ++j) s += values[j] * w[indices[j]];
    } else {
      for (std::size_t j = 0; j < values.size(); ++j) s += values[j] * w[j];
    }
    return s;
  }

  /// y += a * x
  void axpy(double a, std::span<double> y) const noexcept {
    if (is_sparse()) {
      for (std::size_t j = 0; j < values.size(); ++j) y[indices[j]] += a * values[j];
    } else {
      for (std::size_t j = 0; j < values.size(); ++j) y[j] += a * values[j];
    }
  }

  template <class F>
  void for_each_nonzero(F&& f) const {
    if (is_sparse()) {
      for (std::size_t j = 0; j < values.size(); ++j) f(std::size_t{indices[j]}, values[j]);
    } else {
      for (std::size_t j = 0; j < values.size(); ++j) f(j, values[j]);
    }
  }
};

/// The d x n data matrix X, one instance per column.
///
/// Storage is either dense column-major or compressed sparse column (CSC).
/// Squared column norms are cached at construction; r = max ||x_i||^2 and
/// r_bar = mean ||x_i||^2 are derived from them. Immutable after construction.
class DataMatrix {
 public:
  /// Dense d x n matrix from column-major values.
  static DataMatrix dense(std::size_t d, std::size_t n, std::vector<double> values);

  /// Sparse matrix from CSC arrays. `col_ptr` has n + 1 entries.
  static DataMatrix sparse(std::size_t d, std::size_t n, std::vector<std::size_t> col_ptr,
                           std::vector<std::uint32_t> row_idx, std::vector<double> values);

  std::size_t dim() const noexcept { return d_; }
  std::size_t count() const noexcept { return n_; }
  bool is_sparse() const noexcept { return sparse_; }

  ColumnView column(std::size_t i) const noexcept {
    if (sparse_) {
      const auto begin = col_ptr_[i];
      const auto len = col_ptr_[i + 1] - begin;
      return {std::span<const double>(values_).subspan(begin, len),
              std::span<const std::uint32_t>(row_idx_).subspan(begin, len)};
    }
    return {std::span<const double>(values_).subspan(i * d_, d_), {}};
  }

  std::span<const double> squared_norms() const noexcept { return sq_norms_; }
  double max_squared_norm() const noexcept;   // r
  double mean_squared_norm() const noexcept;  // r_bar
  /// Average number of stored entries per column (d for dense storage).
  double average_nnz() const noexcept;
  std::size_t nnz() const noexcept { return values_.size(); }

  /// Same matrix in the other storage layout (explicit zeros are dropped
  /// when converting to sparse).
  DataMatrix to_sparse() const;
  DataMatrix to_dense() const;

  /// Dense column-major copy of the full matrix.
  std::vector<double> dense_values() const;

  /// True if some row of X has no nonzero entry.
  bool has_zero_rows() const;

 private:
  DataMatrix() = default;
  void cache_norms();

  std::size_t d_ = 0;
  std::size_t n_ = 0;
  bool sparse_ = false;
  std::vector<std::size_t> col_ptr_;
  std::vector<std::uint32_t> row_idx_;
  std::vector<double> values_;
  std::vector<double> sq_norms_;
};

/// d x k matrix with orthonormal columns (k = 1 is a unit vector).
class Basis {
 public:
  /// Wraps `m` after checking max |(M^T M - I)_pq| <= tol.
  static Basis from_orthonormal(Matrix m, double tol = 1e-10);
  /// Wraps a single vector after checking | ||v|| - 1 | <= tol.
  static Basis from_unit_vector(std::span<const double> v, double tol = 1e-10);
  /// Columns e_0 .. e_{k-1} of R^d.
  static Basis canonical(std::size_t d, std::size_t k);

  std::size_t dim() const noexcept { return m_.rows(); }
  std::size_t rank() const noexcept { return m_.cols(); }
  const Matrix& matrix() const noexcept { return m_; }
  std::span<const double> col(std::size_t c) const { return m_.col(c); }

  /// max |(B^T B - I)_pq|
  double orthonormality_error() const;

  Basis operator-() const { return Basis(-m_); }
  bool operator==(const Basis&) const = default;

 private:
  friend Basis unchecked_basis(Matrix m);
  explicit Basis(Matrix m) : m_(std::move(m)) {}
  Matrix m_;
};

/// Wraps a matrix the caller has just orthonormalized, without re-checking.
Basis unchecked_basis(Matrix m);

}  // namespace vrpca

#endif  // VRPCA_DATA_MATRIX_HPP
