#include "vrpca/data_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "vrpca/errors.hpp"

namespace vrpca {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
  if (data_.size() != rows_ * cols_) {
    throw ShapeError("Matrix: expected " + std::to_string(rows_ * cols_) + " values, got " +
                     std::to_string(data_.size()));
  }
}

Matrix Matrix::column_vector(std::span<const double> v) {
  return Matrix(v.size(), 1, std::vector<double>(v.begin(), v.end()));
}

Matrix Matrix::operator-() const {
  Matrix out = *this;
  for (double& x : out.data_) x = -x;
  return out;
}

DataMatrix DataMatrix::dense(std::size_t d, std::size_t n, std::vector<double> values) {
  if (d == 0 || n == 0) throw ShapeError("DataMatrix: d and n must be positive");
  if (values.size() != d * n) {
    throw ShapeError("DataMatrix: expected d*n = " + std::to_string(d * n) + " values, got " +
                     std::to_string(values.size()));
  }
  DataMatrix X;
  X.d_ = d;
  X.n_ = n;
  X.sparse_ = false;
  X.values_ = std::move(values);
  X.cache_norms();
  return X;
}

DataMatrix DataMatrix::sparse(std::size_t d, std::size_t n, std::vector<std::size_t> col_ptr,
                              std::vector<std::uint32_t> row_idx, std::vector<double> values) {
  if (d == 0 || n == 0) throw ShapeError("DataMatrix: d and n must be positive");
  if (col_ptr.size() != n + 1 || col_ptr.front() != 0 || col_ptr.back() != values.size() ||
      row_idx.size() != values.size()) {
    throw ShapeError("DataMatrix: inconsistent CSC arrays");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (col_ptr[i] > col_ptr[i + 1]) throw ShapeError("DataMatrix: col_ptr not monotone");
    for (std::size_t p = col_ptr[i]; p < col_ptr[i + 1]; ++p) {
      if (row_idx[p] >= d) {
        throw ShapeError("DataMatrix: row index " + std::to_string(row_idx[p]) +
                         " out of range in column " + std::to_string(i));
      }
      if (p > col_ptr[i] && row_idx[p] <= row_idx[p - 1]) {
        throw ShapeError("DataMatrix: row indices of column " + std::to_string(i) +
                         " are not strictly increasing");
      }
    }
  }
  DataMatrix X;
  X.d_ = d;
  X.n_ = n;
  X.sparse_ = true;
  X.col_ptr_ = std::move(col_ptr);
  X.row_idx_ = std::move(row_idx);
  X.values_ = std::move(values);
  X.cache_norms();
  return X;
}

void DataMatrix::cache_norms() {
  sq_norms_.assign(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    double s = 0.0;
    for (double v : column(i).values) s += v * v;
    sq_norms_[i] = s;
  }
}

double DataMatrix::max_squared_norm() const noexcept {
  return *std::max_element(sq_norms_.begin(), sq_norms_.end());
}

double DataMatrix::mean_squared_norm() const noexcept {
  return std::accumulate(sq_norms_.begin(), sq_norms_.end(), 0.0) / static_cast<double>(n_);
}

double DataMatrix::average_nnz() const noexcept {
  return static_cast<double>(values_.size()) / static_cast<double>(n_);
}

DataMatrix DataMatrix::to_sparse() const {
  if (sparse_) return *this;
  std::vector<std::size_t> ptr{0};
  std::vector<std::uint32_t> idx;
  std::vector<double> vals;
  ptr.reserve(n_ + 1);
  for (std::size_t i = 0; i < n_; ++i) {
    const auto col = column(i);
    for (std::size_t r = 0; r < d_; ++r) {
      if (col.values[r] != 0.0) {
        idx.push_back(static_cast<std::uint32_t>(r));
        vals.push_back(col.values[r]);
      }
    }
    ptr.push_back(vals.size());
  }
  return sparse(d_, n_, std::move(ptr), std::move(idx), std::move(vals));
}

DataMatrix DataMatrix::to_dense() const {
  if (!sparse_) return *this;
  return dense(d_, n_, dense_values());
}

std::vector<double> DataMatrix::dense_values() const {
  if (!sparse_) return values_;
  std::vector<double> out(d_ * n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    column(i).for_each_nonzero([&](std::size_t r, double v) { out[i * d_ + r] = v; });
  }
  return out;
}

bool DataMatrix::has_zero_rows() const {
  std::vector<char> seen(d_, 0);
  for (std::size_t i = 0; i < n_; ++i) {
    column(i).for_each_nonzero([&](std::size_t r, double v) {
      if (v != 0.0) seen[r] = 1;
    });
  }
  return std::find(seen.begin(), seen.end(), 0) != seen.end();
}

Basis Basis::from_orthonormal(Matrix m, double tol) {
  if (m.rows() == 0 || m.cols() == 0 || m.cols() > m.rows()) {
    throw ShapeError("Basis: need 1 <= k <= d");
  }
  Basis b(std::move(m));
  const double err = b.orthonormality_error();
  if (!(err <= tol)) {
    throw DomainError("Basis: columns are not orthonormal (max deviation " + std::to_string(err) +
                      ")");
  }
  return b;
}

Basis Basis::from_unit_vector(std::span<const double> v, double tol) {
  return from_orthonormal(Matrix::column_vector(v), tol);
}

Basis Basis::canonical(std::size_t d, std::size_t k) {
  if (d == 0 || k == 0 || k > d) throw ShapeError("Basis: need 1 <= k <= d");
  Matrix m(d, k);
  for (std::size_t j = 0; j < k; ++j) m(j, j) = 1.0;
  return Basis(std::move(m));
}

double Basis::orthonormality_error() const {
  double worst = 0.0;
  for (std::size_t p = 0; p < m_.cols(); ++p) {
    for (std::size_t q = p; q < m_.cols(); ++q) {
      const auto a = m_.col(p);
      const auto b = m_.col(q);
      double s = 0.0;
      for (std::size_t r = 0; r < m_.rows(); ++r) s += a[r] * b[r];
      worst = std::max(worst, std::abs(s - (p == q ? 1.0 : 0.0)));
    }
  }
  return worst;
}

Basis unchecked_basis(Matrix m) { return Basis(std::move(m)); }

}  // namespace vrpca
