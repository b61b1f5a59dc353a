#include "vrpca/linalg.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <string>

#include "vrpca/errors.hpp"

namespace vrpca {

namespace {

// Number of fixed reduction chunks for the deterministic path.
constexpr std::size_t kMaxChunks = 64;
constexpr std::size_t kMinChunkColumns = 256;

void check_shape(const DataMatrix& X, const Matrix& B) {
  if (B.rows() != X.dim()) {
    throw ShapeError("covariance_apply: input has " + std::to_string(B.rows()) +
                     " rows, data dimension is " + std::to_string(X.dim()));
  }
  if (B.cols() == 0) throw ShapeError("covariance_apply: input has no columns");
}

// acc += sum_{i in [begin, end)} x_i (x_i^T B)
void accumulate_range(const DataMatrix& X, const Matrix& B, std::size_t begin, std::size_t end,
                      Matrix& acc, std::vector<double>& proj) {
  const std::size_t k = B.cols();
  for (std::size_t i = begin; i < end; ++i) {
    const ColumnView x = X.column(i);
    for (std::size_t c = 0; c < k; ++c) proj[c] = x.dot(B.col(c));
    for (std::size_t c = 0; c < k; ++c) x.axpy(proj[c], acc.col(c));
  }
}

void scale(Matrix& M, double s) {
  for (double& v : M.data()) v *= s;
}

void add_into(Matrix& dst, const Matrix& src) {
  auto d = dst.data();
  auto s = src.data();
  for (std::size_t j = 0; j < d.size(); ++j) d[j] += s[j];
}

}  // namespace

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
  return s;
}

double squared_norm(std::span<const double> a) noexcept { return dot(a, a); }

void axpy(double a, std::span<const double> x, std::span<double> y) noexcept {
  for (std::size_t j = 0; j < x.size(); ++j) y[j] += a * x[j];
}

void normalize(std::span<double> v) {
  const double nrm = std::sqrt(squared_norm(v));
  if (!(nrm > 0.0) || !std::isfinite(nrm)) {
    throw DegenerateIterateError("normalize: iterate has zero or non-finite norm");
  }
  for (double& x : v) x /= nrm;
}

void set_num_threads(int threads) {
  if (threads > 0) omp_set_num_threads(threads);
}

int num_threads() { return omp_get_max_threads(); }

Matrix covariance_apply_serial(const DataMatrix& X, const Matrix& B) {
  check_shape(X, B);
  Matrix acc(X.dim(), B.cols());
  std::vector<double> proj(B.cols());
  accumulate_range(X, B, 0, X.count(), acc, proj);
  scale(acc, 1.0 / static_cast<double>(X.count()));
  return acc;
}

Matrix covariance_apply(const DataMatrix& X, const Matrix& B, bool deterministic) {
  check_shape(X, B);
  const std::size_t n = X.count();
  const std::size_t d = X.dim();
  const std::size_t k = B.cols();
  Matrix acc(d, k);

  if (deterministic) {
    const std::size_t chunks = std::clamp<std::size_t>(n / kMinChunkColumns, 1, kMaxChunks);
    if (chunks == 1) return covariance_apply_serial(X, B);
    std::vector<Matrix> partial(chunks, Matrix(d, k));
#pragma omp parallel
    {
      std::vector<double> proj(k);
#pragma omp for schedule(static)
      for (std::size_t c = 0; c < chunks; ++c) {
        const std::size_t begin = n * c / chunks;
        const std::size_t end = n * (c + 1) / chunks;
        accumulate_range(X, B, begin, end, partial[c], proj);
      }
    }
    for (const Matrix& p : partial) add_into(acc, p);
  } else {
#pragma omp parallel
    {
      Matrix local(d, k);
      std::vector<double> proj(k);
#pragma omp for schedule(dynamic, 64) nowait
      for (std::size_t i = 0; i < n; ++i) accumulate_range(X, B, i, i + 1, local, proj);
#pragma omp critical(vrpca_covariance_reduce)
      add_into(acc, local);
    }
  }
  scale(acc, 1.0 / static_cast<double>(n));
  return acc;
}

Matrix covariance_apply(const DataMatrix& X, const Basis& B, bool deterministic) {
  return covariance_apply(X, B.matrix(), deterministic);
}

std::vector<double> covariance_apply(const DataMatrix& X, std::span<const double> w,
                                     bool deterministic) {
  Matrix out = covariance_apply(X, Matrix::column_vector(w), deterministic);
  auto v = out.data();
  return {v.begin(), v.end()};
}

Basis gram_schmidt(Matrix M) {
  const std::size_t d = M.rows();
  const std::size_t k = M.cols();
  if (k == 0 || d == 0) throw ShapeError("gram_schmidt: empty input");
  if (k > d) {
    throw ShapeError("gram_schmidt: " + std::to_string(k) + " columns exceed dimension " +
                     std::to_string(d));
  }
  const int sweeps = k > 1 ? 2 : 1;
  for (std::size_t c = 0; c < k; ++c) {
    auto q = M.col(c);
    for (int s = 0; s < sweeps; ++s) {
      for (std::size_t p = 0; p < c; ++p) {
        const auto prev = M.col(p);
        axpy(-dot(prev, q), prev, q);
      }
    }
    const double nrm = std::sqrt(squared_norm(q));
    if (!(nrm >= kRankTolerance)) {
      throw RankDeficiencyError("gram_schmidt: column " + std::to_string(c) +
                                " has residual norm " + std::to_string(nrm) +
                                " after projection");
    }
    for (double& v : q) v /= nrm;
  }
  return unchecked_basis(std::move(M));
}

std::vector<double> deflated_apply(const ColumnView& x, std::span<const double> w,
                                   std::span<const DeflationPair> deflation) {
  std::vector<double> out(w.size(), 0.0);
  x.axpy(x.dot(w), out);
  for (const auto& pair : deflation) {
    axpy(-pair.eigenvalue * dot(pair.vector, w), pair.vector, out);
  }
  return out;
}

std::vector<double> deflated_apply(std::span<const double> x, std::span<const double> w,
                                   std::span<const DeflationPair> deflation) {
  if (x.size() != w.size()) throw ShapeError("deflated_apply: x and w differ in length");
  for (const auto& pair : deflation) {
    if (pair.vector.size() != w.size()) {
      throw ShapeError("deflated_apply: deflation vector has wrong length");
    }
  }
  return deflated_apply(ColumnView{x, {}}, w, deflation);
}

void subtract_deflation(Matrix& B, const Matrix& input, std::span<const DeflationPair> deflation) {
  for (std::size_t c = 0; c < B.cols(); ++c) {
    for (const auto& pair : deflation) {
      axpy(-pair.eigenvalue * dot(pair.vector, input.col(c)), pair.vector, B.col(c));
    }
  }
}

Matrix deflated_covariance_apply(const DataMatrix& X, const Matrix& B,
                                 std::span<const DeflationPair> deflation, bool deterministic) {
  Matrix out = covariance_apply(X, B, deterministic);
  subtract_deflation(out, B, deflation);
  return out;
}

}  // namespace vrpca
