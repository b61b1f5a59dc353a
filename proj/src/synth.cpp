#include "vrpca/synth.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "vrpca/errors.hpp"
#include "vrpca/rng.hpp"

namespace vrpca {

namespace {

constexpr std::size_t kHeadSize = 6;
constexpr double kHeadFactors[kHeadSize] = {0.0, 1.0, 1.1, 1.2, 1.3, 1.4};

// Orthonormal columns spanning a rows x cols Gaussian matrix, with the
// sign of each column fixed by diag(R) so the distribution is Haar.
Eigen::MatrixXd random_orthonormal(std::size_t rows, std::size_t cols, std::mt19937_64& engine) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd G(rows, cols);
  for (Eigen::Index c = 0; c < G.cols(); ++c) {
    for (Eigen::Index r = 0; r < G.rows(); ++r) G(r, c) = normal(engine);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(G.rows(), G.cols());
  const Eigen::MatrixXd& R = qr.matrixQR();
  for (Eigen::Index c = 0; c < Q.cols(); ++c) {
    if (R(c, c) < 0.0) Q.col(c) *= -1.0;
  }
  return Q;
}

}  // namespace

SpectrumSpec spectrum_spec(std::size_t d, std::size_t n, double lambda, std::uint64_t seed) {
  return {d, n, lambda, seed, seed};
}

std::vector<double> prescribed_singular_values(const SpectrumSpec& spec) {
  std::vector<double> diag;
  diag.reserve(spec.dim_d);
  for (std::size_t j = 0; j < std::min(kHeadSize, spec.dim_d); ++j) {
    diag.push_back(1.0 - kHeadFactors[j] * spec.gap_lambda);
  }
  auto engine = make_engine(spec.tail_seed, Stream::synth_tail);
  std::normal_distribution<double> normal;
  const double d = static_cast<double>(spec.dim_d);
  while (diag.size() < spec.dim_d) diag.push_back(std::abs(normal(engine)) / d);
  return diag;
}

void validate(const SpectrumSpec& spec) {
  if (spec.dim_d < kHeadSize) {
    throw DomainError("synthetic spectrum: d must be at least 6, got " +
                      std::to_string(spec.dim_d));
  }
  if (spec.count_n < spec.dim_d) {
    throw DomainError("synthetic spectrum: n must be at least d");
  }
  if (!(spec.gap_lambda > 0.0 && spec.gap_lambda < 0.5)) {
    throw DomainError("synthetic spectrum: lambda must lie in (0, 0.5), got " +
                      std::to_string(spec.gap_lambda));
  }
  const auto diag = prescribed_singular_values(spec);
  const double head_min = diag[kHeadSize - 1];
  for (std::size_t j = kHeadSize; j < diag.size(); ++j) {
    if (diag[j] >= head_min) {
      throw DomainError("synthetic spectrum: tail value " + std::to_string(diag[j]) +
                        " does not stay below the prescribed head; use a larger d or another seed");
    }
  }
}

DataMatrix synth_generate(const SpectrumSpec& spec) {
  validate(spec);
  const auto diag = prescribed_singular_values(spec);
  auto engine = make_engine(spec.matrix_seed, Stream::synth_matrix);
  const Eigen::MatrixXd U = random_orthonormal(spec.dim_d, spec.dim_d, engine);
  const Eigen::MatrixXd V = random_orthonormal(spec.count_n, spec.dim_d, engine);
  const Eigen::Map<const Eigen::VectorXd> D(diag.data(), static_cast<Eigen::Index>(diag.size()));

  std::vector<double> values(spec.dim_d * spec.count_n);
  Eigen::Map<Eigen::MatrixXd> X(values.data(), static_cast<Eigen::Index>(spec.dim_d),
                                static_cast<Eigen::Index>(spec.count_n));
  X.noalias() = (U * D.asDiagonal()) * V.transpose();
  return DataMatrix::dense(spec.dim_d, spec.count_n, std::move(values));
}

DataMatrix synth_sparse(std::size_t d, std::size_t n, double density, std::uint64_t seed) {
  if (d == 0 || n == 0) throw DomainError("synth_sparse: d and n must be positive");
  if (!(density > 0.0 && density <= 1.0)) {
    throw DomainError("synth_sparse: density must lie in (0, 1]");
  }
  auto engine = make_engine(seed, Stream::sparse_data);
  std::bernoulli_distribution keep(density);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<std::size_t> pick_col(0, n - 1);

  // Build as per-column (row, value) lists, then patch empty rows.
  std::vector<std::vector<std::pair<std::uint32_t, double>>> cols(n);
  std::vector<char> row_seen(d, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t r = 0; r < d; ++r) {
      if (keep(engine)) {
        cols[i].emplace_back(static_cast<std::uint32_t>(r),
                             normal(engine) / std::sqrt(1.0 + static_cast<double>(r)));
        row_seen[r] = 1;
      }
    }
  }
  for (std::size_t r = 0; r < d; ++r) {
    if (row_seen[r]) continue;
    auto& col = cols[pick_col(engine)];
    const auto entry = std::make_pair(static_cast<std::uint32_t>(r),
                                      normal(engine) / std::sqrt(1.0 + static_cast<double>(r)));
    col.insert(std::lower_bound(col.begin(), col.end(), entry), entry);
  }

  std::vector<std::size_t> ptr{0};
  std::vector<std::uint32_t> idx;
  std::vector<double> vals;
  for (const auto& col : cols) {
    for (const auto& [r, v] : col) {
      idx.push_back(r);
      vals.push_back(v);
    }
    ptr.push_back(vals.size());
  }
  return DataMatrix::sparse(d, n, std::move(ptr), std::move(idx), std::move(vals));
}

}  // namespace vrpca
