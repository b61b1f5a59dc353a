#include "vrpca/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vrpca/errors.hpp"
#include "vrpca/linalg.hpp"

namespace vrpca {

double captured_energy(const DataMatrix& X, const Basis& B) {
  if (B.dim() != X.dim()) throw ShapeError("captured_energy: basis dimension differs from d");
  double total = 0.0;
  for (std::size_t i = 0; i < X.count(); ++i) {
    const ColumnView x = X.column(i);
    for (std::size_t c = 0; c < B.rank(); ++c) {
      const double p = x.dot(B.col(c));
      total += p * p;
    }
  }
  return total;
}

double log10_suboptimality(double energy, double reference) {
  if (!(reference > 0.0)) throw DomainError("suboptimality: reference objective must be > 0");
  return std::log10(std::max(1.0 - energy / reference, kSuboptimalityFloor));
}

double suboptimality(const DataMatrix& X, const Basis& B, const OracleResult& oracle) {
  if (B.rank() != oracle.rank() || B.dim() != oracle.eigenvectors.dim() ||
      oracle.count_n != X.count()) {
    throw DomainError("suboptimality: oracle computed for a different matrix or rank");
  }
  return log10_suboptimality(captured_energy(X, B), oracle.opt_objective);
}

double alignment(const Basis& B, const OracleResult& oracle) {
  if (B.rank() != oracle.rank() || B.dim() != oracle.eigenvectors.dim()) {
    throw DomainError("alignment: rank or dimension differs from the oracle");
  }
  double total = 0.0;
  for (std::size_t j = 0; j < oracle.rank(); ++j) {
    for (std::size_t c = 0; c < B.rank(); ++c) {
      const double p = dot(oracle.eigenvectors.col(j), B.col(c));
      total += p * p;
    }
  }
  return std::clamp(total / static_cast<double>(B.rank()), 0.0, 1.0);
}

}  // namespace vrpca
