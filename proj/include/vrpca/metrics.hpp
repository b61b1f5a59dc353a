#ifndef VRPCA_METRICS_HPP
#define VRPCA_METRICS_HPP

#include <optional>

#include "vrpca/data_matrix.hpp"
#include "vrpca/oracle.hpp"
#include "vrpca/solvers.hpp"

namespace vrpca {

/// Argument floor of the log-suboptimality metric.
inline constexpr double kSuboptimalityFloor = 1e-16;

/// ||X^T B||_F^2, accumulated sequentially over columns.
double captured_energy(const DataMatrix& X, const Basis& B);

/// log10(max(1 - energy / reference, 1e-16)).
double log10_suboptimality(double energy, double reference);

/// log10(max(1 - ||X^T B||_F^2 / opt, 1e-16)), opt from the oracle at the
/// same rank. Throws DomainError when the oracle does not match B or X.
double suboptimality(const DataMatrix& X, const Basis& B, const OracleResult& oracle);

/// k = 1: <w, v_1>^2. k > 1: (1/k) ||V_k^T B||_F^2, which is 1 iff the spans coincide.
double alignment(const Basis& B, const OracleResult& oracle);

/// Trace evaluator backed by an oracle.
class OracleEvaluator final : public IterateEvaluator {
 public:
  OracleEvaluator(const DataMatrix& X, const OracleResult& oracle) : X_(X), oracle_(oracle) {}

  double log10_suboptimality(const Basis& B) const override {
    return suboptimality(X_, B, oracle_);
  }
  std::optional<double> alignment_sq(const Basis& B) const override {
    return alignment(B, oracle_);
  }
  double reference() const override { return oracle_.opt_objective; }

 private:
  const DataMatrix& X_;
  const OracleResult& oracle_;
};

}  // namespace vrpca

#endif  // VRPCA_METRICS_HPP
