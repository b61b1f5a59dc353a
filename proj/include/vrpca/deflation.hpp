#ifndef VRPCA_DEFLATION_HPP
#define VRPCA_DEFLATION_HPP

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "vrpca/data_matrix.hpp"
#include "vrpca/linalg.hpp"
#include "vrpca/solvers.hpp"

namespace vrpca {

struct DeflationResult {
  /// (eigenvalue, eigenvector) pairs, eigenvalues non-increasing.
  std::vector<DeflationPair> pairs;
  /// One trace per extracted vector, in extraction order.
  std::vector<ConvergenceTrace> traces;
  /// Levels whose iterates had not settled when the solver stopped.
  std::vector<std::string> warnings;
};

/// Successive iterate change 1 - <w_s, w_{s-1}>^2 above which a level is
/// reported as not settled.
inline constexpr double kSettleTolerance = 1e-8;

/// Optional per-level trace evaluator. Receives the 0-based level and the
/// pairs extracted so far, in extraction order; may return nullptr.
using LevelEvaluatorFactory =
    std::function<const IterateEvaluator*(std::size_t level, std::span<const DeflationPair> found)>;

/// Extracts the top k eigenpairs one at a time. Level j runs the k = 1
/// solver `inner` with every x x^T w replaced by the product deflated by the
/// j - 1 pairs already found, then takes the Rayleigh quotient v^T A v as
/// the eigenvalue. Level 0 starts from random_init(d, 1, cfg.seed) with
/// cfg.seed; later levels use seeds derived from cfg.seed.
DeflationResult deflation_solve(const DataMatrix& X, const SolverConfig& cfg, std::size_t k,
                                SolverKind inner, const LevelEvaluatorFactory& evaluator_for = {});

}  // namespace vrpca

#endif  // VRPCA_DEFLATION_HPP
