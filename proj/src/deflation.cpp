#include "vrpca/deflation.hpp"

#include <algorithm>
#include <cstdio>
#include <optional>
#include <string>

#include "vrpca/errors.hpp"

namespace vrpca {

DeflationResult deflation_solve(const DataMatrix& X, const SolverConfig& cfg, std::size_t k,
                                SolverKind inner, const LevelEvaluatorFactory& evaluator_for) {
  if (k < 1 || k > X.dim()) throw DomainError("deflation_solve: need 1 <= k <= d");

  DeflationResult result;
  SolverConfig level_cfg = cfg;
  level_cfg.rank_k = 1;

  for (std::size_t j = 0; j < k; ++j) {
    level_cfg.seed = j == 0 ? cfg.seed : derive_seed(cfg.seed, j);
    const Basis init = random_init(X.dim(), 1, level_cfg.seed);

    std::optional<Basis> previous = init;
    double last_change = 0.0;
    SolveOptions options;
    options.deflation = result.pairs;
    if (evaluator_for) options.evaluator = evaluator_for(j, result.pairs);
    options.observer = [&](std::size_t, const Basis& current) {
      if (previous) {
        const double overlap = dot(previous->col(0), current.col(0));
        last_change = 1.0 - overlap * overlap;
      }
      previous = current;
    };

    SolveResult run = solve(inner, X, level_cfg, init, options);
    if (last_change > kSettleTolerance) {
      char change[32];
      std::snprintf(change, sizeof change, "%.3e", last_change);
      std::string msg = "deflation level " + std::to_string(j + 1) +
                        " did not settle (last iterate change " + change +
                        "); the eigengap at this level may be too small";
      run.trace.warnings.push_back(msg);
      result.warnings.push_back(std::move(msg));
    }

    const auto v = run.basis.col(0);
    const auto Av = covariance_apply(X, v, cfg.determinism);
    result.pairs.push_back({dot(v, Av), std::vector<double>(v.begin(), v.end())});
    result.traces.push_back(std::move(run.trace));
  }

  std::stable_sort(result.pairs.begin(), result.pairs.end(),
                   [](const DeflationPair& a, const DeflationPair& b) {
                     return a.eigenvalue > b.eigenvalue;
                   });
  return result;
}

}  // namespace vrpca
