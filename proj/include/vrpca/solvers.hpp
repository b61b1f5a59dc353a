#ifndef VRPCA_SOLVERS_HPP
#define VRPCA_SOLVERS_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vrpca/data_matrix.hpp"
#include "vrpca/linalg.hpp"
#include "vrpca/rng.hpp"

namespace vrpca {

enum class SolverKind { vrpca, oja, power, hybrid };

std::string_view to_string(SolverKind kind) noexcept;
/// Parses "vrpca", "oja", "power" or "hybrid"; throws DomainError otherwise.
SolverKind parse_solver_kind(std::string_view name);

struct SolverConfig {
  double step_eta = 0.0;         // fixed VR-PCA step
  std::size_t epoch_len_m = 0;   // stochastic iterations per VR-PCA epoch
  std::size_t epochs_T = 1;      // VR-PCA epochs, or Oja passes
  std::uint64_t seed = 0;
  std::size_t rank_k = 1;
  double oja_step_c = 1.0;       // Oja step eta_t = c / t
  std::size_t power_iters = 1;
  bool determinism = true;
  /// Run k = 1 VR-PCA epochs through the amortized sparse representation.
  bool fast_epoch = false;
};

struct TraceRecord {
  std::size_t epoch = 0;
  double effective_passes = 0.0;
  double log10_suboptimality = 0.0;  // NaN when no evaluator was supplied
  std::optional<double> alignment_sq;
  double wall_millis = 0.0;          // cumulative solver time, evaluation excluded
};

struct ConvergenceTrace {
  std::vector<TraceRecord> records;
  SolverConfig config;
  double metric_reference = 0.0;
  std::vector<std::string> warnings;
};

/// Scores iterates for the trace. Implemented by the metrics module.
class IterateEvaluator {
 public:
  virtual ~IterateEvaluator() = default;
  virtual double log10_suboptimality(const Basis& B) const = 0;
  virtual std::optional<double> alignment_sq(const Basis& B) const = 0;
  virtual double reference() const = 0;
};

/// Called after every epoch (or pass, or round) with the current iterate.
using Observer = std::function<void(std::size_t epoch, const Basis& current)>;

struct SolveOptions {
  Observer observer;
  const IterateEvaluator* evaluator = nullptr;
  /// Pairs already extracted; every x x^T w becomes the deflated product.
  std::span<const DeflationPair> deflation;
};

struct SolveResult {
  Basis basis;
  ConvergenceTrace trace;
};

/// Orthonormalized standard-normal d x k matrix (uniform on the sphere for k = 1).
Basis random_init(std::size_t d, std::size_t k, std::uint64_t seed);

/// One naive k = 1 VR-PCA iteration on data column i, in place:
/// w <- normalize(w + eta (x_i (x_i^T w - x_i^T anchor) + u_tilde)). O(d).
void vrpca_step(const DataMatrix& X, std::span<double> w, std::span<const double> anchor,
                std::span<const double> u_tilde, std::size_t i, double eta);

/// One VR-PCA epoch from `anchor`: computes the anchor product once, then
/// runs cfg.epoch_len_m stochastic iterations drawing exactly that many
/// indices from `sampler`.
Basis vrpca_epoch(const DataMatrix& X, const Basis& anchor, const SolverConfig& cfg,
                  IndexSampler& sampler, std::span<const DeflationPair> deflation = {});

SolveResult vrpca_solve(const DataMatrix& X, const SolverConfig& cfg, const Basis& init,
                        const SolveOptions& options = {});
SolveResult oja_solve(const DataMatrix& X, const SolverConfig& cfg, const Basis& init,
                      const SolveOptions& options = {});
SolveResult power_solve(const DataMatrix& X, const SolverConfig& cfg, const Basis& init,
                        const SolveOptions& options = {});
/// n Oja iterations from `init`, then VR-PCA warm-started at the result.
SolveResult hybrid_solve(const DataMatrix& X, const SolverConfig& cfg, const Basis& init,
                         const SolveOptions& options = {});

SolveResult solve(SolverKind kind, const DataMatrix& X, const SolverConfig& cfg, const Basis& init,
                  const SolveOptions& options = {});

/// Effective data passes of one VR-PCA epoch: one for the anchor product
/// plus m/n for the stochastic iterations.
double vrpca_epoch_passes(std::size_t m, std::size_t n) noexcept;

}  // namespace vrpca

#endif  // VRPCA_SOLVERS_HPP
