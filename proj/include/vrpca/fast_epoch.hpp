#ifndef VRPCA_FAST_EPOCH_HPP
#define VRPCA_FAST_EPOCH_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "vrpca/data_matrix.hpp"
#include "vrpca/rng.hpp"
#include "vrpca/solvers.hpp"

namespace vrpca {

/// Amortized representation of the k = 1 VR-PCA inner loop.
///
/// The iterate is never stored explicitly: w = alpha * g + beta * u_tilde,
/// where u_tilde = A * anchor is fixed for the epoch. The cached scalars are
///   gamma = ||alpha g||^2,  delta = <alpha g, u_tilde>,  zeta = ||u_tilde||^2,
/// so ||w||^2 = gamma + 2 beta delta + beta^2 zeta. Each stochastic update
/// touches only the support of the sampled column; normalization is O(1).
struct EpochState {
  std::vector<double> g;
  std::vector<double> u_tilde;
  std::vector<double> w_anchor;
  double alpha = 1.0;
  double beta = 0.0;
  double gamma = 0.0;
  double delta = 0.0;
  double zeta = 0.0;

  std::size_t dim() const noexcept { return g.size(); }
  /// ||alpha g + beta u_tilde||^2 from the cached scalars.
  double represented_squared_norm() const noexcept {
    return gamma + 2.0 * beta * delta + beta * beta * zeta;
  }
};

/// Instrumentation for the amortized-cost contract.
struct FastEpochCounters {
  std::uint64_t updates = 0;
  std::uint64_t entry_touches = 0;  // vector entries read or written by fast_update
  std::uint64_t rebases = 0;
  std::uint64_t drift_checks = 0;
};

/// g = anchor, alpha = 1, beta = 0, u_tilde = A * anchor.
EpochState epoch_init(const DataMatrix& X, std::span<const double> anchor,
                      bool deterministic = true);

/// Represents w' = w + eta (x_i (x_i^T w - x_i^T anchor) + u_tilde) in
/// O(nnz(x_i)). Rebases first if alpha has drifted outside [1e-100, 1e100].
void fast_update(EpochState& state, const DataMatrix& X, std::size_t i, double eta,
                 FastEpochCounters* counters = nullptr);

/// Rescales the representation to unit norm. Throws DegenerateIterateError
/// when the represented vector is zero.
void fast_normalize(EpochState& state);

/// alpha g + beta u_tilde as a dense vector.
std::vector<double> materialize(const EpochState& state);

/// Folds the iterate into g (alpha = 1, beta = 0) and recomputes the scalars. O(d).
void rebase(EpochState& state);

/// Largest relative deviation of the cached gamma, delta, zeta from a fresh
/// recomputation. delta is measured against sqrt(gamma * zeta). O(d).
double cache_drift(const EpochState& state);

inline constexpr double kAlphaLog10Guard = 100.0;
inline constexpr double kDriftTolerance = 1e-10;

/// One k = 1 VR-PCA epoch through EpochState. Draws exactly cfg.epoch_len_m
/// indices from `sampler`, matching vrpca_epoch draw for draw. The cache is
/// checked for drift every ceil(d / average nnz) updates, which keeps the
/// O(d) check amortized at O(nnz) per update.
Basis vrpca_epoch_fast(const DataMatrix& X, const Basis& anchor, const SolverConfig& cfg,
                       IndexSampler& sampler, FastEpochCounters* counters = nullptr);

}  // namespace vrpca

#endif  // VRPCA_FAST_EPOCH_HPP
