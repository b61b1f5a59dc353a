#include "vrpca/solvers.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "vrpca/errors.hpp"
#include "vrpca/fast_epoch.hpp"

namespace vrpca {

namespace {

using Clock = std::chrono::steady_clock;

void check_init(const DataMatrix& X, const SolverConfig& cfg, const Basis& init) {
  if (init.dim() != X.dim()) {
    throw ShapeError("solver: init has dimension " + std::to_string(init.dim()) +
                     ", data has " + std::to_string(X.dim()));
  }
  if (init.rank() != cfg.rank_k) {
    throw ShapeError("solver: init has " + std::to_string(init.rank()) + " columns, rank_k is " +
                     std::to_string(cfg.rank_k));
  }
}

void check_deflation(const DataMatrix& X, std::span<const DeflationPair> deflation) {
  for (const auto& pair : deflation) {
    if (pair.vector.size() != X.dim()) throw ShapeError("solver: deflation vector length != d");
    if (pair.eigenvalue < 0.0) throw DomainError("solver: deflation eigenvalue must be >= 0");
  }
}

Basis orthonormalize(Matrix M) {
  if (M.cols() == 1) {
    normalize(M.col(0));
    return unchecked_basis(std::move(M));
  }
  return gram_schmidt(std::move(M));
}

// Appends trace records; keeps wall time of the solver itself, excluding
// evaluation and observer callbacks.
class TraceRecorder {
 public:
  TraceRecorder(ConvergenceTrace& trace, const SolveOptions& options)
      : trace_(trace), options_(options), start_(Clock::now()) {
    if (options_.evaluator) trace_.metric_reference = options_.evaluator->reference();
  }

  void record(std::size_t epoch, double passes, const Basis& B, bool notify = true) {
    const auto paused = Clock::now();
    TraceRecord rec;
    rec.epoch = epoch;
    rec.effective_passes = passes;
    rec.wall_millis =
        std::chrono::duration<double, std::milli>(paused - start_).count() - excluded_ms_;
    if (options_.evaluator) {
      rec.log10_suboptimality = options_.evaluator->log10_suboptimality(B);
      rec.alignment_sq = options_.evaluator->alignment_sq(B);
    } else {
      rec.log10_suboptimality = std::numeric_limits<double>::quiet_NaN();
    }
    trace_.records.push_back(rec);
    if (notify && options_.observer) options_.observer(epoch, B);
    excluded_ms_ += std::chrono::duration<double, std::milli>(Clock::now() - paused).count();
  }

 private:
  ConvergenceTrace& trace_;
  const SolveOptions& options_;
  Clock::time_point start_;
  double excluded_ms_ = 0.0;
};

// Runs epochs [1, T] of VR-PCA from `current`, recording with the given offsets.
Basis run_vrpca_epochs(const DataMatrix& X, const SolverConfig& cfg, Basis current,
                       const SolveOptions& options, TraceRecorder& recorder,
                       std::size_t epoch_offset, double pass_offset) {
  IndexSampler sampler(cfg.seed, Stream::vrpca_indices, X.count());
  const bool fast = cfg.fast_epoch && cfg.rank_k == 1 && options.deflation.empty();
  const double per_epoch = vrpca_epoch_passes(cfg.epoch_len_m, X.count());
  for (std::size_t s = 1; s <= cfg.epochs_T; ++s) {
    current = fast ? vrpca_epoch_fast(X, current, cfg, sampler)
                   : vrpca_epoch(X, current, cfg, sampler, options.deflation);
    recorder.record(epoch_offset + s, pass_offset + per_epoch * static_cast<double>(s), current);
  }
  return current;
}

// passes * n Oja steps with eta_t = c / t, t counted from 1. Records every n
// iterations.
Basis run_oja(const DataMatrix& X, const SolverConfig& cfg, Basis current,
              const SolveOptions& options, TraceRecorder& recorder, std::size_t passes) {
  IndexSampler sampler(cfg.seed, Stream::oja_indices, X.count());
  const std::size_t n = X.count();
  const std::size_t k = current.rank();
  Matrix W = current.matrix();
  std::vector<double> proj(k);
  std::size_t t = 0;
  for (std::size_t pass = 1; pass <= passes; ++pass) {
    for (std::size_t it = 0; it < n; ++it) {
      ++t;
      const double eta_t = cfg.oja_step_c / static_cast<double>(t);
      const ColumnView x = X.column(sampler.next());
      if (options.deflation.empty()) {
        for (std::size_t c = 0; c < k; ++c) proj[c] = x.dot(W.col(c));
        for (std::size_t c = 0; c < k; ++c) x.axpy(eta_t * proj[c], W.col(c));
      } else {
        for (std::size_t c = 0; c < k; ++c) {
          const auto step = deflated_apply(x, W.col(c), options.deflation);
          axpy(eta_t, step, W.col(c));
        }
      }
      W = orthonormalize(std::move(W)).matrix();
    }
    current = unchecked_basis(W);
    recorder.record(pass, static_cast<double>(pass), current);
  }
  return current;
}

void validate_vrpca(const SolverConfig& cfg) {
  if (!(cfg.step_eta > 0.0)) throw DomainError("vrpca: step_eta must be > 0");
  if (cfg.epoch_len_m < 1) throw DomainError("vrpca: epoch_len_m must be >= 1");
  if (cfg.rank_k < 1) throw DomainError("vrpca: rank_k must be >= 1");
}

void validate_oja(const SolverConfig& cfg) {
  if (!(cfg.oja_step_c >= 0.0)) throw DomainError("oja: oja_step_c must be >= 0");
  if (cfg.rank_k < 1) throw DomainError("oja: rank_k must be >= 1");
}

}  // namespace

std::string_view to_string(SolverKind kind) noexcept {
  switch (kind) {
    case SolverKind::vrpca: return "vrpca";
    case SolverKind::oja: return "oja";
    case SolverKind::power: return "power";
    case SolverKind::hybrid: return "hybrid";
  }
  return "unknown";
}

SolverKind parse_solver_kind(std::string_view name) {
  if (name == "vrpca") return SolverKind::vrpca;
  if (name == "oja") return SolverKind::oja;
  if (name == "power") return SolverKind::power;
  if (name == "hybrid") return SolverKind::hybrid;
  throw DomainError("unknown solver '" + std::string(name) + "'");
}

double vrpca_epoch_passes(std::size_t m, std::size_t n) noexcept {
  return 1.0 + static_cast<double>(m) / static_cast<double>(n);
}

Basis random_init(std::size_t d, std::size_t k, std::uint64_t seed) {
  if (d == 0 || k == 0 || k > d) throw ShapeError("random_init: need 1 <= k <= d");
  auto engine = make_engine(seed, Stream::initialization);
  std::normal_distribution<double> normal;
  Matrix M(d, k);
  for (double& v : M.data()) v = normal(engine);
  return orthonormalize(std::move(M));
}

void vrpca_step(const DataMatrix& X, std::span<double> w, std::span<const double> anchor,
                std::span<const double> u_tilde, std::size_t i, double eta) {
  const ColumnView x = X.column(i);
  const double c = eta * (x.dot(w) - x.dot(anchor));
  x.axpy(c, w);
  axpy(eta, u_tilde, w);
  normalize(w);
}

Basis vrpca_epoch(const DataMatrix& X, const Basis& anchor, const SolverConfig& cfg,
                  IndexSampler& sampler, std::span<const DeflationPair> deflation) {
  if (anchor.dim() != X.dim()) throw ShapeError("vrpca_epoch: anchor dimension differs from d");
  if (!(cfg.step_eta >= 0.0)) throw DomainError("vrpca_epoch: step size must be >= 0");
  check_deflation(X, deflation);

  const std::size_t k = anchor.rank();
  const Matrix& anchor_m = anchor.matrix();
  const Matrix u_tilde =
      deflated_covariance_apply(X, anchor_m, deflation, cfg.determinism);

  if (k == 1 && deflation.empty()) {
    std::vector<double> w(anchor.col(0).begin(), anchor.col(0).end());
    for (std::size_t t = 0; t < cfg.epoch_len_m; ++t) {
      vrpca_step(X, w, anchor.col(0), u_tilde.col(0), sampler.next(), cfg.step_eta);
    }
    return unchecked_basis(Matrix::column_vector(w));
  }

  Matrix W = anchor_m;
  std::vector<double> diff(k);
  std::vector<double> defl_diff(deflation.size());
  for (std::size_t t = 0; t < cfg.epoch_len_m; ++t) {
    const ColumnView x = X.column(sampler.next());
    for (std::size_t c = 0; c < k; ++c) {
      diff[c] = x.dot(W.col(c)) - x.dot(anchor_m.col(c));
    }
    for (std::size_t c = 0; c < k; ++c) {
      auto wc = W.col(c);
      // Deflated terms of x x^T w and x x^T w_anchor, differenced.
      for (std::size_t l = 0; l < deflation.size(); ++l) {
        defl_diff[l] = dot(deflation[l].vector, wc) - dot(deflation[l].vector, anchor_m.col(c));
      }
      x.axpy(cfg.step_eta * diff[c], wc);
      for (std::size_t l = 0; l < deflation.size(); ++l) {
        axpy(-cfg.step_eta * deflation[l].eigenvalue * defl_diff[l], deflation[l].vector, wc);
      }
      axpy(cfg.step_eta, u_tilde.col(c), wc);
    }
    W = orthonormalize(std::move(W)).matrix();
  }
  return unchecked_basis(std::move(W));
}

SolveResult vrpca_solve(const DataMatrix& X, const SolverConfig& cfg, const Basis& init,
                        const SolveOptions& options) {
  validate_vrpca(cfg);
  if (cfg.epochs_T < 1) throw DomainError("vrpca: epochs_T must be >= 1");
  check_init(X, cfg, init);
  check_deflation(X, options.deflation);
  if (cfg.fast_epoch && cfg.rank_k == 1 && X.has_zero_rows()) {
    throw DomainError("vrpca: fast epochs need a matrix without all-zero rows; drop them first");
  }

  SolveResult result{init, {}};
  result.trace.config = cfg;
  TraceRecorder recorder(result.trace, options);
  recorder.record(0, 0.0, init, false);
  result.basis = run_vrpca_epochs(X, cfg, init, options, recorder, 0, 0.0);
  return result;
}

SolveResult oja_solve(const DataMatrix& X, const SolverConfig& cfg, const Basis& init,
                      const SolveOptions& options) {
  validate_oja(cfg);
  if (cfg.epochs_T < 1) throw DomainError("oja: epochs_T (passes) must be >= 1");
  check_init(X, cfg, init);
  check_deflation(X, options.deflation);

  SolveResult result{init, {}};
  result.trace.config = cfg;
  TraceRecorder recorder(result.trace, options);
  recorder.record(0, 0.0, init, false);
  result.basis = run_oja(X, cfg, init, options, recorder, cfg.epochs_T);
  return result;
}

SolveResult power_solve(const DataMatrix& X, const SolverConfig& cfg, const Basis& init,
                        const SolveOptions& options) {
  if (cfg.power_iters < 1) throw DomainError("power: power_iters must be >= 1");
  check_init(X, cfg, init);
  check_deflation(X, options.deflation);

  SolveResult result{init, {}};
  result.trace.config = cfg;
  TraceRecorder recorder(result.trace, options);
  recorder.record(0, 0.0, init, false);
  Basis current = init;
  for (std::size_t round = 1; round <= cfg.power_iters; ++round) {
    current = orthonormalize(
        deflated_covariance_apply(X, current.matrix(), options.deflation, cfg.determinism));
    recorder.record(round, static_cast<double>(round), current);
  }
  result.basis = std::move(current);
  return result;
}

SolveResult hybrid_solve(const DataMatrix& X, const SolverConfig& cfg, const Basis& init,
                         const SolveOptions& options) {
  validate_oja(cfg);
  check_init(X, cfg, init);
  check_deflation(X, options.deflation);
  if (cfg.epochs_T > 0) validate_vrpca(cfg);

  SolveResult result{init, {}};
  result.trace.config = cfg;
  TraceRecorder recorder(result.trace, options);
  recorder.record(0, 0.0, init, false);
  Basis warm = run_oja(X, cfg, init, options, recorder, 1);
  result.basis = run_vrpca_epochs(X, cfg, std::move(warm), options, recorder, 1, 1.0);
  return result;
}

SolveResult solve(SolverKind kind, const DataMatrix& X, const SolverConfig& cfg, const Basis& init,
                  const SolveOptions& options) {
  switch (kind) {
    case SolverKind::vrpca: return vrpca_solve(X, cfg, init, options);
    case SolverKind::oja: return oja_solve(X, cfg, init, options);
    case SolverKind::power: return power_solve(X, cfg, init, options);
    case SolverKind::hybrid: return hybrid_solve(X, cfg, init, options);
  }
  throw DomainError("solve: unknown solver kind");
}

}  // namespace vrpca
