#include "vrpca/fast_epoch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vrpca/errors.hpp"
#include "vrpca/linalg.hpp"

namespace vrpca {

namespace {

void recompute_scalars(EpochState& s) {
  s.gamma = s.alpha * s.alpha * squared_norm(s.g);
  s.delta = s.alpha * dot(s.g, s.u_tilde);
  s.zeta = squared_norm(s.u_tilde);
}

double relative_gap(double cached, double fresh, double scale) {
  const double diff = std::abs(cached - fresh);
  if (scale <= 0.0) return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return diff / scale;
}

}  // namespace

EpochState epoch_init(const DataMatrix& X, std::span<const double> anchor, bool deterministic) {
  if (anchor.size() != X.dim()) throw ShapeError("epoch_init: anchor length differs from d");
  EpochState s;
  s.g.assign(anchor.begin(), anchor.end());
  s.w_anchor.assign(anchor.begin(), anchor.end());
  s.u_tilde = covariance_apply(X, anchor, deterministic);
  s.alpha = 1.0;
  s.beta = 0.0;
  recompute_scalars(s);
  return s;
}

void fast_update(EpochState& s, const DataMatrix& X, std::size_t i, double eta,
                 FastEpochCounters* counters) {
  if (std::abs(std::log10(std::abs(s.alpha))) > kAlphaLog10Guard) {
    rebase(s);
    if (counters) ++counters->rebases;
  }
  const ColumnView x = X.column(i);

  double xg = 0.0;
  double xu = 0.0;
  double xa = 0.0;
  x.for_each_nonzero([&](std::size_t r, double v) {
    xg += v * s.g[r];
    xu += v * s.u_tilde[r];
    xa += v * s.w_anchor[r];
  });

  // Delta g = c x with c = eta (x^T w - x^T anchor). Inner products against
  // Delta g follow from the dot products above and the cached ||x||^2; the
  // one against g must use g before it is modified.
  const double c = eta * (s.alpha * xg + s.beta * xu - xa);
  const double p = c * xg;
  const double q = c * xu;
  const double dg_sq = c * c * X.squared_norms()[i];

  if (c != 0.0) x.axpy(c / s.alpha, s.g);
  s.gamma += 2.0 * s.alpha * p + dg_sq;
  s.delta += q;
  s.beta += eta;

  if (counters) {
    ++counters->updates;
    counters->entry_touches += 2 * x.nnz();
  }
}

void fast_normalize(EpochState& s) {
  const double sq = s.represented_squared_norm();
  if (!(sq > 0.0) || !std::isfinite(sq)) {
    throw DegenerateIterateError("fast_normalize: represented iterate has zero norm");
  }
  const double nu = std::sqrt(sq);
  s.alpha /= nu;
  s.beta /= nu;
  s.gamma /= sq;
  s.delta /= nu;
}

std::vector<double> materialize(const EpochState& s) {
  std::vector<double> w(s.dim());
  for (std::size_t r = 0; r < w.size(); ++r) w[r] = s.alpha * s.g[r] + s.beta * s.u_tilde[r];
  return w;
}

void rebase(EpochState& s) {
  s.g = materialize(s);
  s.alpha = 1.0;
  s.beta = 0.0;
  recompute_scalars(s);
}

double cache_drift(const EpochState& s) {
  const double gamma = s.alpha * s.alpha * squared_norm(s.g);
  const double delta = s.alpha * dot(s.g, s.u_tilde);
  const double zeta = squared_norm(s.u_tilde);
  return std::max({relative_gap(s.gamma, gamma, gamma),
                   relative_gap(s.delta, delta, std::sqrt(gamma * zeta)),
                   relative_gap(s.zeta, zeta, zeta)});
}

Basis vrpca_epoch_fast(const DataMatrix& X, const Basis& anchor, const SolverConfig& cfg,
                       IndexSampler& sampler, FastEpochCounters* counters) {
  if (anchor.rank() != 1) throw ShapeError("vrpca_epoch_fast: only k = 1 is supported");
  if (anchor.dim() != X.dim()) throw ShapeError("vrpca_epoch_fast: anchor dimension differs");
  if (!(cfg.step_eta >= 0.0)) throw DomainError("vrpca_epoch_fast: step size must be >= 0");

  EpochState state = epoch_init(X, anchor.col(0), cfg.determinism);
  const auto check_every = static_cast<std::size_t>(
      std::ceil(static_cast<double>(X.dim()) / std::max(1.0, X.average_nnz())));

  for (std::size_t t = 1; t <= cfg.epoch_len_m; ++t) {
    fast_update(state, X, sampler.next(), cfg.step_eta, counters);
    fast_normalize(state);
    if (t % check_every == 0) {
      if (counters) ++counters->drift_checks;
      if (cache_drift(state) > kDriftTolerance) {
        rebase(state);
        if (counters) ++counters->rebases;
      }
    }
  }
  auto w = materialize(state);
  normalize(w);
  return unchecked_basis(Matrix::column_vector(w));
}

}  // namespace vrpca
