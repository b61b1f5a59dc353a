#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "brute_force.hpp"
#include "vrpca/errors.hpp"
#include "vrpca/fast_epoch.hpp"
#include "vrpca/linalg.hpp"
#include "vrpca/params.hpp"
#include "vrpca/solvers.hpp"
#include "vrpca/synth.hpp"

using namespace vrpca;
using namespace vrpca::testing;

namespace {

// ||w||^2, <w, u>, expanded by hand from w = alpha g + beta u.
double direct_squared_norm(const EpochState& s) {
  double total = 0.0;
  for (std::size_t r = 0; r < s.dim(); ++r) {
    const double w = s.alpha * s.g[r] + s.beta * s.u_tilde[r];
    total += w * w;
  }
  return total;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double worst = 0.0;
  for (std::size_t r = 0; r < a.size(); ++r) worst = std::max(worst, std::abs(a[r] - b[r]));
  return worst;
}

}  // namespace

TEST_CASE("epoch_init") {
  auto X = DataMatrix::dense(2, 1, {2, 0});
  const std::vector<double> anchor{1.0, 0.0};
  const auto s = epoch_init(X, anchor);
  CHECK(s.u_tilde == std::vector<double>{4.0, 0.0});
  CHECK(s.alpha == 1.0);
  CHECK(s.beta == 0.0);
  CHECK(s.gamma == 1.0);
  CHECK(s.delta == 4.0);
  CHECK(s.zeta == 16.0);
  CHECK(materialize(s) == anchor);

  CHECK_THROWS_AS(epoch_init(X, std::vector<double>{1.0}), ShapeError);
}

TEST_CASE("materialize and the cached norm agree with the direct expansion") {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> scalar(-3.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t d = 2 + trial % 30;
    EpochState s;
    s.g = gaussian_vector(d, rng);
    s.u_tilde = gaussian_vector(d, rng);
    s.w_anchor = unit_vector(d, rng);
    s.alpha = std::exp(scalar(rng));
    s.beta = scalar(rng);
    s.gamma = s.alpha * s.alpha * dot(s.g, s.g);
    s.delta = s.alpha * dot(s.g, s.u_tilde);
    s.zeta = dot(s.u_tilde, s.u_tilde);

    const double direct = direct_squared_norm(s);
    CHECK(std::abs(s.represented_squared_norm() - direct) <= 1e-14 * std::max(1.0, direct) * 10);
    const auto w = materialize(s);
    for (std::size_t r = 0; r < d; ++r) {
      CHECK(w[r] == s.alpha * s.g[r] + s.beta * s.u_tilde[r]);
    }
    CHECK(cache_drift(s) <= 1e-13);
  }
}

TEST_CASE("fast_update matches one naive step") {
  SUBCASE("3-dimensional hand instance") {
    auto X = DataMatrix::dense(3, 2, {1, 2, 0, 0, -1, 3});
    std::vector<double> anchor{0.6, 0.0, 0.8};
    auto s = epoch_init(X, anchor);
    const double eta = 0.3;
    fast_update(s, X, 1, eta);
    fast_normalize(s);

    std::vector<double> w = anchor;
    vrpca_step(X, w, anchor, s.u_tilde, 1, eta);
    CHECK(max_abs_diff(materialize(s), w) <= 1e-14);
    CHECK(std::abs(s.represented_squared_norm() - 1.0) <= 1e-14);
  }
  SUBCASE("a column orthogonal to g and the anchor only adds eta u_tilde") {
    auto X = DataMatrix::dense(2, 2, {1, 0, 0, 1});
    std::vector<double> anchor{1.0, 0.0};
    auto s = epoch_init(X, anchor);
    const auto g_before = s.g;
    const double gamma_before = s.gamma;
    fast_update(s, X, 1, 0.5);
    CHECK(s.g == g_before);
    CHECK(s.gamma == gamma_before);
    CHECK(s.beta == 0.5);
  }
}

TEST_CASE("fast_normalize") {
  SUBCASE("(0, 2) becomes (0, 1)") {
    EpochState s;
    s.g = {0.0, 2.0};
    s.u_tilde = {0.0, 0.0};
    s.w_anchor = {0.0, 1.0};
    s.gamma = 4.0;
    fast_normalize(s);
    const auto w = materialize(s);
    CHECK(w[0] == 0.0);
    CHECK(w[1] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(s.represented_squared_norm() == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("commutes with materialization") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
      EpochState s;
      s.g = gaussian_vector(15, rng);
      s.u_tilde = gaussian_vector(15, rng);
      s.w_anchor = s.g;
      s.alpha = 0.7;
      s.beta = -1.3;
      s.gamma = s.alpha * s.alpha * dot(s.g, s.g);
      s.delta = s.alpha * dot(s.g, s.u_tilde);
      s.zeta = dot(s.u_tilde, s.u_tilde);
      auto expected = materialize(s);
      normalize(expected);
      fast_normalize(s);
      CHECK(max_abs_diff(materialize(s), expected) <= 1e-12);
    }
  }
  SUBCASE("zero vector") {
    EpochState s;
    s.g = {0.0, 0.0};
    s.u_tilde = {0.0, 0.0};
    s.w_anchor = {1.0, 0.0};
    CHECK_THROWS_AS(fast_normalize(s), DegenerateIterateError);
  }
}

TEST_CASE("full epoch in lockstep with the naive update on 1%-dense data") {
  const auto X = synth_sparse(1000, 1000, 0.01, 5);
  REQUIRE_FALSE(X.has_zero_rows());
  const auto hp = heuristic_params(X);
  const auto anchor = random_init(1000, 1, 5);

  auto s = epoch_init(X, anchor.col(0));
  std::vector<double> w(anchor.col(0).begin(), anchor.col(0).end());
  IndexSampler fast_indices(5, Stream::vrpca_indices, X.count());
  IndexSampler naive_indices(5, Stream::vrpca_indices, X.count());

  double worst = 0.0;
  for (std::size_t t = 0; t < hp.m; ++t) {
    const std::size_t i = fast_indices.next();
    REQUIRE(naive_indices.next() == i);
    fast_update(s, X, i, hp.eta);
    fast_normalize(s);
    vrpca_step(X, w, anchor.col(0), s.u_tilde, i, hp.eta);
    worst = std::max(worst, max_abs_diff(materialize(s), w));
  }
  CHECK(worst <= 1e-9);
  CHECK(cache_drift(s) <= 1e-9);

  SolverConfig cfg;
  cfg.step_eta = hp.eta;
  cfg.epoch_len_m = hp.m;
  IndexSampler a(5, Stream::vrpca_indices, X.count());
  IndexSampler b(5, Stream::vrpca_indices, X.count());
  const auto fast = vrpca_epoch_fast(X, anchor, cfg, a);
  const auto naive = vrpca_epoch(X, anchor, cfg, b);
  CHECK(a.draws() == b.draws());
  CHECK(max_abs_diff(fast.col(0), naive.col(0)) <= 1e-9);
}

TEST_CASE("per-update cost is proportional to nnz") {
  const auto X = synth_sparse(2000, 500, 0.005, 9);
  const auto hp = heuristic_params(X);
  SolverConfig cfg;
  cfg.step_eta = hp.eta;
  cfg.epoch_len_m = hp.m;

  IndexSampler sampler(9, Stream::vrpca_indices, X.count());
  IndexSampler replay(9, Stream::vrpca_indices, X.count());
  FastEpochCounters counters;
  vrpca_epoch_fast(X, random_init(2000, 1, 9), cfg, sampler, &counters);

  std::uint64_t expected = 0;
  for (std::size_t t = 0; t < hp.m; ++t) expected += 2 * X.column(replay.next()).nnz();
  CHECK(counters.updates == hp.m);
  CHECK(counters.entry_touches == expected);
  // One O(d) drift check per ceil(d / avg nnz) updates.
  const auto every = static_cast<std::uint64_t>(std::ceil(2000.0 / X.average_nnz()));
  CHECK(counters.drift_checks == hp.m / every);
}

TEST_CASE("solver integration of the fast epoch") {
  SUBCASE("dense data gives the same trajectory") {
    const auto X = synth_generate(spectrum_spec(50, 400, 0.1, 3));
    const auto hp = heuristic_params(X);
    SolverConfig cfg;
    cfg.step_eta = hp.eta;
    cfg.epoch_len_m = hp.m;
    cfg.epochs_T = 5;
    cfg.seed = 3;
    const auto init = random_init(50, 1, 3);
    auto naive = vrpca_solve(X, cfg, init);
    cfg.fast_epoch = true;
    auto fast = vrpca_solve(X, cfg, init);
    CHECK(max_abs_diff(fast.basis.col(0), naive.basis.col(0)) <= 1e-9);
  }
  SUBCASE("data with an all-zero row is rejected") {
    auto X = DataMatrix::sparse(3, 2, {0, 1, 2}, {0, 2}, {1.0, 2.0});
    SolverConfig cfg;
    cfg.step_eta = 0.1;
    cfg.epoch_len_m = 2;
    cfg.fast_epoch = true;
    CHECK_THROWS_AS(vrpca_solve(X, cfg, Basis::canonical(3, 1)), DomainError);
    cfg.fast_epoch = false;
    CHECK_NOTHROW(vrpca_solve(X, cfg, Basis::canonical(3, 1)));
  }
}

TEST_CASE("rebase preserves the represented vector") {
  std::mt19937_64 rng(44);
  EpochState s;
  s.g = gaussian_vector(10, rng);
  s.u_tilde = gaussian_vector(10, rng);
  s.w_anchor = unit_vector(10, rng);
  s.alpha = 1e-120;
  s.beta = 0.25;
  for (double& v : s.g) v *= 1e120;
  s.gamma = s.alpha * s.alpha * dot(s.g, s.g);
  s.delta = s.alpha * dot(s.g, s.u_tilde);
  s.zeta = dot(s.u_tilde, s.u_tilde);
  const auto before = materialize(s);
  rebase(s);
  CHECK(s.alpha == 1.0);
  CHECK(s.beta == 0.0);
  CHECK(max_abs_diff(materialize(s), before) <= 1e-14);
}
