// Covariance products (serial reference vs OpenMP kernels) and naive vs
// amortized sparse VR-PCA epochs.

#include <benchmark/benchmark.h>

#include "vrpca/fast_epoch.hpp"
#include "vrpca/linalg.hpp"
#include "vrpca/params.hpp"
#include "vrpca/solvers.hpp"
#include "vrpca/synth.hpp"

namespace {

using namespace vrpca;

const DataMatrix& dense_data() {
  static const DataMatrix X = synth_generate(spectrum_spec(200, 20000, 0.1, 1));
  return X;
}

const DataMatrix& sparse_data(std::size_t d) {
  static std::vector<std::pair<std::size_t, DataMatrix>> cache;
  for (const auto& [dim, X] : cache) {
    if (dim == d) return X;
  }
  // About 20 nonzeros per column whatever d is.
  cache.emplace_back(d, synth_sparse(d, 5000, 20.0 / static_cast<double>(d), 2));
  return cache.back().second;
}

enum Kernel : int { kSerial, kDeterministic, kUnordered };

void apply_kernel(benchmark::State& state, const DataMatrix& X) {
  const auto kernel = static_cast<Kernel>(state.range(0));
  const auto B = random_init(X.dim(), static_cast<std::size_t>(state.range(1)), 3);
  for (auto _ : state) {
    Matrix out = kernel == kSerial ? covariance_apply_serial(X, B.matrix())
                                   : covariance_apply(X, B, kernel == kDeterministic);
    benchmark::DoNotOptimize(out.data().data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * X.count()));
  state.counters["threads"] = num_threads();
}

void BM_CovarianceDense(benchmark::State& state) { apply_kernel(state, dense_data()); }
void BM_CovarianceSparse(benchmark::State& state) { apply_kernel(state, sparse_data(4000)); }

BENCHMARK(BM_CovarianceDense)
    ->ArgNames({"kernel", "k"})
    ->ArgsProduct({{kSerial, kDeterministic, kUnordered}, {1, 4}})
    ->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CovarianceSparse)
    ->ArgNames({"kernel", "k"})
    ->ArgsProduct({{kSerial, kDeterministic, kUnordered}, {1, 4}})
    ->Unit(benchmark::kMillisecond);

// One epoch with m = n; naive updates cost O(d), amortized ones O(nnz).
void BM_SparseEpoch(benchmark::State& state) {
  const bool fast = state.range(0) != 0;
  const auto& X = sparse_data(static_cast<std::size_t>(state.range(1)));
  const auto hp = heuristic_params(X);
  SolverConfig cfg;
  cfg.step_eta = hp.eta;
  cfg.epoch_len_m = hp.m;
  const auto anchor = random_init(X.dim(), 1, 4);
  for (auto _ : state) {
    IndexSampler sampler(4, Stream::vrpca_indices, X.count());
    Basis out = fast ? vrpca_epoch_fast(X, anchor, cfg, sampler) : vrpca_epoch(X, anchor, cfg, sampler);
    benchmark::DoNotOptimize(out.col(0).data());
  }
}

BENCHMARK(BM_SparseEpoch)
    ->ArgNames({"fast", "d"})
    ->ArgsProduct({{0, 1}, {1000, 4000, 16000}})
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
