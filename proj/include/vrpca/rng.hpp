#ifndef VRPCA_RNG_HPP
#define VRPCA_RNG_HPP

#include <cstddef>
#include <cstdint>
#include <random>

namespace vrpca {

/// Independent random streams derived from one user seed. Each solver kind
/// draws from its own stream so that composite methods (the hybrid) replay
/// exactly the draws of their components.
enum class Stream : std::uint64_t {
  vrpca_indices = 0,
  oja_indices = 1,
  initialization = 2,
  synth_tail = 3,
  synth_matrix = 4,
  sparse_data = 5,
};

/// SplitMix64 mix of (seed, index); used to derive per-run seeds in sweeps.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept;

std::mt19937_64 make_engine(std::uint64_t seed, Stream stream);

/// Uniform indices on {0, ..., n-1}, one engine-backed draw per call.
///
/// std::uniform_int_distribution rejects out-of-range words instead of
/// reducing modulo n, so the draws are unbiased.
class IndexSampler {
 public:
  IndexSampler(std::uint64_t seed, Stream stream, std::size_t n);

  std::size_t next() {
    ++draws_;
    return dist_(engine_);
  }
  std::uint64_t draws() const noexcept { return draws_; }

 private:
  std::mt19937_64 engine_;
  std::uniform_int_distribution<std::size_t> dist_;
  std::uint64_t draws_ = 0;
};

}  // namespace vrpca

#endif  // VRPCA_RNG_HPP
