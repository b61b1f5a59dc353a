#include "vrpca/rng.hpp"

#include "vrpca/errors.hpp"

namespace vrpca {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::mt19937_64 make_engine(std::uint64_t seed, Stream stream) {
  const auto s = static_cast<std::uint64_t>(stream);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32)};
  return std::mt19937_64(seq);
}

IndexSampler::IndexSampler(std::uint64_t seed, Stream stream, std::size_t n)
    : engine_(make_engine(seed, stream)), dist_(0, n == 0 ? 0 : n - 1) {
  if (n == 0) throw DomainError("IndexSampler: empty index range");
}

}  // namespace vrpca
