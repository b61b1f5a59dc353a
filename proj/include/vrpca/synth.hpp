#ifndef VRPCA_SYNTH_HPP
#define VRPCA_SYNTH_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

#include "vrpca/data_matrix.hpp"

namespace vrpca {

/// Controlled-spectrum synthetic data X = U D V^T.
///
/// diag(D) = (1, 1-l, 1-1.1l, 1-1.2l, 1-1.3l, 1-1.4l, q_1, q_2, ...) with
/// q_i = |g_i| / d, g_i standard normal drawn from tail_seed. U (d x d) and
/// V (n x d) are orthonormalized Gaussian matrices drawn from matrix_seed.
struct SpectrumSpec {
  std::size_t dim_d = 100;
  std::size_t count_n = 1000;
  double gap_lambda = 0.05;
  std::uint64_t tail_seed = 0;
  std::uint64_t matrix_seed = 0;
};

/// Same seed for tail and factors; they draw from separate streams.
SpectrumSpec spectrum_spec(std::size_t d, std::size_t n, double lambda, std::uint64_t seed);

/// Throws DomainError unless d >= 6, n >= d, lambda in (0, 0.5) and the
/// tail stays below the prescribed head.
void validate(const SpectrumSpec& spec);

/// diag(D) in generation order (head first, tail unsorted).
std::vector<double> prescribed_singular_values(const SpectrumSpec& spec);

/// Dense d x n matrix whose singular values are diag(D).
DataMatrix synth_generate(const SpectrumSpec& spec);

/// Sparse d x n matrix: each entry is nonzero with probability `density`,
/// with value N(0, 1) / sqrt(1 + row). Every row receives at least one entry.
DataMatrix synth_sparse(std::size_t d, std::size_t n, double density, std::uint64_t seed);

}  // namespace vrpca

#endif  // VRPCA_SYNTH_HPP
