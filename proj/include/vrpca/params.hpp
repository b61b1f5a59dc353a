#ifndef VRPCA_PARAMS_HPP
#define VRPCA_PARAMS_HPP

#include <cstddef>

#include "vrpca/data_matrix.hpp"

namespace vrpca {

/// Step size and epoch length computed from the data alone:
/// m = n and eta = 1 / (r_bar sqrt(n)), r_bar the mean squared column norm.
struct HeuristicParams {
  double eta = 0.0;
  std::size_t m = 0;
};

/// Throws DomainError for an all-zero matrix.
HeuristicParams heuristic_params(const DataMatrix& X);

/// The unspecified numerical constants of the convergence guarantee.
/// Defaults are conservative, non-normative picks.
struct TheoryConstants {
  double c1 = 0.05;
  double c2 = 48.0;
  double c3 = 0.75;
};

struct TheoryParams {
  double eta = 0.0;
  std::size_t m = 0;
  std::size_t T = 0;
  bool satisfied = false;
};

/// Outcome of checking the three step-size / epoch-length conditions.
struct TheoryConditions {
  bool step_small = false;    // eta <= c1 delta^2 lambda / r^2
  bool epoch_long = false;    // m >= c2 log(2/delta) / (eta lambda)
  bool noise_bounded = false; // m eta^2 r^2 + r sqrt(m eta^2 log(2/delta)) <= c3
  double noise_term = 0.0;    // left-hand side of the third condition

  bool all() const noexcept { return step_small && epoch_long && noise_bounded; }
};

/// eta = c1 delta^2 lambda / r^2, m = ceil(c2 log(2/delta) / (eta lambda)),
/// T = ceil(log(1/epsilon) / log(2/delta)); `satisfied` reports the third
/// condition (the first two hold by construction).
TheoryParams theory_params(double r, double lambda, double delta, double epsilon,
                           const TheoryConstants& constants = {});

/// Independent check of an arbitrary (eta, m) against the three conditions.
TheoryConditions check_theory_conditions(double r, double lambda, double delta, double eta,
                                         std::size_t m, const TheoryConstants& constants = {});

/// Number of epochs ceil(log(1/epsilon) / log(2/delta)).
std::size_t theory_epochs(double delta, double epsilon);

}  // namespace vrpca

#endif  // VRPCA_PARAMS_HPP
