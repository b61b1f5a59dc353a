#include "vrpca/params.hpp"

#include <cmath>

#include "vrpca/errors.hpp"

namespace vrpca {

namespace {

void check_theory_inputs(double r, double lambda, double delta) {
  if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("theory params: r must be > 0");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw DomainError("theory params: lambda must be > 0");
  }
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("theory params: delta must be in (0, 1)");
}

void check_constants(const TheoryConstants& c) {
  if (!(c.c1 > 0.0 && c.c2 > 0.0 && c.c3 > 0.0)) {
    throw DomainError("theory params: constants must be positive");
  }
}

}  // namespace

HeuristicParams heuristic_params(const DataMatrix& X) {
  const double r_bar = X.mean_squared_norm();
  if (!(r_bar > 0.0)) throw DomainError("heuristic params: data matrix is all zero");
  const double n = static_cast<double>(X.count());
  return {1.0 / (r_bar * std::sqrt(n)), X.count()};
}

std::size_t theory_epochs(double delta, double epsilon) {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("theory params: delta must be in (0, 1)");
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw DomainError("theory params: epsilon must be in (0, 1)");
  }
  return static_cast<std::size_t>(std::ceil(std::log(1.0 / epsilon) / std::log(2.0 / delta)));
}

TheoryParams theory_params(double r, double lambda, double delta, double epsilon,
                           const TheoryConstants& constants) {
  check_theory_inputs(r, lambda, delta);
  check_constants(constants);
  TheoryParams out;
  out.T = theory_epochs(delta, epsilon);
  out.eta = constants.c1 * delta * delta * lambda / (r * r);
  out.m = static_cast<std::size_t>(
      std::ceil(constants.c2 * std::log(2.0 / delta) / (out.eta * lambda)));
  out.satisfied = check_theory_conditions(r, lambda, delta, out.eta, out.m, constants).all();
  return out;
}

TheoryConditions check_theory_conditions(double r, double lambda, double delta, double eta,
                                         std::size_t m, const TheoryConstants& constants) {
  check_theory_inputs(r, lambda, delta);
  check_constants(constants);
  if (!(eta > 0.0)) throw DomainError("theory conditions: eta must be > 0");
  const double log_term = std::log(2.0 / delta);
  const double md = static_cast<double>(m);
  TheoryConditions out;
  out.step_small = eta <= constants.c1 * delta * delta * lambda / (r * r);
  out.epoch_long = md >= constants.c2 * log_term / (eta * lambda);
  out.noise_term = md * eta * eta * r * r + r * std::sqrt(md * eta * eta * log_term);
  out.noise_bounded = out.noise_term <= constants.c3;
  return out;
}

}  // namespace vrpca
