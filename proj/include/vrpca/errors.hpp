#ifndef VRPCA_ERRORS_HPP
#define VRPCA_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace vrpca {

/// Operand shapes do not agree (wrong d, wrong k, wrong vector length).
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An input lies outside the domain an operation is defined on.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Orthonormalization met a column with (numerically) zero residual.
class RankDeficiencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An iterate collapsed to the zero vector and cannot be normalized.
class DegenerateIterateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace vrpca

#endif  // VRPCA_ERRORS_HPP
