#ifndef QSD_ERROR_HPP
#define QSD_ERROR_HPP

#include <stdexcept>
#include <string>

namespace qsd {

/// Violated input contract (bad dimensions, non-state input, malformed JSON, ...).
/// The CLI maps this to exit code 2.
class precondition_error : public std::invalid_argument {
public:
  explicit precondition_error(const std::string& what) : std::invalid_argument(what) {}
};

/// A solver ran out of its iteration or bracket budget without meeting its tolerance.
/// The CLI maps this to exit code 3.
class convergence_error : public std::runtime_error {
public:
  convergence_error(const std::string& what, double residual)
      : std::runtime_error(what), residual(residual) {}
  double residual;
};

/// Hard resource limits (dimension cap, copy-count cap for the permutation average).
class resource_limit_error : public std::length_error {
public:
  explicit resource_limit_error(const std::string& what) : std::length_error(what) {}
};

/// Requested set composition has no exact representation (e.g. tensor of two hulls).
class composition_error : public std::logic_error {
public:
  explicit composition_error(const std::string& what) : std::logic_error(what) {}
};

} // namespace qsd

#endif
