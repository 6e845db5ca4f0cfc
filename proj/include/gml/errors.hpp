// errors.hpp
//
// Exception types thrown by the solver library. Everything derives from
// gml::Error so callers can catch the whole family in one place.

#ifndef GML_ERRORS_HPP
#define GML_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace gml {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad grid, boundary conditions, parameters or config values.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Raised by lu_solve when a pivot collapses below the singularity threshold.
class SingularMatrix : public Error {
 public:
  using Error::Error;
};

/// The right-hand side could not be evaluated (domain error, non-finite
/// output, wrong length). Carries the node index when the failure happened
/// while walking a grid, -1 otherwise.
class RhsError : public Error {
 public:
  explicit RhsError(const std::string& what, long node = -1)
      : Error(node >= 0 ? what + " (node " + std::to_string(node) + ")" : what),
        node_(node),
        detail_(what) {}

  long node() const { return node_; }
  const std::string& detail() const { return detail_; }

  /// Same failure, tagged with the node it occurred at.
  RhsError at_node(long node) const { return RhsError(detail_, node); }

 private:
  long node_;
  std::string detail_;
};

/// A Newton solve inside the relaxation scheme (endpoint system or a sweep
/// step) stopped at its iteration cap without meeting the tolerance.
class ConvergenceFailure : public Error {
 public:
  using Error::Error;
};

/// Outer update norm blew past the divergence guard.
class Divergence : public Error {
 public:
  using Error::Error;
};

}  // namespace gml

#endif  // GML_ERRORS_HPP
