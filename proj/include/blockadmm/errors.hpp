#pragma once

#include <stdexcept>
#include <string>

namespace blockadmm {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dimension mismatch between blocks, vectors or partitions.
class ShapeError : public Error {
 public:
  using Error::Error;
};

class InvalidGroupingError : public Error {
 public:
  using Error::Error;
};

class InvalidParameterError : public Error {
 public:
  using Error::Error;
};

/// A block objective cannot be handled by the requested solve path.
class UnsupportedObjectiveError : public Error {
 public:
  using Error::Error;
};

/// A regularizer rule needs mu > 0 but the objective is merely convex.
class NotStronglyConvexError : public Error {
 public:
  using Error::Error;
};

/// A regularizer rule produced a non-positive tau (e.g. Jacobi rule with n = 1).
class DegenerateTauError : public Error {
 public:
  using Error::Error;
};

class InvalidConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Power iteration did not settle within its budget. Carries the last estimate.
class EstimationFailedError : public Error {
 public:
  EstimationFailedError(const std::string& what, double best_estimate)
      : Error(what), best_estimate_(best_estimate) {}
  double best_estimate() const { return best_estimate_; }

 private:
  double best_estimate_;
};

}  // namespace blockadmm
