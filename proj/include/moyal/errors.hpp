#pragma once

#include <stdexcept>
#include <string>

namespace moyal {

/// Raised on shape mismatches and malformed inputs.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A matrix expected to be invertible (or of a given rank) is not.
class RankError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A frequency or shift does not lie on the lattice a grid can represent.
class CommensurabilityError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The requested operation has no meaning in the given representation.
class UnsupportedRepresentation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Iterative method gave up; carries the best bracket found so far.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, double lower, double upper)
      : std::runtime_error(what), lower_(lower), upper_(upper) {}
  double lower() const noexcept { return lower_; }
  double upper() const noexcept { return upper_; }

 private:
  double lower_;
  double upper_;
};

}  // namespace moyal
