#pragma once

#include <stdexcept>
#include <string>

namespace hetquad {

/// Shapes of two operands (or of an operand and an instance) disagree.
class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A matrix expected to have full column rank does not.
class RankDeficient : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An operation was called outside its documented precondition.
class PreconditionViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// The optimal assignment is not unique, so no strictly complementary
/// rank-(d-1) dual can be built.
class TieError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed instance / model / candidate file.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An inner numerical solve (LMI, eigensolver) failed to produce a usable point.
class SolverFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hetquad
