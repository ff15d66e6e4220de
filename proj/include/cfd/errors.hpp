#ifndef CFD_ERRORS_HPP
#define CFD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace cfd {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A construction would break a structural constraint
/// (case variable occurring in a child, or factor children sharing a variable).
class ConstraintViolation : public Error {
 public:
  using Error::Error;
};

/// An assignment passed where a feasible one is required is not in F(D).
class InfeasibleAssignment : public Error {
 public:
  using Error::Error;
};

/// A conditional quantity was requested with a zero-mass condition.
class ConditionInfeasible : public Error {
 public:
  using Error::Error;
};

/// An exhaustive oracle computation exceeds its enumeration guard.
class TooLarge : public Error {
 public:
  using Error::Error;
};

/// An input file does not match its documented grammar.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A grammar is not in strict Chomsky normal form (or contains duplicates).
class GrammarNotCnf : public Error {
 public:
  using Error::Error;
};

/// A sentence with zero tokens was passed to the parse-forest compiler.
class EmptySentence : public Error {
 public:
  using Error::Error;
};

/// A truth assignment is not the image of any parse tree.
class MalformedAssignment : public Error {
 public:
  using Error::Error;
};

}  // namespace cfd

#endif  // CFD_ERRORS_HPP
