#pragma once

#include <stdexcept>
#include <string>

namespace tl {

enum class ErrorKind {
  InvalidArgument,
  DimensionMismatch,
  AlgebraMismatch,
  NotAComplex,
  NotAMorphism,
  NotInvertible,
  NotAcyclic,
  NotSelfAdjoint,
  DivergentDeterminant,
  IllConditioned,
  Parse,
};

/// Base error for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised when a log-determinant integral diverges. `degree` is -1 for a bare operator.
class DivergentDeterminant : public Error {
 public:
  DivergentDeterminant(const std::string& what, int degree = -1)
      : Error(ErrorKind::DivergentDeterminant, what), degree_(degree) {}
  int degree() const noexcept { return degree_; }

 private:
  int degree_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool ok, ErrorKind kind, const std::string& what) {
  if (!ok) fail(kind, what);
}

}  // namespace tl
