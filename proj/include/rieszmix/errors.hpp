#pragma once

#include <stdexcept>
#include <string>

namespace rieszmix {

/// Operands live on different sample spaces (or have the wrong length).
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A scalar or structural argument is outside its domain.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An operation was called on inputs that violate its stated precondition.
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// The exhaustive product-space backend would exceed the atom cap.
class AtomCapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A mixingale certificate failed verification; the experiment cannot proceed.
class CertificateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rieszmix
