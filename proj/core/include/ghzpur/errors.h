#pragma once

#include <stdexcept>

namespace ghzpur {

// Base of every error raised by the library. Subclasses exist so callers (the
// CLI in particular) can map failure classes onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

class LabelCollisionError : public Error {
 public:
  using Error::Error;
};

class UnknownLabelError : public Error {
 public:
  using Error::Error;
};

class NonUnitaryError : public Error {
 public:
  using Error::Error;
};

class ImpossibleBranchError : public Error {
 public:
  using Error::Error;
};

class ShapeMismatchError : public Error {
 public:
  using Error::Error;
};

class RegisterOverflowError : public Error {
 public:
  using Error::Error;
};

class SingularParametersError : public Error {
 public:
  using Error::Error;
};

class AbsorptionRegimeError : public Error {
 public:
  using Error::Error;
};

class NormalizationError : public Error {
 public:
  using Error::Error;
};

// Mixture lies outside the family a closed-form update handles.
class FamilyError : public Error {
 public:
  using Error::Error;
};

class LeakageError : public Error {
 public:
  LeakageError(const std::string& what, double leakage) : Error(what), leakage_(leakage) {}
  double leakage() const { return leakage_; }

 private:
  double leakage_;
};

class StagnationError : public Error {
 public:
  using Error::Error;
};

}  // namespace ghzpur
