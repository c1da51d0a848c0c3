#pragma once

#include <stdexcept>
#include <string>

namespace mathieu {

// Base for every failure that reflects a property of the problem (bad
// parameters, resonance, no bracket) rather than a bug. The CLI maps these
// to exit code 2.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ResonanceDetected : public DomainError {
 public:
  explicit ResonanceDetected(int j)
      : DomainError("resonance j*omega = 2*omega1 at j = " + std::to_string(j) +
                    "; use the `resonant` subcommand"),
        harmonic_(j) {}
  int harmonic() const noexcept { return harmonic_; }

 private:
  int harmonic_;
};

class SecularTerm : public DomainError {
 public:
  using DomainError::DomainError;
};

class MalformedSpectrum : public DomainError {
 public:
  using DomainError::DomainError;
};

class NotResonant : public DomainError {
 public:
  using DomainError::DomainError;
};

class NotImplementedResonance : public DomainError {
 public:
  using DomainError::DomainError;
};

class UnsolvableSecular : public DomainError {
 public:
  using DomainError::DomainError;
};

class StepFailure : public DomainError {
 public:
  using DomainError::DomainError;
};

class BracketFailure : public DomainError {
 public:
  using DomainError::DomainError;
};

class NoRoot : public DomainError {
 public:
  using DomainError::DomainError;
};

class DegenerateConic : public DomainError {
 public:
  using DomainError::DomainError;
};

class Unbounded : public DomainError {
 public:
  using DomainError::DomainError;
};

}  // namespace mathieu
