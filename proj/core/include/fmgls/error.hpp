#pragma once

#include <stdexcept>
#include <string>

namespace fmgls {

// Bad input: wrong shapes, invalid orders, malformed configuration.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The numbers did not cooperate: singular weights, non-PD covariances,
// explosive fitted dynamics.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

}  // namespace fmgls
