#pragma once

#include <stdexcept>
#include <string>

namespace ehdg {

/// Invalid mesh, basis, or solver configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A caller broke a documented precondition (missing trace, negative weight, ...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Local element matrix could not be factorized.
class AssemblyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Boundary face on which the normal velocity changes sign.
class UnsupportedFaceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unknown problem identifier.
class LookupError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Direct solve refused because the dense system would be too large.
class SizeGuardError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ehdg
