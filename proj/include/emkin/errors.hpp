#pragma once

#include <stdexcept>
#include <string>

namespace emkin {

// Each error class maps to one CLI exit code (see tools/commands.cpp).

class InvalidParameter : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Validity bound tau * gamma_a * gamma_b < gamma_a + gamma_b violated.
class WindowTooWide : public InvalidParameter {
public:
  using InvalidParameter::InvalidParameter;
};

class DomainError : public InvalidParameter {
public:
  using InvalidParameter::InvalidParameter;
};

class InvalidData : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// The product-state density is non-positive at a sample.
class ModelInapplicable : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class IntegrationBlowup : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class SolverFailure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class DegenerateAntisymmetrization : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class GridTooSmall : public InvalidParameter {
public:
  using InvalidParameter::InvalidParameter;
};

} // namespace emkin
