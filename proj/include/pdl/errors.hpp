#pragma once

#include <stdexcept>
#include <string>

namespace pdl {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shape/dimension disagreement between operands.
struct DimensionError : Error {
  using Error::Error;
};

// Argument outside its mathematical domain (nonpositive step, NaN input, ...).
struct DomainError : Error {
  using Error::Error;
};

// Step sizes outside the stable regime theta*tau*sigma*L^2 <= 1.
struct RegimeError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

}  // namespace pdl
