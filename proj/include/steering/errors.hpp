#pragma once

#include <stdexcept>
#include <string>

namespace steering {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shape or index mismatch between operands.
struct DimensionError : Error {
  using Error::Error;
};

// Input violates a documented precondition (non-Hermitian data, signaling
// assemblage, unnormalized table, ...).
struct ValidationError : Error {
  using Error::Error;
};

// A numerical routine could not reach its accuracy target.
struct SolverFailure : Error {
  using Error::Error;
};

}  // namespace steering
