#pragma once

#include <stdexcept>
#include <string>

namespace ecokin {

/// Base class for every error raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A subset enumeration was asked for more points than the enumeration cap.
struct CardinalityError : Error {
  using Error::Error;
};

/// Two configurations that must be disjoint share a point.
struct OverlapError : Error {
  using Error::Error;
};

/// An integral that must be finite diverges (e.g. a power law with delta <= d).
struct DivergenceError : Error {
  using Error::Error;
};

/// A hypothesis of an existence result cannot hold for the given kernels
/// (e.g. the dispersal kernel reaches farther than the suppression kernel).
struct StructuralError : Error {
  using Error::Error;
};

/// Invalid argument or parameter value.
struct ParameterError : Error {
  using Error::Error;
};

/// Iterative solver failed to converge.
struct ConvergenceError : Error {
  using Error::Error;
};

/// Time stepping produced values beyond the blow-up threshold.
struct BlowUpError : Error {
  using Error::Error;
};

}  // namespace ecokin
