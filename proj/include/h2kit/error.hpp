/// @file error.hpp
/// @brief Exception types thrown by h2kit.
///
/// Every error derives from h2kit::Error so callers that only care about
/// "something went wrong in the toolkit" can catch one type.
#pragma once

#include <stdexcept>
#include <string>

namespace h2kit {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Index outside the grid.
class BoundsError : public Error { using Error::Error; };
/// Grids or sample shapes that must agree do not.
class ShapeError : public Error { using Error::Error; };
/// Argument outside the mathematical domain of an operation.
class DomainError : public Error { using Error::Error; };
/// Data violates a physical or structural invariant.
class ValidationError : public Error { using Error::Error; };
/// Malformed file contents (bad magic, wrong columns, trailing bytes).
class FormatError : public Error { using Error::Error; };
/// File ended before the declared payload.
class TruncationError : public FormatError { using FormatError::FormatError; };
class IoError : public Error { using Error::Error; };
/// Reduction over data that carries no information (flat profile, zero mean).
class DegenerateError : public Error { using Error::Error; };
class UnknownSpeciesError : public Error { using Error::Error; };
/// Table lookup outside the tabulated hull.
class ExtrapolationError : public Error { using Error::Error; };
/// Domain too small for the requested extraction.
class SizeError : public Error { using Error::Error; };
/// Synthetic flame front does not fit in the domain.
class PlacementError : public Error { using Error::Error; };

} // namespace h2kit
