#pragma once

#include <stdexcept>
#include <string>

namespace cannings {

// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// profile
struct NonMonotonePositions : Error { using Error::Error; };
struct NegativeValue : Error { using Error::Error; };
struct InteriorZero : Error { using Error::Error; };
struct SigmaZeroInside : Error { using Error::Error; };
struct InvalidProfilePair : Error { using Error::Error; };

// offspring
struct LawProfileMismatch : Error { using Error::Error; };
struct InfeasibleEvent : Error { using Error::Error; };

// tree
struct KTooLarge : Error { using Error::Error; };

// coalescent
struct InfeasibleCount : Error { using Error::Error; };
struct DeltaOutOfRange : Error { using Error::Error; };

// limit
struct HeightOutOfRange : Error { using Error::Error; };

// verify
struct TooFewSamples : Error { using Error::Error; };

// cli / config
struct ParseError : Error { using Error::Error; };

struct ValidationError : Error {
  std::string field;
  std::string reason;
  ValidationError(std::string field_, std::string reason_)
      : Error("config field '" + field_ + "': " + reason_),
        field(std::move(field_)),
        reason(std::move(reason_)) {}
};

}  // namespace cannings
