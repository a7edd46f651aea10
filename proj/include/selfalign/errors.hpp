#pragma once

#include <stdexcept>

namespace selfalign {

// Base for every recoverable error this library raises.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : Error { using Error::Error; };
struct DanglingReference : Error { using Error::Error; };
struct EmptyName : Error { using Error::Error; };
struct MissingEntity : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct ZeroVector : Error { using Error::Error; };
struct DegenerateNorm : Error { using Error::Error; };
struct NormViolation : Error { using Error::Error; };
struct ShapeMismatch : Error { using Error::Error; };
struct QueueNotWarm : Error { using Error::Error; };
struct EmptyNegatives : Error { using Error::Error; };
struct CapacityViolation : Error { using Error::Error; };
struct MissingQuery : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

}  // namespace selfalign
