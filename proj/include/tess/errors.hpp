#pragma once

#include <stdexcept>
#include <string>

namespace tess {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DegenerateTriangle : Error { using Error::Error; };
struct DegenerateInput : Error { using Error::Error; };
struct InvalidPolygon : Error { using Error::Error; };
struct HypothesisViolation : Error { using Error::Error; };
struct ResourceLimit : Error { using Error::Error; };
struct UnboundedCell : Error { using Error::Error; };
struct PrecisionError : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct UnsupportedFamily : Error { using Error::Error; };
struct DivergenceError : Error { using Error::Error; };

}  // namespace tess
