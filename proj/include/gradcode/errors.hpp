#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace gradcode {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Construction / parameter errors.
struct DimensionMismatch : Error { using Error::Error; };
struct UnknownDesign : Error { using Error::Error; };
struct InvalidParams : Error { using Error::Error; };
struct NotAnFrc : Error { using Error::Error; };
struct ShapeMismatch : Error { using Error::Error; };

// Resource caps.
struct SizeOverflow : Error { using Error::Error; };
struct CapExceeded : Error {
    CapExceeded(const std::string& what, std::uint64_t required_, std::uint64_t cap_)
        : Error(what), required(required_), cap(cap_) {}
    std::uint64_t required;
    std::uint64_t cap;
};

// Feasibility (which precondition failed is part of the message and field).
struct Infeasible : Error {
    explicit Infeasible(const std::string& condition_)
        : Error("infeasible parameters: " + condition_), condition(condition_) {}
    std::string condition;
};

struct NumericalFailure : Error { using Error::Error; };
struct InternalInconsistency : Error { using Error::Error; };
struct PolicyInfeasible : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

}  // namespace gradcode
