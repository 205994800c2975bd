#pragma once

#include <stdexcept>
#include <string>

namespace gplab {

// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct DegenerateInput : Error {
    explicit DegenerateInput(const std::string& msg) : Error(msg) {}
};

struct EmptyCloud : Error {
    explicit EmptyCloud(const std::string& msg) : Error(msg) {}
};

struct DimensionMismatch : Error {
    explicit DimensionMismatch(const std::string& msg) : Error(msg) {}
};

struct InvalidDimension : Error {
    explicit InvalidDimension(const std::string& msg) : Error(msg) {}
};

struct ZeroVector : Error {
    explicit ZeroVector(const std::string& msg) : Error(msg) {}
};

struct InvalidAngle : Error {
    explicit InvalidAngle(const std::string& msg) : Error(msg) {}
};

struct RejectionBudgetExceeded : Error {
    explicit RejectionBudgetExceeded(const std::string& msg) : Error(msg) {}
};

struct ConstructionFailure : Error {
    explicit ConstructionFailure(const std::string& msg) : Error(msg) {}
};

struct InvalidN : Error {
    explicit InvalidN(const std::string& msg) : Error(msg) {}
};

struct MethodMismatch : Error {
    explicit MethodMismatch(const std::string& msg) : Error(msg) {}
};

struct NonPositiveValue : Error {
    explicit NonPositiveValue(const std::string& msg) : Error(msg) {}
};

struct TooFewSamples : Error {
    explicit TooFewSamples(const std::string& msg) : Error(msg) {}
};

struct DegenerateSample : Error {
    explicit DegenerateSample(const std::string& msg) : Error(msg) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

struct ScaffoldFormatError : Error {
    explicit ScaffoldFormatError(const std::string& msg) : Error(msg) {}
};

}  // namespace gplab
