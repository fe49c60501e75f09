#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace attache {

enum class ErrorCode {
    UnknownCommunity,
    UnknownUrbanicity,
    UnknownRegion,
    UnknownMetric,
    BadParameter,
    MissingColumn,
    EmptyInput,
    ScaleViolation,
    InvalidRegistry,
    InvalidMapping,
    EmptySelection,
    NoData,
    DegenerateSample,
    Io,
};

/// Machine-readable lower snake case spelling, e.g. "unknown_community".
std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace attache
