#include "attache/error.hpp"

namespace attache {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::UnknownCommunity: return "unknown_community";
        case ErrorCode::UnknownUrbanicity: return "unknown_urbanicity";
        case ErrorCode::UnknownRegion: return "unknown_region";
        case ErrorCode::UnknownMetric: return "unknown_metric";
        case ErrorCode::BadParameter: return "bad_parameter";
        case ErrorCode::MissingColumn: return "missing_column";
        case ErrorCode::EmptyInput: return "empty_input";
        case ErrorCode::ScaleViolation: return "scale_violation";
        case ErrorCode::InvalidRegistry: return "invalid_registry";
        case ErrorCode::InvalidMapping: return "invalid_mapping";
        case ErrorCode::EmptySelection: return "empty_selection";
        case ErrorCode::NoData: return "no_data";
        case ErrorCode::DegenerateSample: return "degenerate_sample";
        case ErrorCode::Io: return "io_error";
    }
    return "error";
}

}  // namespace attache
