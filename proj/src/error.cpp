#include "rlvr/error.hpp"

namespace rlvr {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "INVALID_ARGUMENT";
        case ErrorCode::EmptyTrajectory: return "EMPTY_TRAJECTORY";
        case ErrorCode::LengthMismatch: return "LENGTH_MISMATCH";
        case ErrorCode::NonFiniteInput: return "NON_FINITE_INPUT";
        case ErrorCode::NegativeDistance: return "NEGATIVE_DISTANCE";
        case ErrorCode::UnknownConfigKey: return "UNKNOWN_CONFIG_KEY";
        case ErrorCode::SchemaError: return "SCHEMA_ERROR";
        case ErrorCode::IoError: return "IO_ERROR";
        case ErrorCode::EmptyDataset: return "EMPTY_DATASET";
    }
    return "UNKNOWN";
}

}  // namespace rlvr
