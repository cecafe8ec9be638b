#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rlvr {

enum class ErrorCode {
    InvalidArgument,
    EmptyTrajectory,
    LengthMismatch,
    NonFiniteInput,
    NegativeDistance,
    UnknownConfigKey,
    SchemaError,
    IoError,
    EmptyDataset,
};

std::string_view to_string(ErrorCode code);

/// Library error. Every failure the library reports carries one of the codes
/// above so callers (CLI, bindings) can map it without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace rlvr
