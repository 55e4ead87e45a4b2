#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qlif {

enum class ErrorCode {
    InvalidArgument,
    SingularRegion,
    StepTooLarge,
    DegenerateMetric,
    ZeroNorm,
    GridMismatch,
    OffGridTranslation,
    WrongFrame,
    MissingTetradRecord,
    QuadratureNonConvergence,
    InfiniteLifetime,
    Config,
    Io,
    Format,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the core library. The code is stable and maps
/// one-to-one onto the C API status values.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace qlif
