#include "qlif/error.hpp"

#include <cmath>

#include "qlif/units.hpp"

namespace qlif {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::SingularRegion: return "SingularRegion";
        case ErrorCode::StepTooLarge: return "StepTooLarge";
        case ErrorCode::DegenerateMetric: return "DegenerateMetric";
        case ErrorCode::ZeroNorm: return "ZeroNorm";
        case ErrorCode::GridMismatch: return "GridMismatch";
        case ErrorCode::OffGridTranslation: return "OffGridTranslation";
        case ErrorCode::WrongFrame: return "WrongFrame";
        case ErrorCode::MissingTetradRecord: return "MissingTetradRecord";
        case ErrorCode::QuadratureNonConvergence: return "QuadratureNonConvergence";
        case ErrorCode::InfiniteLifetime: return "InfiniteLifetime";
        case ErrorCode::Config: return "ConfigError";
        case ErrorCode::Io: return "IoError";
        case ErrorCode::Format: return "FormatError";
    }
    return "Unknown";
}

UnitSystem UnitSystem::geometric(double hbar) {
    UnitSystem u;
    u.c = 1.0;
    u.G = 1.0;
    u.hbar = hbar;
    u.name = "geometric";
    return u;
}

UnitSystem UnitSystem::si() {
    UnitSystem u;
    u.c = 299792458.0;
    u.G = 6.67430e-11;
    u.hbar = 1.054571817e-34;
    u.name = "si";
    return u;
}

void UnitSystem::validate() const {
    auto ok = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!ok(c) || !ok(G) || !ok(hbar))
        fail(ErrorCode::InvalidArgument, "unit system constants c, G, hbar must be finite and > 0");
}

}  // namespace qlif
