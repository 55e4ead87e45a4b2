#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qlif/collapse.hpp"
#include "qlif/qstate.hpp"
#include "qlif/spacetime.hpp"

namespace qlif {

/// Stable process exit contract.
enum class ExitCode : int { Success = 0, ToleranceFailure = 1, PreconditionError = 2 };

struct BranchConfig {
    std::string label;
    std::string metric_id;
    FourVector mass_position = FourVector::Zero();
    Complex amplitude{1.0, 0.0};
    Vector3 packet_center = Vector3::Zero();
    double packet_sigma = 1.0;
    Vector3 packet_wave_vector = Vector3::Zero();
};

struct TransformSettings {
    double metric_tolerance = 1e-10;
    double norm_tolerance = 1e-8;
    double roundtrip_tolerance = 1e-8;
    std::optional<double> check_radius;
    bool save_state = true;
};

struct GeodesicSettings {
    Vector3 initial_local_velocity = Vector3::Zero();
    double dtau = 1.0;
    int steps = 100;
};

struct CollapseSettings {
    MassDistribution distribution;
    std::vector<double> separations;
};

struct ScenarioConfig {
    UnitSystem units = UnitSystem::geometric();
    std::map<std::string, MetricField> metrics;
    std::vector<BranchConfig> branches;
    std::optional<GridSpec> grid;
    ChristoffelOptions christoffel;
    TransformSettings transform;
    std::optional<GeodesicSettings> geodesics;
    std::optional<CollapseSettings> collapse;
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

/// Strict parser: unknown keys and undefined metric ids are Config errors.
ScenarioConfig parse_scenario(const std::string& json_text);
ScenarioConfig load_scenario(const std::filesystem::path& path);

SuperposedState build_state(const ScenarioConfig& config);

struct RunOptions {
    std::filesystem::path out_dir = ".";
    std::optional<unsigned> threads;
    std::optional<std::uint64_t> seed;
};

struct CommandResult {
    ExitCode code = ExitCode::Success;
    std::string summary;
    std::optional<Error> error;
    std::vector<std::filesystem::path> files;
};

/// Writes transform_report.json, transform_report.csv, and (optionally)
/// state_qlif.bin and qlif_metric_check.csv.
CommandResult run_transform(const ScenarioConfig& config, const RunOptions& options);
/// Writes geodesic_<label>.csv per branch and geodesics_summary.json.
CommandResult run_geodesics(const ScenarioConfig& config, const RunOptions& options);
/// Writes collapse.csv and collapse_meta.json.
CommandResult run_collapse(const ScenarioConfig& config, const RunOptions& options);

struct SelftestOptions {
    std::uint64_t seed = 0;
    /// Multiplies every threshold; 0 makes every check fail.
    double tolerance_scale = 1.0;
};

struct SelftestCheck {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    bool passed = false;
};

struct SelftestResult {
    std::vector<SelftestCheck> checks;
    bool passed() const;
};

SelftestResult run_selftest(const SelftestOptions& options);

/// Machine-readable error record {"status":"error","code":...,"message":...}.
std::string error_record(const Error& e);

}  // namespace qlif
