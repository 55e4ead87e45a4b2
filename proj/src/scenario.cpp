#include "qlif/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "qlif/dynamics.hpp"
#include "qlif/json_io.hpp"
#include "qlif/qrf.hpp"

namespace qlif {

namespace fs = std::filesystem;
using json_io::json;

namespace {

std::string fmt(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double number(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key) || !j.at(key).is_number())
        fail(ErrorCode::Config, where + ": '" + key + "' must be a number");
    return j.at(key).get<double>();
}

Complex amplitude_from_json(const json& j) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return {j[0].get<double>(), j[1].get<double>()};
    fail(ErrorCode::Config, "branch amplitude must be a number or [re, im]");
}

MassDistribution distribution_from_json(const json& j) {
    json_io::require_known_keys(j, {"kind", "mass", "radius", "sigma", "center"}, "collapse.distribution");
    if (!j.contains("kind") || !j.at("kind").is_string())
        fail(ErrorCode::Config, "collapse.distribution: missing string 'kind'");
    const std::string kind = j.at("kind").get<std::string>();
    MassDistribution m;
    if (kind == "uniform_sphere") {
        if (j.contains("sigma")) fail(ErrorCode::Config, "collapse.distribution: uniform_sphere takes 'radius'");
        m.shape = UniformSphere{number(j, "mass", "collapse.distribution"), number(j, "radius", "collapse.distribution")};
    } else if (kind == "gaussian") {
        if (j.contains("radius")) fail(ErrorCode::Config, "collapse.distribution: gaussian takes 'sigma'");
        m.shape = GaussianCloud{number(j, "mass", "collapse.distribution"), number(j, "sigma", "collapse.distribution")};
    } else {
        fail(ErrorCode::Config, "collapse.distribution: unknown kind '" + kind + "'");
    }
    if (j.contains("center")) m.center = json_io::vector3_from_json(j.at("center"));
    try {
        m.validate();
    } catch (const Error& e) {
        fail(ErrorCode::Config, std::string("collapse.distribution: ") + e.what());
    }
    return m;
}

std::vector<double> separations_from_json(const json& j) {
    std::vector<double> out;
    if (j.is_array()) {
        for (const auto& v : j) {
            if (!v.is_number()) fail(ErrorCode::Config, "collapse.separations entries must be numbers");
            out.push_back(v.get<double>());
        }
        return out;
    }
    json_io::require_known_keys(j, {"start", "stop", "count"}, "collapse.separations");
    const double start = number(j, "start", "collapse.separations");
    const double stop = number(j, "stop", "collapse.separations");
    if (!j.contains("count") || !j.at("count").is_number_unsigned() || j.at("count").get<std::size_t>() < 1)
        fail(ErrorCode::Config, "collapse.separations.count must be a positive integer");
    const auto count = j.at("count").get<std::size_t>();
    for (std::size_t i = 0; i < count; ++i)
        out.push_back(count == 1 ? start : start + (stop - start) * static_cast<double>(i) / static_cast<double>(count - 1));
    return out;
}

void write_text(const fs::path& path, const std::string& text, CommandResult& result) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
    out << text;
    if (!out) fail(ErrorCode::Io, "failed writing " + path.string());
    result.files.push_back(path);
}

void prepare_out_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail(ErrorCode::Io, "cannot create output directory " + dir.string() + ": " + ec.message());
}

// Runs a command body; Errors become an exit-2 result and an error.json record.
template <class Body>
CommandResult guarded(const RunOptions& options, Body body) {
    CommandResult result;
    try {
        prepare_out_dir(options.out_dir);
        body(result);
    } catch (const Error& e) {
        result.code = ExitCode::PreconditionError;
        result.error = e;
        result.summary = error_record(e);
        std::ofstream out(options.out_dir / "error.json", std::ios::binary);
        if (out) out << result.summary << "\n";
    }
    return result;
}

void require_branches(const ScenarioConfig& config) {
    if (config.branches.empty()) fail(ErrorCode::Config, "scenario defines no branches");
    if (!config.grid) fail(ErrorCode::Config, "scenario defines no grid");
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& e) {
        fail(ErrorCode::Config, std::string("config is not valid JSON: ") + e.what());
    }
    try {
        json_io::require_known_keys(root,
                                    {"units", "metrics", "branches", "grid", "christoffel", "transform", "geodesics",
                                     "collapse", "seed", "threads", "description"},
                                    "config");
        ScenarioConfig cfg;
        if (root.contains("units")) cfg.units = json_io::units_from_json(root.at("units"));

        if (root.contains("metrics")) {
            const json& metrics = root.at("metrics");
            if (!metrics.is_object()) fail(ErrorCode::Config, "metrics must be an object keyed by metric id");
            for (const auto& [id, spec] : metrics.items()) cfg.metrics.emplace(id, json_io::metric_from_json(spec, cfg.units));
        }

        if (root.contains("grid")) cfg.grid = json_io::grid_from_json(root.at("grid"));
        const double c = cfg.units.c;
        const double t0 = cfg.grid ? cfg.grid->t0 : 0.0;

        if (root.contains("branches")) {
            const json& branches = root.at("branches");
            if (!branches.is_array()) fail(ErrorCode::Config, "branches must be an array");
            for (const auto& b : branches) {
                json_io::require_known_keys(b, {"label", "metric", "mass_position", "amplitude", "wavepacket"}, "branch");
                BranchConfig bc;
                bc.label = b.at("label").get<std::string>();
                bc.metric_id = b.at("metric").get<std::string>();
                if (!cfg.metrics.count(bc.metric_id))
                    fail(ErrorCode::Config, "branch " + bc.label + " references undefined metric '" + bc.metric_id + "'");
                const json& mp = b.at("mass_position");
                if (mp.is_array() && mp.size() == 3) {
                    const Vector3 p = json_io::vector3_from_json(mp);
                    bc.mass_position = FourVector(c * t0, p[0], p[1], p[2]);
                } else {
                    bc.mass_position = json_io::four_vector_from_json(mp);
                }
                if (b.contains("amplitude")) bc.amplitude = amplitude_from_json(b.at("amplitude"));
                const json& wp = b.at("wavepacket");
                json_io::require_known_keys(wp, {"center", "sigma", "wave_vector"}, "branch.wavepacket");
                bc.packet_center = json_io::vector3_from_json(wp.at("center"));
                bc.packet_sigma = number(wp, "sigma", "branch.wavepacket");
                if (wp.contains("wave_vector")) bc.packet_wave_vector = json_io::vector3_from_json(wp.at("wave_vector"));
                cfg.branches.push_back(bc);
            }
        }

        if (root.contains("christoffel")) {
            const json& ch = root.at("christoffel");
            json_io::require_known_keys(ch, {"relative_step", "richardson_tolerance", "analytic_fast_path"},
                                        "christoffel");
            if (ch.contains("relative_step")) cfg.christoffel.relative_step = number(ch, "relative_step", "christoffel");
            if (ch.contains("richardson_tolerance"))
                cfg.christoffel.richardson_tolerance = number(ch, "richardson_tolerance", "christoffel");
            if (ch.contains("analytic_fast_path")) cfg.christoffel.analytic_fast_path = ch.at("analytic_fast_path").get<bool>();
            if (!(cfg.christoffel.relative_step > 0.0 && cfg.christoffel.relative_step < 0.25))
                fail(ErrorCode::Config, "christoffel.relative_step must lie in (0, 0.25)");
        }

        if (root.contains("transform")) {
            const json& t = root.at("transform");
            json_io::require_known_keys(
                t, {"metric_tolerance", "norm_tolerance", "roundtrip_tolerance", "check_radius", "save_state"},
                "transform");
            if (t.contains("metric_tolerance")) cfg.transform.metric_tolerance = number(t, "metric_tolerance", "transform");
            if (t.contains("norm_tolerance")) cfg.transform.norm_tolerance = number(t, "norm_tolerance", "transform");
            if (t.contains("roundtrip_tolerance"))
                cfg.transform.roundtrip_tolerance = number(t, "roundtrip_tolerance", "transform");
            if (t.contains("check_radius")) cfg.transform.check_radius = number(t, "check_radius", "transform");
            if (t.contains("save_state")) cfg.transform.save_state = t.at("save_state").get<bool>();
        }

        if (root.contains("geodesics")) {
            const json& g = root.at("geodesics");
            json_io::require_known_keys(g, {"initial_local_velocity", "dtau", "steps"}, "geodesics");
            GeodesicSettings gs;
            if (g.contains("initial_local_velocity"))
                gs.initial_local_velocity = json_io::vector3_from_json(g.at("initial_local_velocity"));
            gs.dtau = number(g, "dtau", "geodesics");
            if (!g.contains("steps") || !g.at("steps").is_number_integer())
                fail(ErrorCode::Config, "geodesics.steps must be an integer");
            gs.steps = g.at("steps").get<int>();
            if (gs.steps < 0) fail(ErrorCode::Config, "geodesics.steps must be >= 0");
            cfg.geodesics = gs;
        }

        if (root.contains("collapse")) {
            const json& cj = root.at("collapse");
            json_io::require_known_keys(cj, {"distribution", "separations"}, "collapse");
            CollapseSettings cs;
            cs.distribution = distribution_from_json(cj.at("distribution"));
            cs.separations = separations_from_json(cj.at("separations"));
            cfg.collapse = cs;
        }

        if (root.contains("seed")) {
            if (!root.at("seed").is_number_unsigned()) fail(ErrorCode::Config, "seed must be a non-negative integer");
            cfg.seed = root.at("seed").get<std::uint64_t>();
        }
        if (root.contains("threads")) {
            if (!root.at("threads").is_number_unsigned()) fail(ErrorCode::Config, "threads must be a positive integer");
            cfg.threads = std::max(1u, root.at("threads").get<unsigned>());
        }
        return cfg;
    } catch (const json::exception& e) {
        fail(ErrorCode::Config, std::string("config: ") + e.what());
    }
}

ScenarioConfig load_scenario(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Config, "cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

SuperposedState build_state(const ScenarioConfig& config) {
    require_branches(config);
    std::vector<Branch> branches;
    for (const auto& bc : config.branches) {
        Branch b;
        b.amplitude = bc.amplitude;
        b.mass_label = bc.label;
        b.mass_position = bc.mass_position;
        b.metric_id = bc.metric_id;
        b.metric = config.metrics.at(bc.metric_id);
        b.psi = gaussian_wavefunction(*config.grid, bc.packet_center, bc.packet_sigma, bc.packet_wave_vector);
        branches.push_back(std::move(b));
    }
    return make_state(std::move(branches), *config.grid);
}

CommandResult run_transform(const ScenarioConfig& config, const RunOptions& options) {
    return guarded(options, [&](CommandResult& result) {
        const SuperposedState state = build_state(config);
        QrfOptions qopts;
        qopts.threads = options.threads.value_or(config.threads);
        const auto [qlif_state, report] = to_qlif(state, qopts);

        const TransformSettings& tol = config.transform;
        const bool metric_ok = report.max_metric_deviation_at_origin < tol.metric_tolerance;
        const bool norm_ok = std::abs(report.norm_after - report.norm_before) < tol.norm_tolerance;
        const bool roundtrip_ok = report.roundtrip_error < tol.roundtrip_tolerance;

        json doc;
        doc["norm_before"] = report.norm_before;
        doc["norm_after"] = report.norm_after;
        doc["max_metric_deviation_at_origin"] = report.max_metric_deviation_at_origin;
        doc["roundtrip_error"] = report.roundtrip_error;
        doc["tolerances"] = {{"metric", tol.metric_tolerance},
                             {"norm", tol.norm_tolerance},
                             {"roundtrip", tol.roundtrip_tolerance}};
        doc["checks"] = {{"metric_minkowskian_at_origin", metric_ok},
                         {"norm_preserved", norm_ok},
                         {"roundtrip", roundtrip_ok}};
        doc["frame"] = "P";
        json rows = json::array();
        std::ostringstream csv;
        csv << "mass_label,metric_id,support_points,weight_before,weight_after,max_metric_deviation_at_origin,"
               "mass_position_roundtrip,roundtrip_error\n";
        for (const auto& b : report.branches) {
            rows.push_back({{"mass_label", b.mass_label},
                            {"metric_id", b.metric_id},
                            {"support_points", b.support_points},
                            {"weight_before", b.weight_before},
                            {"weight_after", b.weight_after},
                            {"max_metric_deviation_at_origin", b.max_metric_deviation_at_origin},
                            {"mass_position_roundtrip", b.mass_position_roundtrip}});
            csv << b.mass_label << "," << b.metric_id << "," << b.support_points << "," << fmt(b.weight_before) << ","
                << fmt(b.weight_after) << "," << fmt(b.max_metric_deviation_at_origin) << ","
                << fmt(b.mass_position_roundtrip) << "," << fmt(report.roundtrip_error) << "\n";
        }
        doc["branches"] = rows;

        if (config.transform.check_radius) {
            const double radius = *config.transform.check_radius;
            std::ostringstream chk;
            chk << "mass_label,metric_id,radius,deviation_at_origin,deviation_within_radius\n";
            json table = json::array();
            for (const auto& row : check_qlif_metric(qlif_state, radius)) {
                chk << row.mass_label << "," << row.metric_id << "," << fmt(radius) << "," << fmt(row.at_origin) << ","
                    << fmt(row.within_radius) << "\n";
                table.push_back({{"mass_label", row.mass_label},
                                 {"metric_id", row.metric_id},
                                 {"deviation_at_origin", row.at_origin},
                                 {"deviation_within_radius", row.within_radius}});
            }
            doc["metric_check"] = {{"radius", radius}, {"branches", table}};
            write_text(options.out_dir / "qlif_metric_check.csv", chk.str(), result);
        }

        write_text(options.out_dir / "transform_report.json", doc.dump(2) + "\n", result);
        write_text(options.out_dir / "transform_report.csv", csv.str(), result);
        if (config.transform.save_state) {
            const fs::path p = options.out_dir / "state_qlif.bin";
            save_state(p.string(), qlif_state);
            result.files.push_back(p);
        }

        std::ostringstream summary;
        summary << "max|g'(0) - eta| = " << fmt(report.max_metric_deviation_at_origin)
                << ", norm " << fmt(report.norm_before) << " -> " << fmt(report.norm_after)
                << ", roundtrip error " << fmt(report.roundtrip_error);
        result.summary = summary.str();
        result.code = (metric_ok && norm_ok && roundtrip_ok) ? ExitCode::Success : ExitCode::ToleranceFailure;
    });
}

CommandResult run_geodesics(const ScenarioConfig& config, const RunOptions& options) {
    return guarded(options, [&](CommandResult& result) {
        if (!config.geodesics) fail(ErrorCode::Config, "config has no 'geodesics' section");
        const SuperposedState state = build_state(config);
        const GeodesicSettings& gs = *config.geodesics;
        const auto trajectories =
            geodesic_superposition(state, gs.initial_local_velocity, gs.dtau, gs.steps, config.christoffel);

        json summary = json::array();
        std::optional<Error> first_error;
        for (const auto& bt : trajectories) {
            std::ostringstream csv;
            write_trajectory_csv(csv, bt.trajectory, config.units.c);
            write_text(options.out_dir / ("geodesic_" + bt.mass_label + ".csv"), csv.str(), result);
            json row{{"mass_label", bt.mass_label},
                     {"metric_id", bt.metric_id},
                     {"states", bt.trajectory.states.size()},
                     {"complete", bt.trajectory.complete()}};
            if (!bt.trajectory.complete()) {
                row["warning"] = std::string("partial trajectory: ") + bt.trajectory.error->what();
                if (!first_error) first_error = bt.trajectory.error;
            }
            summary.push_back(row);
        }
        write_text(options.out_dir / "geodesics_summary.json", json{{"branches", summary}}.dump(2) + "\n", result);
        if (first_error) throw *first_error;
        result.summary = std::to_string(trajectories.size()) + " branch geodesics written";
    });
}

CommandResult run_collapse(const ScenarioConfig& config, const RunOptions& options) {
    return guarded(options, [&](CommandResult& result) {
        if (!config.collapse) fail(ErrorCode::Config, "config has no 'collapse' section");
        const UnitSystem& u = config.units;
        const auto rows = collapse_sweep(config.collapse->distribution, config.collapse->separations, u);

        std::ostringstream csv;
        csv << "separation,E_delta,t_delta,separation_geom,E_delta_geom,t_delta_geom,lifetime\n";
        for (const auto& r : rows) {
            csv << fmt(r.separation) << "," << fmt(r.energy) << "," << fmt(r.time) << "," << fmt(r.separation) << ","
                << fmt(u.energy_to_geometric(r.energy)) << ","
                << fmt(r.infinite ? r.time : u.time_to_geometric(r.time)) << "," << (r.infinite ? "infinite" : "finite")
                << "\n";
        }
        write_text(options.out_dir / "collapse.csv", csv.str(), result);

        json meta{{"convention",
                   "E_delta = G * iint drho(r) drho(r') / |r - r'| d3r d3r', drho = rho_a - rho_b, "
                   "no factor 1/2; t_delta = hbar / E_delta"},
                  {"units", json_io::to_json(u)},
                  {"geometric_conversion",
                   {{"length", "unchanged"}, {"energy", "G E / c^4"}, {"time", "c t"}, {"hbar", "G hbar / c^3"}}},
                  {"rows", rows.size()}};
        write_text(options.out_dir / "collapse_meta.json", meta.dump(2) + "\n", result);
        result.summary = std::to_string(rows.size()) + " separations written";
    });
}

std::string error_record(const Error& e) {
    return json{{"status", "error"}, {"code", std::string(to_string(e.code()))}, {"message", e.what()}}.dump();
}

}  // namespace qlif
