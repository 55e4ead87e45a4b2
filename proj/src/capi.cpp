#include "qlif/qlif.h"

#include <cstring>
#include <sstream>
#include <string>

#include "qlif/collapse.hpp"
#include "qlif/json_io.hpp"
#include "qlif/qrf.hpp"
#include "qlif/scenario.hpp"
#include "qlif/tetrad.hpp"

struct qlif_metric {
    qlif::MetricField field;
};

struct qlif_state {
    qlif::SuperposedState state;
};

struct qlif_scenario {
    qlif::ScenarioConfig config;
};

namespace {

thread_local std::string last_error;
thread_local std::string last_record;
thread_local std::string last_message;

// ErrorCode enumerators are declared in qlif_status order.
qlif_status status_of(qlif::ErrorCode code) { return static_cast<qlif_status>(static_cast<int>(code) + 1); }

qlif_status record(const qlif::Error& e) {
    last_error = e.what();
    last_record = qlif::error_record(e);
    return status_of(e.code());
}

template <class Body>
qlif_status guarded(Body body) {
    try {
        body();
        return QLIF_OK;
    } catch (const qlif::Error& e) {
        return record(e);
    } catch (const std::exception& e) {
        last_error = e.what();
        last_record = qlif::json_io::json{{"status", "error"}, {"code", "Internal"}, {"message", e.what()}}.dump();
        return QLIF_ERR_INTERNAL;
    }
}

void require(const void* p, const char* what) {
    if (!p) qlif::fail(qlif::ErrorCode::InvalidArgument, std::string(what) + " must not be NULL");
}

qlif::FourVector point(const double x[4]) { return {x[0], x[1], x[2], x[3]}; }

void store(const qlif::Matrix4& m, double out[16]) {
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) out[i * 4 + j] = m(i, j);
}

qlif::MassDistribution distribution(qlif_shape shape, double mass, double size) {
    qlif::MassDistribution m;
    if (shape == QLIF_UNIFORM_SPHERE)
        m.shape = qlif::UniformSphere{mass, size};
    else if (shape == QLIF_GAUSSIAN)
        m.shape = qlif::GaussianCloud{mass, size};
    else
        qlif::fail(qlif::ErrorCode::InvalidArgument, "unknown mass distribution shape");
    return m;
}

}  // namespace

extern "C" {

const char* qlif_last_error(void) { return last_error.c_str(); }
const char* qlif_last_error_record(void) { return last_record.c_str(); }
const char* qlif_last_message(void) { return last_message.c_str(); }

const char* qlif_status_name(qlif_status status) {
    switch (status) {
        case QLIF_OK: return "Ok";
        case QLIF_ERR_INTERNAL: return "Internal";
        default: break;
    }
    const int code = static_cast<int>(status) - 1;
    if (code < 0 || code > static_cast<int>(qlif::ErrorCode::Format)) return "Unknown";
    return qlif::to_string(static_cast<qlif::ErrorCode>(code)).data();
}

qlif_status qlif_metric_create(const char* metric_json, const char* units_json, qlif_metric** out) {
    return guarded([&] {
        require(metric_json, "metric_json");
        require(out, "out");
        using qlif::json_io::json;
        qlif::UnitSystem units = qlif::UnitSystem::geometric();
        try {
            if (units_json) units = qlif::json_io::units_from_json(json::parse(units_json));
            *out = new qlif_metric{qlif::json_io::metric_from_json(json::parse(metric_json), units)};
        } catch (const json::exception& e) {
            qlif::fail(qlif::ErrorCode::Config, e.what());
        }
    });
}

void qlif_metric_destroy(qlif_metric* metric) { delete metric; }

qlif_status qlif_metric_eval(const qlif_metric* metric, const double x[4], double g[16]) {
    return guarded([&] {
        require(metric, "metric");
        require(x, "x");
        require(g, "g");
        store(metric->field.eval(point(x)), g);
    });
}

qlif_status qlif_metric_sqrt_neg_det(const qlif_metric* metric, const double x[4], double* out) {
    return guarded([&] {
        require(metric, "metric");
        require(x, "x");
        require(out, "out");
        *out = metric->field.sqrt_neg_det(point(x));
    });
}

qlif_status qlif_metric_christoffel(const qlif_metric* metric, const double x[4], double gamma[64]) {
    return guarded([&] {
        require(metric, "metric");
        require(x, "x");
        require(gamma, "gamma");
        const qlif::Christoffel c = qlif::christoffel(metric->field, point(x));
        std::memcpy(gamma, c.data().data(), sizeof(double) * 64);
    });
}

qlif_status qlif_tetrad_build(const qlif_metric* metric, const double x[4], double b[16], double f[16]) {
    return guarded([&] {
        require(metric, "metric");
        require(x, "x");
        require(b, "b");
        require(f, "f");
        const qlif::Tetrad t = qlif::build_tetrad(metric->field, point(x));
        store(t.b, b);
        store(t.f, f);
    });
}

qlif_status qlif_state_load(const char* path, qlif_state** out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        *out = new qlif_state{qlif::load_state(std::string(path))};
    });
}

qlif_status qlif_state_save(const qlif_state* state, const char* path) {
    return guarded([&] {
        require(state, "state");
        require(path, "path");
        qlif::save_state(std::string(path), state->state);
    });
}

void qlif_state_destroy(qlif_state* state) { delete state; }

qlif_status qlif_state_norm(const qlif_state* state, double* out) {
    return guarded([&] {
        require(state, "state");
        require(out, "out");
        *out = state->state.norm();
    });
}

qlif_status qlif_state_frame(const qlif_state* state, qlif_frame* out) {
    return guarded([&] {
        require(state, "state");
        require(out, "out");
        *out = state->state.frame() == qlif::Frame::R ? QLIF_FRAME_R : QLIF_FRAME_P;
    });
}

qlif_status qlif_state_branch_count(const qlif_state* state, size_t* out) {
    return guarded([&] {
        require(state, "state");
        require(out, "out");
        *out = state->state.branches().size();
    });
}

qlif_status qlif_state_inner_product(const qlif_state* a, const qlif_state* b, double* re, double* im) {
    return guarded([&] {
        require(a, "a");
        require(b, "b");
        require(re, "re");
        require(im, "im");
        const qlif::Complex v = qlif::inner_product(a->state, b->state);
        *re = v.real();
        *im = v.imag();
    });
}

qlif_status qlif_state_to_qlif(const qlif_state* state, unsigned threads, qlif_state** out, double* max_deviation) {
    return guarded([&] {
        require(state, "state");
        require(out, "out");
        qlif::QrfOptions options;
        options.threads = threads == 0 ? 1 : threads;
        auto [moved, report] = qlif::to_qlif(state->state, options);
        if (max_deviation) *max_deviation = report.max_metric_deviation_at_origin;
        *out = new qlif_state{std::move(moved)};
    });
}

qlif_status qlif_state_from_qlif(const qlif_state* state, qlif_state** out) {
    return guarded([&] {
        require(state, "state");
        require(out, "out");
        *out = new qlif_state{qlif::from_qlif(state->state)};
    });
}

qlif_status qlif_collapse_energy(qlif_shape shape, double mass, double size, double d, double G, double* energy) {
    return guarded([&] {
        require(energy, "energy");
        const qlif::MassDistribution a = distribution(shape, mass, size);
        *energy = qlif::delta_self_energy(a, a.shifted(qlif::Vector3(d, 0.0, 0.0)), G);
    });
}

qlif_status qlif_collapse_time(qlif_shape shape, double mass, double size, double d, double G, double hbar,
                               double* time) {
    return guarded([&] {
        require(time, "time");
        const qlif::MassDistribution a = distribution(shape, mass, size);
        qlif::UnitSystem units = qlif::UnitSystem::geometric();
        units.G = G;
        units.hbar = hbar;
        *time = qlif::collapse_time(a, a.shifted(qlif::Vector3(d, 0.0, 0.0)), units);
    });
}

qlif_status qlif_scenario_load(const char* path, qlif_scenario** out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        *out = new qlif_scenario{qlif::load_scenario(path)};
    });
}

qlif_status qlif_scenario_parse(const char* json_text, qlif_scenario** out) {
    return guarded([&] {
        require(json_text, "json_text");
        require(out, "out");
        *out = new qlif_scenario{qlif::parse_scenario(json_text)};
    });
}

void qlif_scenario_destroy(qlif_scenario* scenario) { delete scenario; }

qlif_status qlif_scenario_build_state(const qlif_scenario* scenario, qlif_state** out) {
    return guarded([&] {
        require(scenario, "scenario");
        require(out, "out");
        *out = new qlif_state{qlif::build_state(scenario->config)};
    });
}

qlif_status qlif_run_command(const qlif_scenario* scenario, const char* command, const char* out_dir,
                             unsigned threads, int* exit_code) {
    if (exit_code) *exit_code = static_cast<int>(qlif::ExitCode::PreconditionError);
    qlif::CommandResult result;
    const qlif_status status = guarded([&] {
        require(scenario, "scenario");
        require(command, "command");
        require(out_dir, "out_dir");
        require(exit_code, "exit_code");
        qlif::RunOptions options;
        options.out_dir = out_dir;
        if (threads > 0) options.threads = threads;
        const std::string cmd = command;
        if (cmd == "transform")
            result = qlif::run_transform(scenario->config, options);
        else if (cmd == "geodesics")
            result = qlif::run_geodesics(scenario->config, options);
        else if (cmd == "collapse")
            result = qlif::run_collapse(scenario->config, options);
        else
            qlif::fail(qlif::ErrorCode::InvalidArgument, "unknown command '" + cmd + "'");
    });
    if (status != QLIF_OK) return status;
    *exit_code = static_cast<int>(result.code);
    if (result.error) return record(*result.error);
    last_message = result.summary;
    return QLIF_OK;
}

qlif_status qlif_selftest(uint64_t seed, double tolerance_scale, int* exit_code) {
    return guarded([&] {
        require(exit_code, "exit_code");
        const qlif::SelftestResult result = qlif::run_selftest({seed, tolerance_scale});
        std::ostringstream os;
        os.precision(6);
        for (const auto& c : result.checks)
            os << (c.passed ? "PASS " : "FAIL ") << c.name << " value=" << c.value << " threshold=" << c.threshold
               << "\n";
        last_message = os.str();
        *exit_code = static_cast<int>(result.passed() ? qlif::ExitCode::Success : qlif::ExitCode::ToleranceFailure);
    });
}

}  // extern "C"
