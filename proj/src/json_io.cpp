#include "qlif/json_io.hpp"

#include <cmath>
#include <set>

namespace qlif::json_io {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double number(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) fail(ErrorCode::Config, where + ": missing key '" + key + "'");
    const json& v = j.at(key);
    if (!v.is_number()) fail(ErrorCode::Config, where + ": key '" + key + "' must be a number");
    return v.get<double>();
}

double number_or(const json& j, const char* key, double fallback, const std::string& where) {
    return j.contains(key) ? number(j, key, where) : fallback;
}

template <int N>
Eigen::Matrix<double, N, 1> fixed_vector(const json& j, const char* what) {
    if (!j.is_array() || j.size() != static_cast<std::size_t>(N))
        fail(ErrorCode::Config, std::string(what) + " must be an array of " + std::to_string(N) + " numbers");
    Eigen::Matrix<double, N, 1> v;
    for (int i = 0; i < N; ++i) {
        if (!j[i].is_number()) fail(ErrorCode::Config, std::string(what) + " entries must be numbers");
        v[i] = j[i].get<double>();
    }
    return v;
}

}  // namespace

void require_known_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!obj.is_object()) fail(ErrorCode::Config, where + " must be an object");
    std::set<std::string> known(allowed.begin(), allowed.end());
    for (const auto& [key, value] : obj.items())
        if (!known.count(key)) fail(ErrorCode::Config, where + ": unknown key '" + key + "'");
}

json to_json(const UnitSystem& u) {
    return json{{"name", u.name}, {"c", u.c}, {"G", u.G}, {"hbar", u.hbar}};
}

UnitSystem units_from_json(const json& j) {
    require_known_keys(j, {"preset", "name", "c", "G", "hbar"}, "units");
    UnitSystem u;
    const std::string preset = j.contains("preset") ? j.at("preset").get<std::string>() : "";
    if (preset == "si") {
        u = UnitSystem::si();
    } else if (preset == "geometric") {
        u = UnitSystem::geometric(number_or(j, "hbar", 1.0, "units"));
    } else if (preset.empty()) {
        u.c = number(j, "c", "units");
        u.G = number(j, "G", "units");
        u.hbar = number(j, "hbar", "units");
        u.name = j.contains("name") ? j.at("name").get<std::string>() : "custom";
    } else {
        fail(ErrorCode::Config, "units: unknown preset '" + preset + "'");
    }
    if (!preset.empty()) {
        if (j.contains("c") || j.contains("G"))
            fail(ErrorCode::Config, "units: a preset fixes c and G; drop the explicit values");
        if (preset == "si" && j.contains("hbar")) u.hbar = number(j, "hbar", "units");
        if (j.contains("name")) u.name = j.at("name").get<std::string>();
    }
    try {
        u.validate();
    } catch (const Error& e) {
        fail(ErrorCode::Config, std::string("units: ") + e.what());
    }
    return u;
}

json to_json(const MetricField& m) {
    return std::visit(
        overloaded{
            [](const Minkowski&) { return json{{"kind", "minkowski"}}; },
            [](const WeakFieldPointMass& w) {
                return json{{"kind", "weak_field_point_mass"},
                            {"mass", w.mass},
                            {"softening", w.softening},
                            {"center", {w.center[0], w.center[1], w.center[2]}}};
            },
            [](const Schwarzschild& s) {
                return json{{"kind", "schwarzschild"},
                            {"mass", s.mass},
                            {"chart", s.chart == SchwarzschildChart::Spherical ? "spherical" : "cartesian"},
                            {"center", {s.center[0], s.center[1], s.center[2]}},
                            {"horizon_margin", s.horizon_margin}};
            },
        },
        m.kind());
}

MetricField metric_from_json(const json& j, const UnitSystem& units) {
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
        fail(ErrorCode::Config, "metric: expected an object with a string 'kind'");
    const std::string kind = j.at("kind").get<std::string>();
    try {
        if (kind == "minkowski") {
            require_known_keys(j, {"kind"}, "metric(minkowski)");
            return MetricField(Minkowski{}, units);
        }
        if (kind == "weak_field_point_mass") {
            require_known_keys(j, {"kind", "mass", "softening", "center"}, "metric(weak_field_point_mass)");
            WeakFieldPointMass w;
            w.mass = number(j, "mass", "metric");
            w.softening = number_or(j, "softening", 0.0, "metric");
            if (j.contains("center")) w.center = fixed_vector<3>(j.at("center"), "metric center");
            return MetricField(w, units);
        }
        if (kind == "schwarzschild") {
            require_known_keys(j, {"kind", "mass", "chart", "center", "horizon_margin"}, "metric(schwarzschild)");
            Schwarzschild s;
            s.mass = number(j, "mass", "metric");
            const std::string chart = j.contains("chart") ? j.at("chart").get<std::string>() : "cartesian";
            if (chart == "spherical")
                s.chart = SchwarzschildChart::Spherical;
            else if (chart == "cartesian")
                s.chart = SchwarzschildChart::Cartesian;
            else
                fail(ErrorCode::Config, "metric: unknown Schwarzschild chart '" + chart + "'");
            if (j.contains("center")) s.center = fixed_vector<3>(j.at("center"), "metric center");
            s.horizon_margin = number_or(j, "horizon_margin", s.horizon_margin, "metric");
            return MetricField(s, units);
        }
    } catch (const json::exception& e) {
        fail(ErrorCode::Config, std::string("metric: ") + e.what());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::Config) throw;
        fail(ErrorCode::Config, std::string("metric: ") + e.what());
    }
    fail(ErrorCode::Config, "metric: unknown kind '" + kind + "'");
}

json to_json(const GridSpec& g) {
    json axes = json::array();
    for (const auto& a : g.axes) axes.push_back(json{{"lo", a.lo}, {"hi", a.hi}, {"n", a.n}});
    return json{{"axes", axes}, {"t0", g.t0}};
}

GridSpec grid_from_json(const json& j) {
    GridSpec g;
    if (j.contains("axes")) {
        require_known_keys(j, {"axes", "t0"}, "grid");
        const json& axes = j.at("axes");
        if (!axes.is_array() || axes.size() != 3) fail(ErrorCode::Config, "grid.axes must hold 3 axes");
        for (std::size_t i = 0; i < 3; ++i) {
            require_known_keys(axes[i], {"lo", "hi", "n"}, "grid.axes");
            g.axes[i].lo = number(axes[i], "lo", "grid.axes");
            g.axes[i].hi = number(axes[i], "hi", "grid.axes");
            const json& n = axes[i].at("n");
            if (!n.is_number_unsigned()) fail(ErrorCode::Config, "grid.axes.n must be a non-negative integer");
            g.axes[i].n = n.get<std::size_t>();
        }
    } else {
        // Compact form: {"lo": [..], "hi": [..], "n": [..], "t0": ..}
        require_known_keys(j, {"lo", "hi", "n", "t0"}, "grid");
        const Vector3 lo = fixed_vector<3>(j.at("lo"), "grid.lo");
        const Vector3 hi = fixed_vector<3>(j.at("hi"), "grid.hi");
        const json& n = j.at("n");
        if (!n.is_array() || n.size() != 3) fail(ErrorCode::Config, "grid.n must be an array of 3 integers");
        for (std::size_t i = 0; i < 3; ++i) {
            if (!n[i].is_number_unsigned()) fail(ErrorCode::Config, "grid.n entries must be non-negative integers");
            g.axes[i] = GridAxis{lo[static_cast<int>(i)], hi[static_cast<int>(i)], n[i].get<std::size_t>()};
        }
    }
    g.t0 = number_or(j, "t0", 0.0, "grid");
    try {
        g.validate();
    } catch (const Error& e) {
        fail(ErrorCode::Config, std::string("grid: ") + e.what());
    }
    return g;
}

json to_json(const FourVector& v) {
    return json::array({v[0], v[1], v[2], v[3]});
}

FourVector four_vector_from_json(const json& j) {
    return fixed_vector<4>(j, "four-vector");
}

Vector3 vector3_from_json(const json& j) {
    return fixed_vector<3>(j, "3-vector");
}

}  // namespace qlif::json_io
