#include <cmath>
#include <numbers>
#include <random>

#include "qlif/collapse.hpp"
#include "qlif/dynamics.hpp"
#include "qlif/qrf.hpp"
#include "qlif/scenario.hpp"
#include "qlif/tetrad.hpp"

namespace qlif {

namespace {

MetricField weak_field(double x_center) {
    return MetricField(WeakFieldPointMass{0.05, 0.5, Vector3(x_center, 0.0, 0.0)}, UnitSystem::geometric());
}

SuperposedState random_two_branch(std::mt19937_64& rng, const GridSpec& grid) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    std::vector<Branch> branches(2);
    const double side[2] = {-5.0, 5.0};
    const char* labels[2] = {"L", "R"};
    for (int i = 0; i < 2; ++i) {
        Branch& b = branches[i];
        b.mass_label = labels[i];
        b.metric_id = labels[i];
        b.metric = weak_field(side[i]);
        b.mass_position = FourVector(0.0, side[i], 0.0, 0.0);
        b.amplitude = std::polar(0.5 + 0.5 * std::abs(u(rng)), phase(rng));
        b.psi = gaussian_wavefunction(grid, Vector3(u(rng), u(rng), u(rng)), 1.0 + 0.3 * std::abs(u(rng)),
                                      Vector3(u(rng), u(rng), u(rng)));
    }
    return make_state(std::move(branches), grid);
}

double tetrad_check(std::mt19937_64& rng, double& duality) {
    std::uniform_real_distribution<double> u(-4.0, 4.0);
    const MetricField field = weak_field(5.0);
    double worst = 0.0;
    duality = 0.0;
    for (int n = 0; n < 100; ++n) {
        const FourVector x(u(rng), u(rng), u(rng), u(rng));
        const Tetrad t = build_tetrad(field, x);
        worst = std::max(worst, max_abs_diff(t.f.transpose() * field.eval(x) * t.f, minkowski_eta()));
        duality = std::max(duality, max_abs_diff(t.f * t.b, Matrix4::Identity()));
    }
    return worst;
}

GeodesicState perturbed_circular(double r) {
    const double m = 1.0;
    const double f = 1.0 - 2.0 * m / r;
    const double l = std::sqrt(m * r) / std::sqrt(1.0 - 3.0 * m / r);
    const double uphi = 0.95 * l / (r * r);
    GeodesicState s;
    s.x = FourVector(0.0, r, std::numbers::pi / 2.0, 0.0);
    s.u = FourVector(std::sqrt((1.0 + r * r * uphi * uphi) / f), 0.0, 0.0, uphi);
    return s;
}

double rk4_ratio() {
    const MetricField field(Schwarzschild{1.0, SchwarzschildChart::Spherical}, UnitSystem::geometric());
    const GeodesicState init = perturbed_circular(10.0);
    const double span = 160.0;
    auto end = [&](double h) {
        const Trajectory t = integrate_geodesic(field, init, h, static_cast<int>(std::lround(span / h)));
        if (!t.complete()) throw *t.error;
        return t.states.back();
    };
    const GeodesicState ref = end(2.0 / 64.0);
    auto err = [&](const GeodesicState& s) { return (s.x - ref.x).cwiseAbs().maxCoeff(); };
    return err(end(2.0)) / err(end(1.0));
}

double mass_scaling_error() {
    const MassDistribution a{UniformSphere{1.0, 1.0}, Vector3::Zero()};
    const MassDistribution b = a.shifted(Vector3(1.3, 0.0, 0.0));
    const double e1 = delta_self_energy(a, b, 1.0);
    const double e2 = delta_self_energy(a.scaled_mass(2.0), b.scaled_mass(2.0), 1.0);
    return std::abs(e2 / e1 - 4.0) / 4.0;
}

}  // namespace

bool SelftestResult::passed() const {
    for (const auto& c : checks)
        if (!c.passed) return false;
    return !checks.empty();
}

SelftestResult run_selftest(const SelftestOptions& options) {
    const double s = options.tolerance_scale;
    SelftestResult result;
    auto add = [&](std::string name, double value, double threshold) {
        result.checks.push_back({std::move(name), value, threshold, std::isfinite(value) && value < threshold});
    };
    auto guard = [&](const std::string& name, double threshold, auto&& compute) {
        try {
            add(name, compute(), threshold);
        } catch (const Error& e) {
            result.checks.push_back({name + " (" + e.what() + ")", std::nan(""), threshold, false});
        }
    };

    std::mt19937_64 rng(options.seed);
    double duality = 0.0;
    guard("tetrad_orthonormality", 1e-10 * s, [&] { return tetrad_check(rng, duality); });
    add("tetrad_duality", duality, 1e-12 * s);

    GridSpec grid;
    for (auto& axis : grid.axes) axis = GridAxis{-4.0, 4.0, 8};
    double roundtrip = 0.0;
    guard("unitarity_inner_product", 1e-8 * s, [&] {
        const SuperposedState a = random_two_branch(rng, grid);
        const SuperposedState b = random_two_branch(rng, grid);
        const auto [qa, report] = to_qlif(a);
        const auto [qb, report_b] = to_qlif(b);
        roundtrip = std::max(report.roundtrip_error, report_b.roundtrip_error);
        return std::abs(inner_product(qa, qb) - inner_product(a, b));
    });
    add("roundtrip_overlap", roundtrip, 1e-8 * s);
    guard("qlif_metric_at_origin", 1e-10 * s, [&] {
        return to_qlif(random_two_branch(rng, grid)).second.max_metric_deviation_at_origin;
    });

    // Error ratio under step halving, ideally 16; window [12, 20].
    guard("rk4_order_ratio_offset", 4.0 * s, [&] { return std::abs(rk4_ratio() - 16.0); });
    guard("collapse_mass_scaling", 1e-10 * s, [] { return mass_scaling_error(); });
    guard("translation_covariance", 1e-10 * s, [] {
        const auto p = Wavepacket1D::gaussian(-20.0, 20.0, 256, 1.0, 1.5, 0.7, 1.0);
        return translation_covariance_check(p, 16.0 * p.dx, 3.0);
    });
    return result;
}

}  // namespace qlif
