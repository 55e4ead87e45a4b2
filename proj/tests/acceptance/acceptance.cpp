// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "qlif/collapse.hpp"
#include "qlif/dynamics.hpp"
#include "qlif/qrf.hpp"
#include "qlif/scenario.hpp"
#include "qlif/tetrad.hpp"
#include "support/oracles.hpp"
#include "support/orbits.hpp"

using namespace qlif;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, const std::string& title, bool ok, const std::string& detail) {
    std::printf("%s  [%d] %s: %s\n", ok ? "PASS" : "FAIL", id, title.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

void run(int id, const std::string& title, const std::function<bool(std::ostringstream&)>& body) {
    std::ostringstream detail;
    detail.precision(3);
    bool ok = false;
    try {
        ok = body(detail);
    } catch (const std::exception& e) {
        detail << "exception: " << e.what();
    }
    report(id, title, ok, detail.str());
}

const UnitSystem geo = UnitSystem::geometric();

GridSpec cube(double half, std::size_t n) {
    GridSpec g;
    for (auto& a : g.axes) a = GridAxis{-half, half, n};
    return g;
}

MetricField weak(double x) { return MetricField(WeakFieldPointMass{0.05, 0.5, Vector3(x, 0.0, 0.0)}, geo); }

Branch branch(const std::string& label, const MetricField& m, double mass_x, std::vector<Complex> psi, Complex amp) {
    Branch b;
    b.amplitude = amp;
    b.mass_label = label;
    b.metric_id = "g_" + label;
    b.metric = m;
    b.mass_position = FourVector(0.0, mass_x, 0.0, 0.0);
    b.psi = std::move(psi);
    return b;
}

SuperposedState random_two_branch(const GridSpec& g, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    auto psi = [&] {
        return gaussian_wavefunction(g, Vector3(u(rng), u(rng), u(rng)), 1.0 + 0.3 * std::abs(u(rng)),
                                     Vector3(u(rng), u(rng), u(rng)));
    };
    auto amp = [&] { return std::polar(0.5 + std::abs(u(rng)), 3.0 * u(rng)); };
    return make_state({branch("L", weak(-5.0), -5.0, psi(), amp()), branch("R", weak(5.0), 5.0, psi(), amp())}, g);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool criterion_qlif_existence(std::ostringstream& out) {
    const ScenarioConfig cfg = load_scenario(fs::path(QLIF_CONFIG_DIR) / "two_branch_weak_field.json");
    const auto t0 = std::chrono::steady_clock::now();
    const SuperposedState s = build_state(cfg);
    const auto [p, report] = to_qlif(s);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool ok = cfg.grid->size() == 64u * 64u * 64u && report.branches.size() == 2;
    out << "grid " << cfg.grid->axes[0].n << "^3, per-branch max|g'(0)-eta| =";
    for (const auto& b : report.branches) {
        out << " " << b.mass_label << ":" << b.max_metric_deviation_at_origin;
        ok = ok && b.max_metric_deviation_at_origin < 1e-10;
    }
    out << " (< 1e-10), transform time " << secs << " s (< 10 s)";
    return ok && secs < 10.0;
}

bool criterion_unitarity(std::ostringstream& out) {
    const GridSpec g = cube(4.0, 12);
    std::mt19937_64 rng(2024);
    double worst_ip = 0.0;
    double worst_rt = 0.0;
    for (int n = 0; n < 20; ++n) {
        const SuperposedState a = random_two_branch(g, rng);
        const SuperposedState b = random_two_branch(g, rng);
        const SuperposedState pa = to_qlif(a).first;
        const SuperposedState pb = to_qlif(b).first;
        worst_ip = std::max(worst_ip, std::abs(inner_product(pa, pb) - inner_product(a, b)));
        worst_rt = std::max(worst_rt, std::abs(inner_product(a, from_qlif(pa)) - Complex(1.0, 0.0)));
    }
    out << "20 random states: max|<Ta|Tb> - <a|b>| = " << worst_ip << ", max|<Psi|T^-1 T Psi> - 1| = " << worst_rt
        << " (< 1e-8)";
    return worst_ip < 1e-8 && worst_rt < 1e-8;
}

bool criterion_classicality(std::ostringstream& out) {
    const GridSpec g = cube(4.0, 16);
    const MetricField w = weak(5.0);
    const FourVector m(0.0, 5.0, 0.0, 0.0);
    const SuperposedState s =
        make_state({branch("S", w, 5.0, gaussian_wavefunction(g, Vector3(0.3, 0.0, 0.0), 1.0), {1.0, 0.0})}, g);
    const SuperposedState p = to_qlif(s).first;
    const std::size_t N = g.size();
    double worst = 0.0;
    for (std::size_t n = 0; n < N; ++n) {
        const FourVector x = g.event(n, 1.0);
        const Tetrad t = build_tetrad(w, x);
        const PointFrame& pf = p.branches()[0].point_frames[N - 1 - n];
        worst = std::max({worst, max_abs_diff(pf.b, t.b), max_abs_diff(pf.f, t.f),
                          (pf.mass_local - t.b * (m - x)).cwiseAbs().maxCoeff(),
                          std::abs(p.branches()[0].psi[N - 1 - n] - s.branches()[0].psi[n])});
    }
    out << "max pointwise difference from the classical tetrad map over " << N << " points = " << worst
        << " (< 1e-12)";
    return worst < 1e-12;
}

bool criterion_tetrad(std::ostringstream& out) {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-8.0, 8.0);
    std::uniform_real_distribution<double> r(3.0, 30.0);
    std::uniform_real_distribution<double> th(0.2, 2.9);
    const MetricField flat = MetricField::minkowski();
    const MetricField w = weak(1.0);
    const MetricField sph(Schwarzschild{1.0, SchwarzschildChart::Spherical}, geo);
    const MetricField cart(Schwarzschild{1.0, SchwarzschildChart::Cartesian}, geo);
    double ortho = 0.0;
    double dual = 0.0;
    auto check = [&](const MetricField& f, const FourVector& x) {
        const Tetrad t = build_tetrad(f, x);
        ortho = std::max(ortho, max_abs_diff(t.f.transpose() * f.eval(x) * t.f, minkowski_eta()));
        dual = std::max(dual, max_abs_diff(t.f * t.b, Matrix4::Identity()));
    };
    for (int n = 0; n < 100; ++n) {
        check(flat, FourVector(u(rng), u(rng), u(rng), u(rng)));
        check(w, FourVector(u(rng), u(rng), u(rng), u(rng)));
        check(sph, FourVector(u(rng), r(rng), th(rng), u(rng)));
        const Vector3 d = Vector3(u(rng), u(rng), u(rng)).normalized() * r(rng);
        check(cart, FourVector(u(rng), d[0], d[1], d[2]));
    }
    // First-order remainder: deviation(2r) / deviation(r) for several anchors and radii.
    double lo = 1e9;
    double hi = 0.0;
    for (const auto& [f, x] : {std::pair{w, FourVector(0.0, 0.5, 0.2, -0.3)},
                               std::pair{cart, FourVector(0.0, 4.0, 3.0, 1.0)},
                               std::pair{sph, FourVector(0.0, 10.0, 1.0, 0.0)}}) {
        const Tetrad t = build_tetrad(f, x);
        const FourVector dir = FourVector(0.0, 1.0, 0.5, 0.25).normalized();
        for (double rad : {1e-3, 1e-2}) {
            const double ratio = max_abs_diff(pulled_back_metric(t, f, 2.0 * rad * dir), minkowski_eta()) /
                                 max_abs_diff(pulled_back_metric(t, f, rad * dir), minkowski_eta());
            lo = std::min(lo, ratio);
            hi = std::max(hi, ratio);
        }
    }
    out << "400 points: max|f^T g f - eta| = " << ortho << " (< 1e-10), max|f b - 1| = " << dual
        << " (< 1e-12), doubling-radius ratio in [" << lo << ", " << hi << "] (2 +- 20%)";
    return ortho < 1e-10 && dual < 1e-12 && lo >= 1.6 && hi <= 2.4;
}

bool criterion_equivalence(std::ostringstream& out) {
    // Newtonian drop near Earth, 1 s.
    const UnitSystem si = UnitSystem::si();
    const double mass = 5.972e24;
    const double z0 = 6.371e6;
    const MetricField earth(WeakFieldPointMass{mass, 0.0}, si);
    GeodesicState s;
    s.x = FourVector(0.0, 0.0, 0.0, z0);
    s.u = velocity_from_local(earth, s.x, Vector3::Zero());
    const Trajectory drop = integrate_geodesic(earth, s, 1e-2, 100);
    const double g = si.G * mass / (z0 * z0);
    double drop_err = 0.0;
    for (std::size_t i = 1; i < drop.states.size(); ++i) {
        const double t = drop.states[i].x[0] / si.c;
        const double expected = z0 - oracle::newtonian_drop(z0, g, t);
        drop_err = std::max(drop_err, std::abs((z0 - drop.states[i].x[3]) - expected) / expected);
    }

    // Periapsis advance, a = 1000 M, e = 0.1.
    const double a = 1000.0;
    const double e = 0.1;
    const MetricField bh = orbits::schwarzschild(1.0);
    const double period = 2.0 * std::numbers::pi * std::pow(a, 1.5);
    const Trajectory orbit = integrate_geodesic(bh, orbits::at_periapsis(1.0, a * (1.0 - e), a * (1.0 + e)), 20.0,
                                                static_cast<int>(1.2 * period / 20.0));
    const auto advance = orbits::periapsis_advance(orbit);
    const double expected = oracle::perihelion_advance(1.0, a, e);
    const double peri_err = advance ? std::abs(*advance - expected) / expected : 1.0;

    const double ratio = orbits::rk4_step_halving_ratio(bh, orbits::at_periapsis(1.0, 9.0, 12.0), 2.0, 160.0);

    out << "drop rel. error " << drop_err << " (< 1e-5); periapsis advance " << (advance ? *advance : NAN)
        << " vs 6piM/(a(1-e^2)) = " << expected << ", rel. error " << peri_err
        << " (< 2%, a = 1000M, e = 0.1); RK4 halving ratio " << ratio << " (in [12, 20])";
    return drop.complete() && drop_err < 1e-5 && peri_err < 0.02 && ratio >= 12.0 && ratio <= 20.0;
}

bool criterion_flat_stationarity(std::ostringstream& out) {
    const auto p = Wavepacket1D::gaussian(-40.0, 40.0, 1024, 1.0, 1.0, 0.6, 1.0);
    double commutator = 0.0;
    for (double steps : {1.0, 13.0, -100.0})
        for (double t : {0.1, 1.0, 5.0}) commutator = std::max(commutator, translation_covariance_check(p, steps * p.dx, t));
    const auto q = Wavepacket1D::gaussian(-40.0, 40.0, 1024, 0.0, 1.0, 0.0, 1.0);
    double spread = 0.0;
    for (double t : {0.5, 2.0, 5.0})
        spread = std::max(spread, std::abs(evolve_free(q, t).width() - oracle::gaussian_width(1.0, t, 1.0, 1.0)));
    out << "max commutator norm " << commutator << " (< 1e-10), max width error " << spread << " (< 1e-6)";
    return commutator < 1e-10 && spread < 1e-6;
}

bool criterion_collapse(std::ostringstream& out) {
    const MassDistribution a{UniformSphere{1.0, 1.0}, Vector3::Zero()};
    double mc_err = 0.0;
    for (double d : {1.0, 1.5, 2.5, 4.0}) {
        const auto mc = oracle::sphere_delta_energy_mc(1.0, 1.0, d, 1.0, 4'000'000, 12345);
        const double e = delta_self_energy(a, a.shifted(Vector3(d, 0.0, 0.0)), 1.0);
        mc_err = std::max(mc_err, std::abs(e - mc.value) / e);
    }
    const double zero = delta_self_energy(a, a, 1.0);
    const MassDistribution b = a.shifted(Vector3(0.7, 0.0, 0.0));
    const double e1 = delta_self_energy(a, b, 1.0);
    const double e3 = delta_self_energy(a.scaled_mass(3.0), b.scaled_mass(3.0), 1.0);
    const double scaling = std::abs(e3 / (9.0 * e1) - 1.0);
    const UnitSystem si = UnitSystem::si();
    const MassDistribution small{UniformSphere{1e-9, 1e-6}, Vector3::Zero()};
    const MassDistribution moved = small.shifted(Vector3(4e-7, 0.0, 0.0));
    const double es = delta_self_energy(small, moved, si.G);
    const double ts = collapse_time(small, moved, si);
    const bool exact = ts == si.hbar / es;
    out << "max rel. deviation from Monte Carlo (4e6 samples, d in {R, 1.5R, 2.5R, 4R}) " << mc_err
        << " (< 0.5%); E(0) = " << zero << "; M^2 scaling error " << scaling << " (< 1e-10); t = hbar/E "
        << (exact ? "exact" : "inexact") << " (t E - hbar = " << ts * es - si.hbar << ")";
    return mc_err < 0.005 && zero == 0.0 && scaling < 1e-10 && exact;
}

bool criterion_determinism(std::ostringstream& out) {
    ScenarioConfig cfg = load_scenario(fs::path(QLIF_CONFIG_DIR) / "two_branch_weak_field.json");
    for (auto& axis : cfg.grid->axes) axis.n = 16;
    const ScenarioConfig collapse = load_scenario(fs::path(QLIF_CONFIG_DIR) / "collapse_sphere_si.json");
    const fs::path base = fs::temp_directory_path() / "qlif_acceptance_determinism";
    fs::remove_all(base);
    for (const char* run : {"a", "b"}) {
        RunOptions o;
        o.out_dir = base / run;
        o.threads = run[0] == 'a' ? 1u : 4u;
        if (run_transform(cfg, o).code != ExitCode::Success) return false;
        if (run_geodesics(cfg, o).code != ExitCode::Success) return false;
        if (run_collapse(collapse, o).code != ExitCode::Success) return false;
    }
    std::size_t files = 0;
    std::size_t same = 0;
    for (const auto& entry : fs::directory_iterator(base / "a")) {
        ++files;
        if (slurp(entry.path()) == slurp(base / "b" / entry.path().filename())) ++same;
    }
    fs::remove_all(base);
    out << same << "/" << files << " output files byte-identical across two runs (1 vs 4 threads)";
    return files > 0 && same == files;
}

}  // namespace

int main() {
    run(1, "QLIF existence", criterion_qlif_existence);
    run(2, "Unitarity", criterion_unitarity);
    run(3, "Branch classicality", criterion_classicality);
    run(4, "Tetrad correctness", criterion_tetrad);
    run(5, "Equivalence Principle per branch", criterion_equivalence);
    run(6, "Flat-space stationarity", criterion_flat_stationarity);
    run(7, "Collapse time", criterion_collapse);
    run(8, "Determinism", criterion_determinism);
    std::printf("%d of 8 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
