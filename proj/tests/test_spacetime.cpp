#include "doctest.h"

#include <cmath>
#include <random>

#include "qlif/spacetime.hpp"
#include "support/oracles.hpp"

using namespace qlif;

namespace {

const UnitSystem geo = UnitSystem::geometric();

MetricField schwarzschild_spherical(double m) {
    return MetricField(Schwarzschild{m, SchwarzschildChart::Spherical}, geo);
}

std::vector<MetricField> catalog() {
    return {MetricField::minkowski(), MetricField(WeakFieldPointMass{0.05, 0.5, Vector3(1.0, 0.0, 0.0)}, geo),
            MetricField(Schwarzschild{1.0, SchwarzschildChart::Cartesian}, geo), schwarzschild_spherical(1.0)};
}

// Random valid point for each catalog entry.
FourVector random_point(const MetricField& f, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    if (const auto* s = std::get_if<Schwarzschild>(&f.kind())) {
        std::uniform_real_distribution<double> r(3.0, 40.0);
        std::uniform_real_distribution<double> th(0.2, 2.9);
        std::uniform_real_distribution<double> ph(0.0, 6.0);
        if (s->chart == SchwarzschildChart::Spherical) return {u(rng), r(rng), th(rng), ph(rng)};
        Vector3 dir(u(rng), u(rng), u(rng));
        dir = dir.normalized() * r(rng);
        return {u(rng), dir[0], dir[1], dir[2]};
    }
    return {u(rng), u(rng), u(rng), u(rng)};
}

}  // namespace

TEST_CASE("minkowski metric is eta everywhere with unit volume element") {
    const MetricField m = MetricField::minkowski();
    const FourVector x(3.0, -1.0, 2.0, 7.5);
    CHECK((m.eval(x) - minkowski_eta()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(m.sqrt_neg_det(x) == 1.0);
    CHECK(christoffel(m, x).max_abs() == 0.0);
}

TEST_CASE("weak field is asymptotically flat") {
    const MetricField w(WeakFieldPointMass{1.0, 0.1}, geo);
    const FourVector far(0.0, 1e13, 0.0, 0.0);
    CHECK((w.eval(far) - minkowski_eta()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("weak field components and volume element") {
    const MetricField w(WeakFieldPointMass{0.02, 0.5, Vector3(0.5, 0.0, 0.0)}, geo);
    const FourVector x(0.0, 2.0, 1.0, -1.0);
    const double r = std::sqrt(1.5 * 1.5 + 1.0 + 1.0 + 0.25);
    const double phi = -0.02 / r;
    const Matrix4 g = w.eval(x);
    CHECK(g(0, 0) == doctest::Approx(-(1.0 + 2.0 * phi)).epsilon(1e-15));
    CHECK(g(1, 1) == doctest::Approx(1.0 - 2.0 * phi).epsilon(1e-15));
    CHECK(g(0, 1) == 0.0);
    const double expected = std::pow(1.0 - 2.0 * phi, 1.5) * std::sqrt(1.0 + 2.0 * phi);
    CHECK(std::abs(w.sqrt_neg_det(x) - expected) < 1e-12);
}

TEST_CASE("schwarzschild g00 at ten Schwarzschild radii") {
    const MetricField s = schwarzschild_spherical(1.0);
    const double rs = 2.0;
    const FourVector x(0.0, 10.0 * rs, 1.0, 0.3);
    CHECK(s.eval(x)(0, 0) == doctest::Approx(oracle::schwarzschild_g00(rs, 10.0 * rs)).epsilon(1e-15));
    CHECK(s.eval(x)(0, 0) == doctest::Approx(-0.9).epsilon(1e-15));

    const MetricField cart(Schwarzschild{1.0, SchwarzschildChart::Cartesian}, geo);
    CHECK(cart.eval(FourVector(0.0, 0.0, 20.0, 0.0))(0, 0) == doctest::Approx(-0.9).epsilon(1e-15));
}

TEST_CASE("schwarzschild volume element includes r^2 sin(theta)") {
    const MetricField s = schwarzschild_spherical(1.0);
    const double r = 4.0;
    const double theta = 0.7;
    CHECK(s.sqrt_neg_det(FourVector(0.0, r, theta, 1.0)) == doctest::Approx(r * r * std::sin(theta)).epsilon(1e-14));
    const MetricField cart(Schwarzschild{1.0, SchwarzschildChart::Cartesian}, geo);
    CHECK(cart.sqrt_neg_det(FourVector(0.0, 3.0, 2.0, 1.0)) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("singular regions are rejected") {
    const MetricField s = schwarzschild_spherical(1.0);
    CHECK_THROWS_AS(s.eval(FourVector(0.0, 1.5, 1.0, 0.0)), Error);
    try {
        s.eval(FourVector(0.0, 2.0, 1.0, 0.0));
        FAIL("expected SingularRegion");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SingularRegion);
    }
    const MetricField cart(Schwarzschild{1.0, SchwarzschildChart::Cartesian}, geo);
    CHECK_THROWS_AS(cart.eval(FourVector(0.0, 1.0, 0.5, 0.0)), Error);
    const MetricField bare(WeakFieldPointMass{1.0, 0.0}, geo);
    CHECK_THROWS_AS(bare.eval(FourVector(0.0, 0.0, 0.0, 0.0)), Error);
}

TEST_CASE("signature and determinant at random points of every catalog metric") {
    std::mt19937_64 rng(7);
    for (const auto& f : catalog()) {
        for (int n = 0; n < 100; ++n) {
            const FourVector x = random_point(f, rng);
            const Matrix4 g = f.eval(x);
            CHECK((g - g.transpose()).cwiseAbs().maxCoeff() == 0.0);
            CHECK(negative_eigenvalue_count(g) == 1);
            CHECK(g.determinant() < 0.0);
            CHECK(std::abs(f.sqrt_neg_det(x) - std::sqrt(std::abs(g.determinant()))) <
                  1e-12 * f.sqrt_neg_det(x));
        }
    }
}

TEST_CASE("analytic schwarzschild christoffels match the independent oracle") {
    const MetricField s = schwarzschild_spherical(1.0);
    for (double r : {3.0, 7.5, 30.0}) {
        for (double th : {0.4, 1.3, 2.2}) {
            const auto ref = oracle::schwarzschild_christoffel(2.0, r, th);
            const Christoffel c = s.analytic_christoffel(FourVector(0.0, r, th, 0.5));
            for (int i = 0; i < 64; ++i) CHECK(std::abs(c.data()[i] - ref[i]) < 1e-14);
        }
    }
}

TEST_CASE("finite-difference christoffels match the schwarzschild oracle") {
    const MetricField s = schwarzschild_spherical(1.0);
    ChristoffelOptions opts;
    opts.analytic_fast_path = false;
    opts.relative_step = 1e-2;
    opts.richardson_tolerance = 1e-5;
    for (double r : {6.0, 12.0, 40.0}) {
        const FourVector x(1.0, r, 1.1, 0.4);
        const auto ref = oracle::schwarzschild_christoffel(2.0, r, 1.1);
        const Christoffel c = christoffel(s, x, opts);
        for (int i = 0; i < 64; ++i) CHECK(std::abs(c.data()[i] - ref[i]) < 1e-8);
    }
}

TEST_CASE("finite-difference christoffels converge at fourth order") {
    const MetricField s = schwarzschild_spherical(1.0);
    const FourVector x(0.0, 8.0, 1.0, 0.2);
    const auto ref = oracle::schwarzschild_christoffel(2.0, 8.0, 1.0);
    auto err = [&](double rel) {
        const Christoffel c = christoffel_fd(s, x, s.fd_steps(x, rel));
        double e = 0.0;
        for (int i = 0; i < 64; ++i) e = std::max(e, std::abs(c.data()[i] - ref[i]));
        return e;
    };
    const double ratio = err(0.02) / err(0.04);
    CHECK(ratio > 1.0 / 32.0);
    CHECK(ratio < 1.0 / 8.0);
}

TEST_CASE("christoffel symbols are symmetric in the lower pair") {
    std::mt19937_64 rng(11);
    ChristoffelOptions opts;
    opts.analytic_fast_path = false;
    for (const auto& f : catalog()) {
        for (int n = 0; n < 5; ++n) {
            const Christoffel c = christoffel(f, random_point(f, rng), opts);
            for (int mu = 0; mu < 4; ++mu)
                for (int nu = 0; nu < 4; ++nu)
                    for (int rho = 0; rho < 4; ++rho) CHECK(c(mu, nu, rho) == c(mu, rho, nu));
        }
    }
}

TEST_CASE("weak-field christoffel reduces to the Newtonian gradient") {
    const UnitSystem si = UnitSystem::si();
    const double mass = 5.972e24;
    const MetricField w(WeakFieldPointMass{mass, 0.0}, si);
    const Vector3 p(3.0e6, -2.0e6, 6.0e6);
    const FourVector x(0.0, p[0], p[1], p[2]);
    const Christoffel c = christoffel(w, x);
    const double r = p.norm();
    for (int i = 1; i < 4; ++i) {
        // d_i Phi / c^2 with Phi = -GM / r
        const double expected = si.G * mass * p[i - 1] / (r * r * r) / (si.c * si.c);
        CHECK(std::abs(c(i, 0, 0) - expected) < 1e-6 * std::abs(expected));
    }
}

TEST_CASE("oversized steps trip the Richardson check") {
    const MetricField s = schwarzschild_spherical(1.0);
    ChristoffelOptions opts;
    opts.analytic_fast_path = false;
    opts.relative_step = 0.2;
    opts.richardson_tolerance = 1e-10;
    try {
        christoffel(s, FourVector(0.0, 4.0, 1.0, 0.0), opts);
        FAIL("expected StepTooLarge");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::StepTooLarge);
    }
}

TEST_CASE("unit systems") {
    CHECK_THROWS_AS(MetricField(Minkowski{}, UnitSystem{0.0, 1.0, 1.0, "bad"}), Error);
    const UnitSystem si = UnitSystem::si();
    CHECK(si.time_to_geometric(1.0) == si.c);
    CHECK(si.energy_to_geometric(si.c * si.c * si.c * si.c / si.G) == doctest::Approx(1.0));
}
