#include "doctest.h"

#include <cmath>
#include <limits>

#include "qlif/collapse.hpp"
#include "support/oracles.hpp"

using namespace qlif;

namespace {

MassDistribution sphere(double m, double r, Vector3 c = Vector3::Zero()) { return {UniformSphere{m, r}, c}; }
MassDistribution cloud(double m, double s, Vector3 c = Vector3::Zero()) { return {GaussianCloud{m, s}, c}; }
Vector3 ex(double d) { return {d, 0.0, 0.0}; }

}  // namespace

TEST_CASE("identical configurations carry no energy and never collapse") {
    const MassDistribution a = sphere(1.0, 1.0);
    CHECK(delta_self_energy(a, a, 1.0) == 0.0);
    CHECK(delta_self_energy(cloud(2.0, 0.5), cloud(2.0, 0.5), 1.0) == 0.0);
    try {
        collapse_time(a, a, UnitSystem::geometric());
        FAIL("expected InfiniteLifetime");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InfiniteLifetime);
    }
}

TEST_CASE("uniform spheres agree with the Monte-Carlo double integral") {
    for (double d : {1.0, 1.5, 2.5, 4.0}) {
        const auto mc = oracle::sphere_delta_energy_mc(1.0, 1.0, d, 1.0, 2'000'000, 42);
        const double e = delta_self_energy(sphere(1.0, 1.0), sphere(1.0, 1.0, ex(d)), 1.0);
        CHECK(std::abs(e - mc.value) / e < 0.005);
        CHECK(std::abs(e - mc.value) < 5.0 * mc.standard_error);
    }
}

TEST_CASE("Gaussian clouds agree with the Monte-Carlo double integral") {
    for (double d : {0.5, 2.0}) {
        const auto mc = oracle::gaussian_delta_energy_mc(1.0, 0.7, d, 1.0, 2'000'000, 7);
        const double e = delta_self_energy(cloud(1.0, 0.7), cloud(1.0, 0.7, ex(d)), 1.0);
        CHECK(std::abs(e - mc.value) < 5.0 * mc.standard_error);
    }
}

TEST_CASE("far-separated spheres approach twice the self energy") {
    const double d = 1e7;
    const double e = delta_self_energy(sphere(1.0, 1.0), sphere(1.0, 1.0, ex(d)), 1.0);
    const double self = oracle::sphere_pair_energy(1.0, 1.0, 0.0, 1.0);
    CHECK(self == doctest::Approx(1.2));
    CHECK(e == doctest::Approx(2.0 * self - 2.0 / d).epsilon(1e-14));
}

TEST_CASE("E_Delta is nondecreasing over [0, 4R]") {
    const MassDistribution a = sphere(1.0, 1.0);
    double prev = -1.0;
    for (int i = 0; i <= 400; ++i) {
        const double d = 0.01 * i;
        const double e = delta_self_energy(a, a.shifted(ex(d)), 1.0);
        CHECK(e >= prev);
        const double expected = 2.0 * (oracle::sphere_pair_energy(1.0, 1.0, 0.0, 1.0) -
                                       oracle::sphere_pair_energy(1.0, 1.0, d, 1.0));
        CHECK(std::abs(e - expected) < 1e-13);
        prev = e;
    }
}

TEST_CASE("numeric quadrature reproduces the closed forms") {
    QuadratureOptions numeric;
    numeric.force_numeric = true;
    for (double d : {0.0, 0.3, 1.0, 1.9, 2.0, 3.5}) {
        const MassDistribution a = sphere(1.0, 1.0);
        const MassDistribution b = sphere(1.0, 1.0, ex(d));
        const double closed = mutual_energy(a, b, 1.0);
        CHECK(mutual_energy(a, b, 1.0, numeric) == doctest::Approx(closed).epsilon(1e-8));
    }
    for (double d : {0.0, 0.4, 3.0}) {
        const MassDistribution a = cloud(1.0, 0.5);
        const MassDistribution b = cloud(2.0, 0.8, ex(d));
        CHECK(mutual_energy(a, b, 1.0, numeric) == doctest::Approx(mutual_energy(a, b, 1.0)).epsilon(1e-8));
    }
    // Unequal spheres that do not overlap still obey the point-mass law.
    const MassDistribution small = sphere(1.0, 0.5);
    const MassDistribution big = sphere(3.0, 1.5, ex(2.5));
    CHECK(mutual_energy(small, big, 1.0, numeric) == doctest::Approx(3.0 / 2.5).epsilon(1e-8));
}

TEST_CASE("mixed shapes go through quadrature and stay consistent") {
    const MassDistribution a = sphere(1.0, 1.0);
    const MassDistribution b = cloud(1.0, 0.3, ex(0.7));
    const double ab = delta_self_energy(a, b, 1.0);
    const double ba = delta_self_energy(b, a, 1.0);
    CHECK(ab > 0.0);
    CHECK(ab == doctest::Approx(ba).epsilon(1e-9));
    const double moved = delta_self_energy(a.shifted(Vector3(3.0, -1.0, 2.0)), b.shifted(Vector3(3.0, -1.0, 2.0)), 1.0);
    CHECK(moved == doctest::Approx(ab).epsilon(1e-9));
    // Far apart the cross term is G M_a M_b / d.
    const MassDistribution far = cloud(1.0, 0.3, ex(50.0));
    CHECK(mutual_energy(a, far, 1.0) == doctest::Approx(1.0 / 50.0).epsilon(1e-9));
}

TEST_CASE("symmetry and translation invariance on the analytic path") {
    const MassDistribution a = sphere(2.0, 1.0, Vector3(0.1, 0.2, 0.3));
    const MassDistribution b = sphere(2.0, 1.0, Vector3(1.0, -0.5, 0.3));
    CHECK(delta_self_energy(a, b, 1.0) == doctest::Approx(delta_self_energy(b, a, 1.0)).epsilon(1e-15));
    const Vector3 shift(5.0, 5.0, -5.0);
    CHECK(delta_self_energy(a.shifted(shift), b.shifted(shift), 1.0) ==
          doctest::Approx(delta_self_energy(a, b, 1.0)).epsilon(1e-12));
}

TEST_CASE("mass scaling is quadratic") {
    for (double lam : {2.0, 0.5, 10.0}) {
        const MassDistribution a = sphere(1.0, 1.0);
        const MassDistribution b = sphere(1.0, 1.0, ex(0.8));
        const double e1 = delta_self_energy(a, b, 1.0);
        const double e2 = delta_self_energy(a.scaled_mass(lam), b.scaled_mass(lam), 1.0);
        CHECK(std::abs(e2 - lam * lam * e1) <= 1e-10 * lam * lam * e1);
        const UnitSystem u = UnitSystem::si();
        const double t1 = collapse_time(a, b, u);
        const double t2 = collapse_time(a.scaled_mass(lam), b.scaled_mass(lam), u);
        CHECK(t2 == doctest::Approx(t1 / (lam * lam)).epsilon(1e-10));
    }
}

TEST_CASE("t_Delta E_Delta equals hbar") {
    const UnitSystem u = UnitSystem::si();
    for (double d : {1e-7, 5e-7, 3e-6}) {
        const MassDistribution a = sphere(1e-9, 1e-6);
        const MassDistribution b = a.shifted(ex(d));
        const double e = delta_self_energy(a, b, u.G);
        const double t = collapse_time(a, b, u);
        CHECK(t == u.hbar / e);
        CHECK(std::abs(t * e - u.hbar) <= u.hbar * std::numeric_limits<double>::epsilon());
    }
}

TEST_CASE("separation sweep marks infinite lifetimes") {
    const auto rows = collapse_sweep(sphere(1.0, 1.0), {0.0, 0.5, 1.0, 4.0}, UnitSystem::geometric());
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].infinite);
    CHECK(std::isinf(rows[0].time));
    CHECK_FALSE(rows[1].infinite);
    CHECK(rows[3].energy >= rows[2].energy);
    CHECK_THROWS_AS(collapse_sweep(sphere(1.0, 1.0), {-1.0}, UnitSystem::geometric()), Error);
}

TEST_CASE("invalid inputs and exhausted quadrature budgets") {
    CHECK_THROWS_AS(delta_self_energy(sphere(-1.0, 1.0), sphere(1.0, 1.0), 1.0), Error);
    CHECK_THROWS_AS(delta_self_energy(sphere(1.0, 0.0), sphere(1.0, 1.0), 1.0), Error);
    CHECK_THROWS_AS(delta_self_energy(sphere(1.0, 1.0), sphere(1.0, 1.0), -1.0), Error);
    QuadratureOptions tight;
    tight.force_numeric = true;
    tight.max_panels = 2;
    try {
        mutual_energy(sphere(1.0, 1.0), sphere(1.0, 0.5, ex(0.3)), 1.0, tight);
        FAIL("expected QuadratureNonConvergence");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::QuadratureNonConvergence);
    }
}
