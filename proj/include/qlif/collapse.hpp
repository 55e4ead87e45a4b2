#pragma once

#include <variant>
#include <vector>

#include "qlif/spacetime.hpp"
#include "qlif/units.hpp"

namespace qlif {

struct UniformSphere {
    double mass = 0.0;
    double radius = 0.0;
    bool operator==(const UniformSphere&) const = default;
};

/// rho(r) = M (2 pi sigma^2)^{-3/2} exp(-r^2 / (2 sigma^2))
struct GaussianCloud {
    double mass = 0.0;
    double sigma = 0.0;
    bool operator==(const GaussianCloud&) const = default;
};

struct MassDistribution {
    std::variant<UniformSphere, GaussianCloud> shape;
    Vector3 center = Vector3::Zero();

    void validate() const;
    double total_mass() const;
    MassDistribution shifted(const Vector3& d) const { return {shape, center + d}; }
    MassDistribution scaled_mass(double factor) const;
};

struct QuadratureOptions {
    double relative_tolerance = 1e-10;
    /// Panels of the oscillatory k-integral before QuadratureNonConvergence.
    int max_panels = 200000;
    /// Skip closed forms; used to cross-check them.
    bool force_numeric = false;
};

/// Convention: U_ab = G \iint rho_a(r) rho_b(r') / |r - r'| d^3r d^3r'
/// (no factor 1/2, positive sign). Closed forms cover equal-radius spheres,
/// disjoint spheres and Gaussian pairs; everything else integrates the
/// form-factor representation
///   U_ab = (2 G M_a M_b / pi) \int_0^inf F_a(k) F_b(k) sin(k d)/(k d) dk.
double mutual_energy(const MassDistribution& a, const MassDistribution& b, double G, const QuadratureOptions& opts = {});

/// E_Delta = G \iint dr dr' drho(r) drho(r') / |r - r'| with drho = rho_a - rho_b,
/// i.e. U_aa + U_bb - 2 U_ab.
double delta_self_energy(const MassDistribution& a, const MassDistribution& b, double G,
                         const QuadratureOptions& opts = {});

/// hbar / E_Delta. Throws InfiniteLifetime when E_Delta = 0.
double collapse_time(const MassDistribution& a, const MassDistribution& b, const UnitSystem& units,
                     const QuadratureOptions& opts = {});

struct CollapseRow {
    double separation = 0.0;
    double energy = 0.0;
    /// +inf when the lifetime is infinite
    double time = 0.0;
    bool infinite = false;
};

/// Displaces a copy of `shape` along +x by each separation.
std::vector<CollapseRow> collapse_sweep(const MassDistribution& shape, const std::vector<double>& separations,
                                        const UnitSystem& units, const QuadratureOptions& opts = {});

}  // namespace qlif
