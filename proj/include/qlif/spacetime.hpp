#pragma once

#include <array>
#include <string_view>
#include <variant>

#include <Eigen/Dense>

#include "qlif/error.hpp"
#include "qlif/units.hpp"

namespace qlif {

/// Contravariant components x^mu ordered (x^0, x^1, x^2, x^3) with
/// x^0 = c t. Cartesian charts use (ct, x, y, z); the spherical
/// Schwarzschild chart uses (ct, r, theta, phi).
using FourVector = Eigen::Vector4d;
using Vector3 = Eigen::Vector3d;
using Matrix4 = Eigen::Matrix4d;

/// Signature convention (-,+,+,+).
inline Matrix4 minkowski_eta() {
    return Eigen::Vector4d(-1.0, 1.0, 1.0, 1.0).asDiagonal();
}

bool is_finite(const FourVector& x) noexcept;

/// Gamma^mu_{nu rho}, symmetric in the lower pair.
class Christoffel {
public:
    double operator()(int mu, int nu, int rho) const { return data_[index(mu, nu, rho)]; }
    double& operator()(int mu, int nu, int rho) { return data_[index(mu, nu, rho)]; }

    const std::array<double, 64>& data() const { return data_; }
    double max_abs() const;

    /// du^mu/dtau = -Gamma^mu_{nu rho} u^nu u^rho
    FourVector acceleration(const FourVector& u) const;

private:
    static constexpr int index(int mu, int nu, int rho) { return (mu * 4 + nu) * 4 + rho; }
    std::array<double, 64> data_{};
};

struct Minkowski {
    bool operator==(const Minkowski&) const = default;
};

/// g_00 = -(1 + 2 Phi/c^2), g_ij = (1 - 2 Phi/c^2) delta_ij,
/// Phi(r) = -G M / sqrt(r^2 + softening^2), r measured from `center`.
struct WeakFieldPointMass {
    double mass = 0.0;
    double softening = 0.0;
    Vector3 center = Vector3::Zero();
    bool operator==(const WeakFieldPointMass&) const = default;
};

enum class SchwarzschildChart { Spherical, Cartesian };

/// Spherical chart: (ct, r, theta, phi) about the origin.
/// Cartesian chart: Schwarzschild radial coordinate r = |x - center|,
/// g_ij = delta_ij + r_s/(r - r_s) n_i n_j.
struct Schwarzschild {
    double mass = 0.0;
    SchwarzschildChart chart = SchwarzschildChart::Spherical;
    Vector3 center = Vector3::Zero();
    /// Points with r <= r_s (1 + horizon_margin) are rejected.
    double horizon_margin = 1e-6;
    bool operator==(const Schwarzschild&) const = default;
};

/// A fixed analytic background metric. Evaluation is pure and thread-safe.
class MetricField {
public:
    using Kind = std::variant<Minkowski, WeakFieldPointMass, Schwarzschild>;

    MetricField() = default;
    MetricField(Kind kind, UnitSystem units);

    static MetricField minkowski(UnitSystem units = UnitSystem::geometric());

    const Kind& kind() const { return kind_; }
    const UnitSystem& units() const { return units_; }
    std::string_view kind_name() const;

    /// g_{mu nu}(x). Throws SingularRegion outside the valid chart.
    Matrix4 eval(const FourVector& x) const;

    /// g - background, where background is constant over the chart
    /// (eta for Cartesian charts, zero for the spherical chart). Finite
    /// differences act on this part so that weak fields keep their digits.
    Matrix4 varying_part(const FourVector& x) const;

    /// sqrt(|det g|)
    double sqrt_neg_det(const FourVector& x) const;

    Matrix4 inverse(const FourVector& x) const;

    bool has_analytic_christoffel() const;
    Christoffel analytic_christoffel(const FourVector& x) const;

    /// Per-direction finite-difference steps: relative_step times the local
    /// length scale (angles use relative_step directly).
    FourVector fd_steps(const FourVector& x, double relative_step) const;

    bool operator==(const MetricField&) const = default;

private:
    Kind kind_ = Minkowski{};
    UnitSystem units_ = UnitSystem::geometric();
};

/// Number of strictly negative eigenvalues of a symmetric 4x4 matrix.
int negative_eigenvalue_count(const Matrix4& g);

struct ChristoffelOptions {
    double relative_step = 1e-2;
    /// StepTooLarge when max|Gamma(h) - Gamma(h/2)| exceeds
    /// richardson_tolerance * max|Gamma(h/2)|.
    double richardson_tolerance = 1e-6;
    bool analytic_fast_path = true;
};

/// 4th-order central differences with a fixed per-direction step vector.
Christoffel christoffel_fd(const MetricField& field, const FourVector& x, const FourVector& steps);

/// Christoffel symbols with the configured step and Richardson check.
/// Schwarzschild's spherical chart uses the closed form when allowed.
Christoffel christoffel(const MetricField& field, const FourVector& x,
                        const ChristoffelOptions& options = {});

}  // namespace qlif
