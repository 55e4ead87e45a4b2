#include "qlif/collapse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "qlif/error.hpp"

namespace qlif {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double length_scale(const MassDistribution& m) {
    return std::visit(overloaded{[](const UniformSphere& s) { return s.radius; },
                                 [](const GaussianCloud& g) { return g.sigma; }},
                      m.shape);
}

// Normalized Fourier transform of the density, F(0) = 1.
double form_factor(const MassDistribution& m, double k) {
    return std::visit(overloaded{
                          [k](const UniformSphere& s) {
                              const double x = k * s.radius;
                              if (x < 0.5) {
                                  // 3 sum (-1)^n (2n+2) x^2n / (2n+3)!, avoids cancellation.
                                  const double x2 = x * x;
                                  double term = 1.0;
                                  double fact = 6.0;
                                  double acc = 0.0;
                                  for (int n = 0; n < 10; ++n) {
                                      acc += term * (2 * n + 2) / fact;
                                      term *= -x2;
                                      fact *= (2 * n + 4) * (2 * n + 5);
                                  }
                                  return 3.0 * acc;
                              }
                              return 3.0 * (std::sin(x) - x * std::cos(x)) / (x * x * x);
                          },
                          [k](const GaussianCloud& g) { return std::exp(-0.5 * k * k * g.sigma * g.sigma); },
                      },
                      m.shape);
}

double sinc(double x) {
    if (std::abs(x) < 1e-4) return 1.0 - x * x / 6.0;
    return std::sin(x) / x;
}

// Upper bound of \int_K^inf |F_a F_b| dk.
double tail_bound(const MassDistribution& a, const MassDistribution& b, double k) {
    const auto* ga = std::get_if<GaussianCloud>(&a.shape);
    const auto* gb = std::get_if<GaussianCloud>(&b.shape);
    auto gaussian_tail = [k](const GaussianCloud& g) {
        return std::sqrt(std::numbers::pi / 2.0) / g.sigma * std::erfc(k * g.sigma / std::numbers::sqrt2);
    };
    // For kR >= 1: |F_sphere| <= 3 (1 + kR) / (kR)^3 <= 6 / (kR)^2.
    auto sphere_env = [k](const UniformSphere& s) {
        const double x = k * s.radius;
        return x >= 1.0 ? 6.0 / (x * x) : 1.0;
    };
    if (ga && gb) return std::min(gaussian_tail(*ga), gaussian_tail(*gb));
    if (ga) return sphere_env(std::get<UniformSphere>(b.shape)) * gaussian_tail(*ga);
    if (gb) return sphere_env(std::get<UniformSphere>(a.shape)) * gaussian_tail(*gb);
    const double ra = std::get<UniformSphere>(a.shape).radius;
    const double rb = std::get<UniformSphere>(b.shape).radius;
    if (k * std::min(ra, rb) < 1.0) return std::numeric_limits<double>::infinity();
    return 12.0 / (k * k * k * ra * ra * rb * rb);
}

double numeric_mutual(const MassDistribution& a, const MassDistribution& b, double d, double G,
                      const QuadratureOptions& opts) {
    using boost::math::quadrature::gauss_kronrod;
    const double scale = std::max({d, length_scale(a), length_scale(b)});
    const double width = std::numbers::pi / scale;
    auto integrand = [&](double k) { return form_factor(a, k) * form_factor(b, k) * sinc(k * d); };

    double sum = 0.0;
    double err_sum = 0.0;
    for (int panel = 0; panel < opts.max_panels; ++panel) {
        const double k0 = width * panel;
        const double k1 = k0 + width;
        double err = 0.0;
        sum += gauss_kronrod<double, 31>::integrate(integrand, k0, k1, 4, opts.relative_tolerance * 1e-2, &err);
        err_sum += err;
        const double tail = tail_bound(a, b, k1);
        if (tail < 0.1 * opts.relative_tolerance * std::abs(sum)) {
            if (err_sum > opts.relative_tolerance * std::abs(sum) + std::numeric_limits<double>::min()) break;
            return 2.0 * G * a.total_mass() * b.total_mass() / std::numbers::pi * sum;
        }
    }
    std::ostringstream os;
    os << "mutual-energy quadrature did not reach relative tolerance " << opts.relative_tolerance << " within "
       << opts.max_panels << " panels";
    fail(ErrorCode::QuadratureNonConvergence, os.str());
}

}  // namespace

void MassDistribution::validate() const {
    const bool ok = std::visit(overloaded{
                                   [](const UniformSphere& s) {
                                       return std::isfinite(s.mass) && s.mass > 0.0 && std::isfinite(s.radius) &&
                                              s.radius > 0.0;
                                   },
                                   [](const GaussianCloud& g) {
                                       return std::isfinite(g.mass) && g.mass > 0.0 && std::isfinite(g.sigma) &&
                                              g.sigma > 0.0;
                                   },
                               },
                               shape);
    if (!ok || !center.allFinite())
        fail(ErrorCode::InvalidArgument, "mass distribution needs finite M > 0, size > 0 and a finite center");
}

double MassDistribution::total_mass() const {
    return std::visit(overloaded{[](const UniformSphere& s) { return s.mass; },
                                 [](const GaussianCloud& g) { return g.mass; }},
                      shape);
}

MassDistribution MassDistribution::scaled_mass(double factor) const {
    MassDistribution out = *this;
    std::visit(overloaded{[factor](UniformSphere& s) { s.mass *= factor; },
                          [factor](GaussianCloud& g) { g.mass *= factor; }},
               out.shape);
    return out;
}

double mutual_energy(const MassDistribution& a, const MassDistribution& b, double G, const QuadratureOptions& opts) {
    a.validate();
    b.validate();
    if (!(std::isfinite(G) && G > 0.0)) fail(ErrorCode::InvalidArgument, "G must be > 0");
    const double d = (a.center - b.center).norm();
    const double mm = G * a.total_mass() * b.total_mass();

    if (!opts.force_numeric) {
        const auto* sa = std::get_if<UniformSphere>(&a.shape);
        const auto* sb = std::get_if<UniformSphere>(&b.shape);
        if (sa && sb) {
            if (d >= sa->radius + sb->radius) return mm / d;
            if (sa->radius == sb->radius) {
                // Overlapping equal spheres, s = d / R in [0, 2).
                const double s = d / sa->radius;
                const double s2 = s * s;
                return mm / sa->radius * (1.2 - 0.5 * s2 + 0.1875 * s2 * s - s2 * s2 * s / 160.0);
            }
        }
        const auto* ga = std::get_if<GaussianCloud>(&a.shape);
        const auto* gb = std::get_if<GaussianCloud>(&b.shape);
        if (ga && gb) {
            const double width = std::sqrt(ga->sigma * ga->sigma + gb->sigma * gb->sigma);
            if (d == 0.0) return mm * std::sqrt(2.0 / std::numbers::pi) / width;
            return mm * std::erf(d / (std::numbers::sqrt2 * width)) / d;
        }
    }
    return numeric_mutual(a, b, d, G, opts);
}

double delta_self_energy(const MassDistribution& a, const MassDistribution& b, double G,
                         const QuadratureOptions& opts) {
    const double uaa = mutual_energy(a, a, G, opts);
    const double ubb = mutual_energy(b, b, G, opts);
    const double uab = mutual_energy(a, b, G, opts);
    // Positive-definite kernel; clip rounding residue below zero.
    return std::max(0.0, uaa + ubb - 2.0 * uab);
}

double collapse_time(const MassDistribution& a, const MassDistribution& b, const UnitSystem& units,
                     const QuadratureOptions& opts) {
    units.validate();
    const double e = delta_self_energy(a, b, units.G, opts);
    if (e == 0.0)
        fail(ErrorCode::InfiniteLifetime, "identical mass configurations: E_Delta = 0, the superposition never decays");
    return units.hbar / e;
}

std::vector<CollapseRow> collapse_sweep(const MassDistribution& shape, const std::vector<double>& separations,
                                        const UnitSystem& units, const QuadratureOptions& opts) {
    std::vector<CollapseRow> rows;
    rows.reserve(separations.size());
    for (double d : separations) {
        if (!(std::isfinite(d) && d >= 0.0)) fail(ErrorCode::InvalidArgument, "separations must be finite and >= 0");
        CollapseRow row;
        row.separation = d;
        const MassDistribution moved = shape.shifted(Vector3(d, 0.0, 0.0));
        row.energy = delta_self_energy(shape, moved, units.G, opts);
        if (row.energy == 0.0) {
            row.infinite = true;
            row.time = std::numeric_limits<double>::infinity();
        } else {
            row.time = units.hbar / row.energy;
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace qlif
