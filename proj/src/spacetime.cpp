#include "qlif/spacetime.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qlif {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string describe(const FourVector& x) {
    std::ostringstream os;
    os.precision(17);
    os << "(" << x[0] << ", " << x[1] << ", " << x[2] << ", " << x[3] << ")";
    return os.str();
}

struct WeakFieldTerms {
    double phi_over_c2;
};

WeakFieldTerms weak_field_terms(const WeakFieldPointMass& w, const UnitSystem& u, const FourVector& x) {
    const Vector3 d = x.tail<3>() - w.center;
    const double s = std::sqrt(d.squaredNorm() + w.softening * w.softening);
    if (!(s > 0.0))
        fail(ErrorCode::SingularRegion, "weak-field metric evaluated at its unsoftened source " + describe(x));
    const double phi = -u.G * w.mass / s;
    const double q = phi / (u.c * u.c);
    if (!(1.0 + 2.0 * q > 0.0))
        fail(ErrorCode::SingularRegion, "weak-field potential too deep for a Lorentzian metric at " + describe(x));
    return {q};
}

double schwarzschild_radius(const Schwarzschild& s, const UnitSystem& u) {
    return 2.0 * u.G * s.mass / (u.c * u.c);
}

void check_outside_horizon(double r, double rs, double margin, const FourVector& x) {
    if (!(r > rs * (1.0 + margin)))
        fail(ErrorCode::SingularRegion, "Schwarzschild metric evaluated inside r <= 2GM/c^2 (+margin) at " + describe(x));
}

}  // namespace

bool is_finite(const FourVector& x) noexcept {
    return x.allFinite();
}

double Christoffel::max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
}

FourVector Christoffel::acceleration(const FourVector& u) const {
    FourVector a = FourVector::Zero();
    for (int mu = 0; mu < 4; ++mu) {
        double acc = 0.0;
        for (int nu = 0; nu < 4; ++nu)
            for (int rho = 0; rho < 4; ++rho) acc += (*this)(mu, nu, rho) * u[nu] * u[rho];
        a[mu] = -acc;
    }
    return a;
}

MetricField::MetricField(Kind kind, UnitSystem units) : kind_(std::move(kind)), units_(std::move(units)) {
    units_.validate();
    std::visit(overloaded{
                   [](const Minkowski&) {},
                   [](const WeakFieldPointMass& w) {
                       if (!(std::isfinite(w.mass) && w.mass >= 0.0))
                           fail(ErrorCode::InvalidArgument, "weak-field mass must be finite and >= 0");
                       if (!(std::isfinite(w.softening) && w.softening >= 0.0))
                           fail(ErrorCode::InvalidArgument, "weak-field softening must be finite and >= 0");
                       if (!w.center.allFinite())
                           fail(ErrorCode::InvalidArgument, "weak-field center must be finite");
                   },
                   [](const Schwarzschild& s) {
                       if (!(std::isfinite(s.mass) && s.mass > 0.0))
                           fail(ErrorCode::InvalidArgument, "Schwarzschild mass must be finite and > 0");
                       if (!(std::isfinite(s.horizon_margin) && s.horizon_margin >= 0.0))
                           fail(ErrorCode::InvalidArgument, "Schwarzschild horizon margin must be >= 0");
                       if (!s.center.allFinite())
                           fail(ErrorCode::InvalidArgument, "Schwarzschild center must be finite");
                   },
               },
               kind_);
}

MetricField MetricField::minkowski(UnitSystem units) {
    return MetricField(Minkowski{}, std::move(units));
}

std::string_view MetricField::kind_name() const {
    return std::visit(overloaded{
                          [](const Minkowski&) -> std::string_view { return "minkowski"; },
                          [](const WeakFieldPointMass&) -> std::string_view { return "weak_field_point_mass"; },
                          [](const Schwarzschild&) -> std::string_view { return "schwarzschild"; },
                      },
                      kind_);
}

Matrix4 MetricField::varying_part(const FourVector& x) const {
    if (!is_finite(x)) fail(ErrorCode::InvalidArgument, "non-finite coordinate " + describe(x));
    return std::visit(
        overloaded{
            [](const Minkowski&) -> Matrix4 { return Matrix4::Zero(); },
            [&](const WeakFieldPointMass& w) -> Matrix4 {
                const double q = weak_field_terms(w, units_, x).phi_over_c2;
                return Eigen::Vector4d(-2.0 * q, -2.0 * q, -2.0 * q, -2.0 * q).asDiagonal();
            },
            [&](const Schwarzschild& s) -> Matrix4 {
                const double rs = schwarzschild_radius(s, units_);
                Matrix4 h = Matrix4::Zero();
                if (s.chart == SchwarzschildChart::Spherical) {
                    const double r = x[1];
                    const double theta = x[2];
                    check_outside_horizon(r, rs, s.horizon_margin, x);
                    const double sn = std::sin(theta);
                    if (!(std::abs(sn) > 1e-12))
                        fail(ErrorCode::SingularRegion, "spherical chart evaluated on the polar axis at " + describe(x));
                    const double f = 1.0 - rs / r;
                    h(0, 0) = -f;
                    h(1, 1) = 1.0 / f;
                    h(2, 2) = r * r;
                    h(3, 3) = r * r * sn * sn;
                    return h;
                }
                const Vector3 d = x.tail<3>() - s.center;
                const double r = d.norm();
                check_outside_horizon(r, rs, s.horizon_margin, x);
                const Vector3 n = d / r;
                h(0, 0) = rs / r;
                const double k = rs / (r - rs);
                for (int i = 0; i < 3; ++i)
                    for (int j = i; j < 3; ++j) h(i + 1, j + 1) = h(j + 1, i + 1) = k * n[i] * n[j];
                return h;
            },
        },
        kind_);
}

Matrix4 MetricField::eval(const FourVector& x) const {
    Matrix4 g = varying_part(x);
    const auto* s = std::get_if<Schwarzschild>(&kind_);
    if (s && s->chart == SchwarzschildChart::Spherical) return g;
    return g + minkowski_eta();
}

double MetricField::sqrt_neg_det(const FourVector& x) const {
    return std::visit(
        overloaded{
            [](const Minkowski&) { return 1.0; },
            [&](const WeakFieldPointMass& w) {
                const double q = weak_field_terms(w, units_, x).phi_over_c2;
                return std::pow(1.0 - 2.0 * q, 1.5) * std::sqrt(1.0 + 2.0 * q);
            },
            [&](const Schwarzschild& s) {
                const double rs = schwarzschild_radius(s, units_);
                if (s.chart == SchwarzschildChart::Spherical) {
                    const double r = x[1];
                    check_outside_horizon(r, rs, s.horizon_margin, x);
                    const double sn = std::abs(std::sin(x[2]));
                    if (!(sn > 1e-12))
                        fail(ErrorCode::SingularRegion, "spherical chart evaluated on the polar axis at " + describe(x));
                    return r * r * sn;
                }
                // -(1 - rs/r) * r/(r - rs) = -1 identically.
                check_outside_horizon((x.tail<3>() - s.center).norm(), rs, s.horizon_margin, x);
                return 1.0;
            },
        },
        kind_);
}

Matrix4 MetricField::inverse(const FourVector& x) const {
    const Matrix4 g = eval(x);
    if (std::holds_alternative<Minkowski>(kind_)) return g;
    if (std::holds_alternative<WeakFieldPointMass>(kind_) ||
        std::get<Schwarzschild>(kind_).chart == SchwarzschildChart::Spherical)
        return g.diagonal().cwiseInverse().asDiagonal();
    return g.inverse();
}

bool MetricField::has_analytic_christoffel() const {
    if (std::holds_alternative<Minkowski>(kind_)) return true;
    const auto* s = std::get_if<Schwarzschild>(&kind_);
    return s && s->chart == SchwarzschildChart::Spherical;
}

Christoffel MetricField::analytic_christoffel(const FourVector& x) const {
    Christoffel gam;
    if (std::holds_alternative<Minkowski>(kind_)) return gam;
    const auto* s = std::get_if<Schwarzschild>(&kind_);
    if (!s || s->chart != SchwarzschildChart::Spherical)
        fail(ErrorCode::InvalidArgument, "no closed-form Christoffel symbols for this metric");

    const double rs = schwarzschild_radius(*s, units_);
    const double r = x[1];
    const double theta = x[2];
    check_outside_horizon(r, rs, s->horizon_margin, x);
    const double sn = std::sin(theta);
    const double cs = std::cos(theta);
    if (!(std::abs(sn) > 1e-12))
        fail(ErrorCode::SingularRegion, "spherical chart evaluated on the polar axis at " + describe(x));
    const double f = 1.0 - rs / r;

    auto set = [&](int mu, int nu, int rho, double v) {
        gam(mu, nu, rho) = v;
        gam(mu, rho, nu) = v;
    };
    set(0, 0, 1, rs / (2.0 * r * r * f));
    set(1, 0, 0, rs * f / (2.0 * r * r));
    set(1, 1, 1, -rs / (2.0 * r * r * f));
    set(1, 2, 2, -r * f);
    set(1, 3, 3, -r * f * sn * sn);
    set(2, 1, 2, 1.0 / r);
    set(2, 3, 3, -sn * cs);
    set(3, 1, 3, 1.0 / r);
    set(3, 2, 3, cs / sn);
    return gam;
}

FourVector MetricField::fd_steps(const FourVector& x, double relative_step) const {
    if (!(std::isfinite(relative_step) && relative_step > 0.0))
        fail(ErrorCode::InvalidArgument, "finite-difference step must be finite and > 0");
    return std::visit(
        overloaded{
            [&](const Minkowski&) -> FourVector { return FourVector::Constant(relative_step); },
            [&](const WeakFieldPointMass& w) -> FourVector {
                const double scale = std::sqrt((x.tail<3>() - w.center).squaredNorm() + w.softening * w.softening);
                return FourVector::Constant(relative_step * (scale > 0.0 ? scale : 1.0));
            },
            [&](const Schwarzschild& s) -> FourVector {
                if (s.chart == SchwarzschildChart::Spherical) {
                    const double r = std::abs(x[1]);
                    return FourVector(relative_step * r, relative_step * r, relative_step, relative_step);
                }
                const double rs = schwarzschild_radius(s, units_);
                const double dist = (x.tail<3>() - s.center).norm();
                // Offsets of 2h must stay clear of the horizon.
                return FourVector::Constant(relative_step * std::max(dist - rs, 0.0));
            },
        },
        kind_);
}

int negative_eigenvalue_count(const Matrix4& g) {
    Eigen::SelfAdjointEigenSolver<Matrix4> es(g, Eigen::EigenvaluesOnly);
    int n = 0;
    for (int i = 0; i < 4; ++i)
        if (es.eigenvalues()[i] < 0.0) ++n;
    return n;
}

Christoffel christoffel_fd(const MetricField& field, const FourVector& x, const FourVector& steps) {
    for (int i = 0; i < 4; ++i)
        if (!(std::isfinite(steps[i]) && steps[i] > 0.0))
            fail(ErrorCode::InvalidArgument, "finite-difference steps must be finite and > 0");

    // dg[s] = d g / d x^s
    std::array<Matrix4, 4> dg;
    for (int s = 0; s < 4; ++s) {
        const double h = steps[s];
        FourVector e = FourVector::Zero();
        e[s] = h;
        const Matrix4 p1 = field.varying_part(x + e);
        const Matrix4 m1 = field.varying_part(x - e);
        const Matrix4 p2 = field.varying_part(x + 2.0 * e);
        const Matrix4 m2 = field.varying_part(x - 2.0 * e);
        dg[s] = (8.0 * (p1 - m1) - (p2 - m2)) / (12.0 * h);
    }

    const Matrix4 ginv = field.inverse(x);
    Christoffel gam;
    for (int mu = 0; mu < 4; ++mu) {
        for (int nu = 0; nu < 4; ++nu) {
            for (int rho = nu; rho < 4; ++rho) {
                double acc = 0.0;
                for (int sigma = 0; sigma < 4; ++sigma)
                    acc += ginv(mu, sigma) * (dg[nu](sigma, rho) + dg[rho](sigma, nu) - dg[sigma](nu, rho));
                gam(mu, nu, rho) = 0.5 * acc;
                gam(mu, rho, nu) = 0.5 * acc;
            }
        }
    }
    return gam;
}

Christoffel christoffel(const MetricField& field, const FourVector& x, const ChristoffelOptions& options) {
    if (options.analytic_fast_path && field.has_analytic_christoffel()) return field.analytic_christoffel(x);

    // Validity at the point itself is checked before any offsets.
    (void)field.varying_part(x);
    const FourVector steps = field.fd_steps(x, options.relative_step);
    const Christoffel coarse = christoffel_fd(field, x, steps);
    const Christoffel fine = christoffel_fd(field, x, 0.5 * steps);

    double diff = 0.0;
    for (std::size_t i = 0; i < 64; ++i) diff = std::max(diff, std::abs(coarse.data()[i] - fine.data()[i]));
    const double scale = fine.max_abs();
    if (diff > options.richardson_tolerance * scale) {
        std::ostringstream os;
        os << "Richardson check failed: |Gamma(h) - Gamma(h/2)| = " << diff << " exceeds "
           << options.richardson_tolerance << " * " << scale << " at " << describe(x);
        fail(ErrorCode::StepTooLarge, os.str());
    }
    return fine;
}

}  // namespace qlif
