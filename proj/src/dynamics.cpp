#include "qlif/dynamics.hpp"

#include <cmath>
#include <cstdio>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>

#include <fftw3.h>

#include "qlif/tetrad.hpp"

namespace qlif {

namespace {

struct Derivative {
    FourVector dx;
    FourVector du;
};

Derivative geodesic_rhs(const MetricField& field, const FourVector& x, const FourVector& u,
                        const ChristoffelOptions& options) {
    return {u, christoffel(field, x, options).acceleration(u)};
}

// FFTW planning is not thread-safe; execution on a private plan is.
std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

class FftPlan {
public:
    FftPlan(std::vector<Complex>& data, int sign) {
        std::lock_guard lock(fftw_planner_mutex());
        auto* buf = reinterpret_cast<fftw_complex*>(data.data());
        plan_ = fftw_plan_dft_1d(static_cast<int>(data.size()), buf, buf, sign, FFTW_ESTIMATE);
        if (!plan_) fail(ErrorCode::InvalidArgument, "FFTW could not plan a transform");
    }
    ~FftPlan() {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(plan_);
    }
    FftPlan(const FftPlan&) = delete;
    FftPlan& operator=(const FftPlan&) = delete;

    void execute() { fftw_execute(plan_); }

private:
    fftw_plan plan_ = nullptr;
};

std::size_t whole_steps(double d, double dx, std::size_t n) {
    const double steps = d / dx;
    const double rounded = std::round(steps);
    if (!std::isfinite(steps) || std::abs(steps - rounded) > 1e-9 * std::max(1.0, std::abs(steps))) {
        std::ostringstream os;
        os << "translation " << d << " is not a whole number of grid steps (" << dx << ")";
        fail(ErrorCode::OffGridTranslation, os.str());
    }
    const auto ni = static_cast<long long>(n);
    return static_cast<std::size_t>(((static_cast<long long>(rounded) % ni) + ni) % ni);
}

constexpr double kNormalizationBreakdown = 1e-6;

}  // namespace

double normalization_residual(const MetricField& field, const GeodesicState& s) {
    const double c = field.units().c;
    return s.u.dot(field.eval(s.x) * s.u) + c * c;
}

FourVector velocity_from_local(const MetricField& field, const FourVector& x, const Vector3& v) {
    const double c = field.units().c;
    const double beta2 = v.squaredNorm() / (c * c);
    if (!(beta2 < 1.0)) fail(ErrorCode::InvalidArgument, "local velocity must be slower than light");
    const double gamma = 1.0 / std::sqrt(1.0 - beta2);
    const FourVector u_local(gamma * c, gamma * v[0], gamma * v[1], gamma * v[2]);
    return build_tetrad(field, x).f * u_local;
}

Trajectory integrate_geodesic(const MetricField& field, const GeodesicState& init, double dtau, int n_steps,
                              const ChristoffelOptions& options) {
    if (!(std::isfinite(dtau) && dtau > 0.0)) fail(ErrorCode::InvalidArgument, "dtau must be finite and > 0");
    if (n_steps < 0) fail(ErrorCode::InvalidArgument, "n_steps must be >= 0");
    if (!is_finite(init.x) || !is_finite(init.u)) fail(ErrorCode::InvalidArgument, "initial state must be finite");
    const double c = field.units().c;
    const double residual = normalization_residual(field, init);
    if (std::abs(residual) > 1e-8 * c * c) {
        std::ostringstream os;
        os << "initial four-velocity is not timelike-normalized: g(u,u) + c^2 = " << residual;
        fail(ErrorCode::InvalidArgument, os.str());
    }

    Trajectory traj;
    traj.states.reserve(static_cast<std::size_t>(n_steps) + 1);
    traj.states.push_back(init);
    GeodesicState s = init;
    for (int step = 0; step < n_steps; ++step) {
        try {
            const Derivative k1 = geodesic_rhs(field, s.x, s.u, options);
            const Derivative k2 = geodesic_rhs(field, s.x + 0.5 * dtau * k1.dx, s.u + 0.5 * dtau * k1.du, options);
            const Derivative k3 = geodesic_rhs(field, s.x + 0.5 * dtau * k2.dx, s.u + 0.5 * dtau * k2.du, options);
            const Derivative k4 = geodesic_rhs(field, s.x + dtau * k3.dx, s.u + dtau * k3.du, options);
            s.x += dtau / 6.0 * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx);
            s.u += dtau / 6.0 * (k1.du + 2.0 * k2.du + 2.0 * k3.du + k4.du);
            s.tau = init.tau + dtau * static_cast<double>(step + 1);
            if (!is_finite(s.x) || !is_finite(s.u))
                fail(ErrorCode::SingularRegion, "geodesic state became non-finite");
            // A step that jumps across a coordinate singularity stays finite but loses the normalization.
            const Matrix4 g = field.eval(s.x);
            const double drift = std::abs(s.u.dot(g * s.u) + c * c);
            const double scale = c * c + (s.u.cwiseAbs().transpose() * g.cwiseAbs() * s.u.cwiseAbs()).value();
            if (drift > kNormalizationBreakdown * scale) {
                std::ostringstream os;
                os << "geodesic lost its normalization (|g(u,u) + c^2| = " << drift << ") at (" << s.x[0] << ", " << s.x[1] << ", " << s.x[2] << ", " << s.x[3] << ")"
                   << "; the step crossed a coordinate singularity";
                fail(ErrorCode::SingularRegion, os.str());
            }
        } catch (const Error& e) {
            traj.error = e;
            return traj;
        }
        traj.states.push_back(s);
    }
    return traj;
}

std::vector<BranchTrajectory> geodesic_superposition(const SuperposedState& state, const Vector3& init_local_velocity,
                                                     double dtau, int n_steps, const ChristoffelOptions& options) {
    if (state.frame() != Frame::R) fail(ErrorCode::WrongFrame, "geodesics start from an R-frame state");
    const GridSpec& grid = state.grid();
    std::vector<BranchTrajectory> out;
    for (const Branch& b : state.branches()) {
        const double c = b.metric.units().c;
        Vector3 weighted = Vector3::Zero();
        double total = 0.0;
        for (std::size_t n = 0; n < b.psi.size(); ++n) {
            const double w = std::norm(b.psi[n]) * b.sqrt_neg_g[n];
            weighted += w * grid.position(n);
            total += w;
        }
        if (!(total > 0.0)) fail(ErrorCode::ZeroNorm, "branch " + b.mass_label + " has no support");
        const Vector3 centroid = weighted / total;

        GeodesicState init;
        init.x = FourVector(c * grid.t0, centroid[0], centroid[1], centroid[2]);
        init.u = velocity_from_local(b.metric, init.x, init_local_velocity);
        out.push_back({b.mass_label, b.metric_id, integrate_geodesic(b.metric, init, dtau, n_steps, options)});
    }
    return out;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory, double c) {
    out << "tau,t,x,y,z,u0,u1,u2,u3\n";
    char line[512];
    for (const auto& s : trajectory.states) {
        std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", s.tau,
                      s.x[0] / c, s.x[1], s.x[2], s.x[3], s.u[0], s.u[1], s.u[2], s.u[3]);
        out << line;
    }
}

double Wavepacket1D::norm() const {
    double acc = 0.0;
    for (const auto& v : samples) acc += std::norm(v);
    return std::sqrt(acc * dx);
}

double Wavepacket1D::mean_position() const {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double p = std::norm(samples[i]);
        num += p * position(i);
        den += p;
    }
    return num / den;
}

double Wavepacket1D::width() const {
    const double mean = mean_position();
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double p = std::norm(samples[i]);
        const double d = position(i) - mean;
        num += p * d * d;
        den += p;
    }
    return std::sqrt(num / den);
}

Wavepacket1D Wavepacket1D::gaussian(double lo, double hi, std::size_t n, double x0, double sigma, double k0,
                                    double mass, double hbar) {
    if (n < 2 || !(hi > lo)) fail(ErrorCode::InvalidArgument, "1D grid needs n >= 2 and hi > lo");
    if (!(sigma > 0.0) || !(mass > 0.0) || !(hbar > 0.0))
        fail(ErrorCode::InvalidArgument, "Gaussian packet needs sigma, mass, hbar > 0");
    Wavepacket1D p;
    p.lo = lo;
    // Periodic grid: the point at hi coincides with lo.
    p.dx = (hi - lo) / static_cast<double>(n);
    p.mass = mass;
    p.hbar = hbar;
    p.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = p.position(i);
        p.samples[i] = std::exp(-(x - x0) * (x - x0) / (4.0 * sigma * sigma)) * std::polar(1.0, k0 * x);
    }
    const double nrm = p.norm();
    for (auto& v : p.samples) v /= nrm;
    return p;
}

Complex overlap(const Wavepacket1D& a, const Wavepacket1D& b) {
    if (a.size() != b.size() || a.dx != b.dx || a.lo != b.lo)
        fail(ErrorCode::GridMismatch, "wavepackets live on different grids");
    Complex acc{0.0, 0.0};
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a.samples[i]) * b.samples[i];
    return acc * a.dx;
}

Wavepacket1D evolve_free(const Wavepacket1D& p, double t) {
    if (!(std::isfinite(t) && t >= 0.0)) fail(ErrorCode::InvalidArgument, "evolution time must be >= 0");
    Wavepacket1D out = p;
    if (t == 0.0) return out;

    const std::size_t n = p.size();
    std::vector<Complex> buf = p.samples;
    FftPlan forward(buf, FFTW_FORWARD);
    FftPlan backward(buf, FFTW_BACKWARD);
    forward.execute();
    const double length = p.dx * static_cast<double>(n);
    const double dk = 2.0 * std::numbers::pi / length;
    for (std::size_t j = 0; j < n; ++j) {
        // Signed frequency index; the Nyquist mode keeps its positive sign.
        const double m = (j <= n / 2) ? static_cast<double>(j) : static_cast<double>(j) - static_cast<double>(n);
        const double k = m * dk;
        const double phase = -p.hbar * k * k * t / (2.0 * p.mass);
        buf[j] *= std::polar(1.0 / static_cast<double>(n), phase);
    }
    backward.execute();
    out.samples = std::move(buf);
    return out;
}

Wavepacket1D translate(const Wavepacket1D& p, double d) {
    const std::size_t shift = whole_steps(d, p.dx, p.size());
    Wavepacket1D out = p;
    const std::size_t n = p.size();
    for (std::size_t i = 0; i < n; ++i) out.samples[(i + shift) % n] = p.samples[i];
    return out;
}

double translation_covariance_check(const Wavepacket1D& p, double d, double t) {
    const Wavepacket1D a = evolve_free(translate(p, d), t);
    const Wavepacket1D b = translate(evolve_free(p, t), d);
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) acc += std::norm(a.samples[i] - b.samples[i]);
    return std::sqrt(acc * p.dx);
}

}  // namespace qlif
