#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qlif/qstate.hpp"
#include "qlif/spacetime.hpp"

namespace qlif {

struct GeodesicState {
    FourVector x = FourVector::Zero();
    /// dx/dtau, normalized to g(u, u) = -c^2
    FourVector u = FourVector::Zero();
    double tau = 0.0;
};

/// A trajectory that may have stopped early. When `error` is set the
/// states hold everything integrated before the failure.
struct Trajectory {
    std::vector<GeodesicState> states;
    std::optional<Error> error;

    bool complete() const { return !error.has_value(); }
};

/// g(u, u) + c^2
double normalization_residual(const MetricField& field, const GeodesicState& s);

/// Four-velocity of an observer moving with 3-velocity v (|v| < c) as
/// measured in the canonical local frame at x.
FourVector velocity_from_local(const MetricField& field, const FourVector& x, const Vector3& v);

/// Classic RK4 on (x, u) with du/dtau = -Gamma(x) u u. Returns n_steps + 1
/// states on success. Throws InvalidArgument for a non-normalized initial
/// condition; singular points reached mid-run end the trajectory with
/// `error` set.
Trajectory integrate_geodesic(const MetricField& field, const GeodesicState& init, double dtau, int n_steps,
                              const ChristoffelOptions& options = {});

struct BranchTrajectory {
    std::string mass_label;
    std::string metric_id;
    Trajectory trajectory;
};

/// One geodesic per branch, starting at the sqrt(-g)|psi|^2-weighted
/// centroid of that branch with the given local 3-velocity.
std::vector<BranchTrajectory> geodesic_superposition(const SuperposedState& state, const Vector3& init_local_velocity,
                                                     double dtau, int n_steps, const ChristoffelOptions& options = {});

/// Rows: tau,t,x,y,z,u0,u1,u2,u3 with t = x^0 / c; %.17g formatting.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory, double c);

/// Samples of a 1D wavefunction on the periodic grid lo + i dx, i < n.
struct Wavepacket1D {
    double lo = 0.0;
    double dx = 1.0;
    double mass = 1.0;
    double hbar = 1.0;
    std::vector<Complex> samples;

    std::size_t size() const { return samples.size(); }
    double position(std::size_t i) const { return lo + dx * static_cast<double>(i); }
    double norm() const;
    double mean_position() const;
    /// Standard deviation of |psi|^2.
    double width() const;

    /// psi proportional to exp(-(x - x0)^2 / (4 sigma^2) + i k0 x), unit L2 norm;
    /// sigma is the position standard deviation.
    static Wavepacket1D gaussian(double lo, double hi, std::size_t n, double x0, double sigma, double k0, double mass,
                                 double hbar = 1.0);
};

Complex overlap(const Wavepacket1D& a, const Wavepacket1D& b);

/// Spectral evolution under H = P^2 / 2m with periodic boundaries.
Wavepacket1D evolve_free(const Wavepacket1D& p, double t);

/// psi(x) -> psi(x - d), cyclic; d must be a whole number of steps.
Wavepacket1D translate(const Wavepacket1D& p, double d);

/// || evolve(translate(p, d), t) - translate(evolve(p, t), d) ||_2
double translation_covariance_check(const Wavepacket1D& p, double d, double t);

}  // namespace qlif
