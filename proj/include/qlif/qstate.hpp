#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "qlif/spacetime.hpp"

namespace qlif {

using Complex = std::complex<double>;

struct GridAxis {
    double lo = 0.0;
    double hi = 1.0;
    std::size_t n = 2;

    double spacing() const { return (hi - lo) / static_cast<double>(n - 1); }
    double coordinate(std::size_t i) const;
    bool operator==(const GridAxis&) const = default;
};

/// Uniform spatial grid on the slice x^0 = c t0. Samples are stored
/// row-major with axis order (x, y, z): index = (i*ny + j)*nz + k.
struct GridSpec {
    std::array<GridAxis, 3> axes{};
    double t0 = 0.0;

    void validate() const;
    std::size_t size() const { return axes[0].n * axes[1].n * axes[2].n; }
    double cell_volume() const { return axes[0].spacing() * axes[1].spacing() * axes[2].spacing(); }
    std::size_t index(std::size_t i, std::size_t j, std::size_t k) const {
        return (i * axes[1].n + j) * axes[2].n + k;
    }
    std::array<std::size_t, 3> unravel(std::size_t flat) const;
    Vector3 position(std::size_t flat) const;
    /// (c t0, x, y, z) of a grid point.
    FourVector event(std::size_t flat, double c) const;
    /// The grid seen with every coordinate negated (lo <-> -hi).
    GridSpec reflected() const;

    bool operator==(const GridSpec&) const = default;
};

enum class Frame { R, P };

std::string_view to_string(Frame frame) noexcept;

/// Bookkeeping constants of the continuum superposition: the global
/// prefactor multiplying the branch sum and the scale of the branch-state
/// overlap kernel. Effective per-branch weight = global_prefactor^2 *
/// kernel_scale, which is 1/2 for the symmetric two-branch state; amplitudes
/// here already carry that weight, so stored states satisfy <Psi|Psi> = 1.
struct PrefactorConvention {
    double global_prefactor = 1.0 / (2.0 * 1.4142135623730951);
    double kernel_scale = 4.0;

    double equal_branch_weight() const { return global_prefactor * global_prefactor * kernel_scale; }
    bool operator==(const PrefactorConvention&) const = default;
};

/// Per-point data written by the QLIF transformation. The anchor of the
/// tetrad is the original grid point; mass_local is the mass coordinate in
/// the local frame.
struct PointFrame {
    Matrix4 b = Matrix4::Identity();
    Matrix4 f = Matrix4::Identity();
    FourVector mass_local = FourVector::Zero();
    bool present = false;
};

struct Branch {
    Complex amplitude{1.0, 0.0};
    std::string mass_label;
    FourVector mass_position = FourVector::Zero();
    std::string metric_id;
    MetricField metric;
    std::vector<Complex> psi;

    // Filled by make_state: sqrt(-g) at every sample of the stored grid.
    std::vector<double> sqrt_neg_g;
    // P-frame only.
    std::vector<PointFrame> point_frames;
    Matrix4 origin_metric = minkowski_eta();
};

/// Immutable superposition of classical-spacetime branches. Operations
/// return new states.
class SuperposedState {
public:
    const GridSpec& grid() const { return grid_; }
    Frame frame() const { return frame_; }
    const std::vector<Branch>& branches() const { return branches_; }
    const PrefactorConvention& convention() const { return convention_; }
    const UnitSystem& units() const;

    /// Sum over branches of |amplitude|^2 * sum sqrt(-g)|psi|^2 dV.
    double norm() const;

private:
    friend SuperposedState make_state(std::vector<Branch>, const GridSpec&);
    friend class StateAccess;

    GridSpec grid_;
    Frame frame_ = Frame::R;
    std::vector<Branch> branches_;
    PrefactorConvention convention_;
};

/// Builds an R-frame state: each psi is normalized under the sqrt(-g) d^3x
/// measure and the amplitudes to unit total weight.
/// Errors: GridMismatch, ZeroNorm, SingularRegion, InvalidArgument for
/// repeated (mass_label, metric_id) pairs.
SuperposedState make_state(std::vector<Branch> branches, const GridSpec& grid);

/// sum over branches matched on (mass_label, metric_id) of
/// conj(amp_a) amp_b sum conj(psi_a) psi_b sqrt(-g) dV.
Complex inner_product(const SuperposedState& a, const SuperposedState& b);

/// psi(x) -> psi(x - d), periodic on the grid. d must be an integer number
/// of grid steps per axis (OffGridTranslation otherwise).
SuperposedState translate_state(const SuperposedState& s, const Vector3& d);

/// psi proportional to exp(-|x - center|^2 / (2 sigma^2)) times exp(i k.x).
std::vector<Complex> gaussian_wavefunction(const GridSpec& grid, const Vector3& center, double sigma,
                                           const Vector3& wave_vector = Vector3::Zero());

/// Binary container: magic "QLIFST01", u64 header length, JSON header
/// (grid, units, frame, convention, branch table), then per branch the raw
/// complex samples as little-endian f64 (re, im) pairs in row-major (x, y, z)
/// order, then (P-frame only) per branch the point-frame records.
void save_state(std::ostream& out, const SuperposedState& s);
SuperposedState load_state(std::istream& in);
void save_state(const std::string& path, const SuperposedState& s);
SuperposedState load_state(const std::string& path);

/// Internal constructor access used by the QRF transformation and the
/// container reader; not part of the stable surface.
class StateAccess {
public:
    static SuperposedState assemble(GridSpec grid, Frame frame, std::vector<Branch> branches,
                                    PrefactorConvention convention);
};

}  // namespace qlif
