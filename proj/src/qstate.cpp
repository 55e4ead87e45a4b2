#include "qlif/qstate.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <utility>

#include "qlif/json_io.hpp"

namespace qlif {

namespace {

constexpr char kMagic[8] = {'Q', 'L', 'I', 'F', 'S', 'T', '0', '1'};

struct BranchKey {
    const std::string& label;
    const std::string& metric;
    bool operator==(const BranchKey& o) const { return label == o.label && metric == o.metric; }
};

BranchKey key_of(const Branch& b) { return {b.mass_label, b.metric_id}; }

const Branch* find_branch(const std::vector<Branch>& branches, const BranchKey& key) {
    for (const auto& b : branches)
        if (key_of(b) == key) return &b;
    return nullptr;
}

// Deterministic fixed-order sum of conj(a) b w dV.
Complex weighted_overlap(const std::vector<Complex>& a, const std::vector<Complex>& b,
                         const std::vector<double>& weight, double dv) {
    Complex acc{0.0, 0.0};
    for (std::size_t n = 0; n < a.size(); ++n) acc += std::conj(a[n]) * b[n] * weight[n];
    return acc * dv;
}

std::vector<double> sample_sqrt_neg_g(const MetricField& metric, const GridSpec& grid,
                                      const std::vector<Complex>& psi) {
    std::vector<double> w(grid.size(), 0.0);
    const double c = metric.units().c;
    for (std::size_t n = 0; n < w.size(); ++n) {
        // Points outside the support may sit in the singular set; only the
        // support must be valid.
        if (psi[n] == Complex{0.0, 0.0}) {
            try {
                w[n] = metric.sqrt_neg_det(grid.event(n, c));
            } catch (const Error& e) {
                if (e.code() != ErrorCode::SingularRegion) throw;
                w[n] = 0.0;
            }
        } else {
            w[n] = metric.sqrt_neg_det(grid.event(n, c));
        }
    }
    return w;
}

// little-endian primitives
void write_u64(std::ostream& out, std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xffu);
    out.write(reinterpret_cast<const char*>(buf), 8);
}

void write_f64(std::ostream& out, double v) {
    write_u64(out, std::bit_cast<std::uint64_t>(v));
}

std::uint64_t read_u64(std::istream& in) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), 8);
    if (!in) fail(ErrorCode::Format, "state container truncated");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

double read_f64(std::istream& in) {
    return std::bit_cast<double>(read_u64(in));
}

void write_matrix(std::ostream& out, const Matrix4& m) {
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) write_f64(out, m(r, c));
}

Matrix4 read_matrix(std::istream& in) {
    Matrix4 m;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) m(r, c) = read_f64(in);
    return m;
}

}  // namespace

double GridAxis::coordinate(std::size_t i) const {
    if (i + 1 == n) return hi;
    return lo + spacing() * static_cast<double>(i);
}

void GridSpec::validate() const {
    for (const auto& a : axes) {
        if (a.n < 2) fail(ErrorCode::InvalidArgument, "grid axes need at least 2 points");
        if (!(std::isfinite(a.lo) && std::isfinite(a.hi) && a.lo < a.hi))
            fail(ErrorCode::InvalidArgument, "grid axis bounds must be finite with lo < hi");
    }
    if (!std::isfinite(t0)) fail(ErrorCode::InvalidArgument, "grid t0 must be finite");
}

std::array<std::size_t, 3> GridSpec::unravel(std::size_t flat) const {
    const std::size_t k = flat % axes[2].n;
    const std::size_t rest = flat / axes[2].n;
    return {rest / axes[1].n, rest % axes[1].n, k};
}

Vector3 GridSpec::position(std::size_t flat) const {
    const auto [i, j, k] = unravel(flat);
    return {axes[0].coordinate(i), axes[1].coordinate(j), axes[2].coordinate(k)};
}

FourVector GridSpec::event(std::size_t flat, double c) const {
    const Vector3 p = position(flat);
    return {c * t0, p[0], p[1], p[2]};
}

GridSpec GridSpec::reflected() const {
    GridSpec r = *this;
    for (auto& a : r.axes) a = GridAxis{-a.hi, -a.lo, a.n};
    return r;
}

std::string_view to_string(Frame frame) noexcept {
    return frame == Frame::R ? "R" : "P";
}

const UnitSystem& SuperposedState::units() const {
    static const UnitSystem fallback = UnitSystem::geometric();
    return branches_.empty() ? fallback : branches_.front().metric.units();
}

double SuperposedState::norm() const {
    return inner_product(*this, *this).real();
}

SuperposedState StateAccess::assemble(GridSpec grid, Frame frame, std::vector<Branch> branches,
                                      PrefactorConvention convention) {
    SuperposedState s;
    s.grid_ = std::move(grid);
    s.frame_ = frame;
    s.branches_ = std::move(branches);
    s.convention_ = convention;
    return s;
}

SuperposedState make_state(std::vector<Branch> branches, const GridSpec& grid) {
    grid.validate();
    if (branches.empty()) fail(ErrorCode::InvalidArgument, "a state needs at least one branch");

    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& b : branches) {
        if (!seen.emplace(b.mass_label, b.metric_id).second)
            fail(ErrorCode::InvalidArgument,
                 "branches must carry distinct (mass_label, metric_id) pairs; repeated (" + b.mass_label + ", " +
                     b.metric_id + ")");
        if (!(b.metric.units() == branches.front().metric.units()))
            fail(ErrorCode::InvalidArgument, "all branch metrics must share one unit system");
        if (b.psi.size() != grid.size()) {
            std::ostringstream os;
            os << "branch " << b.mass_label << " has " << b.psi.size() << " samples, grid has " << grid.size();
            fail(ErrorCode::GridMismatch, os.str());
        }
        if (!is_finite(b.mass_position)) fail(ErrorCode::InvalidArgument, "mass position must be finite");
    }

    const double dv = grid.cell_volume();
    double amp_weight = 0.0;
    for (auto& b : branches) {
        b.sqrt_neg_g = sample_sqrt_neg_g(b.metric, grid, b.psi);
        double w = 0.0;
        for (std::size_t n = 0; n < b.psi.size(); ++n) w += std::norm(b.psi[n]) * b.sqrt_neg_g[n];
        w *= dv;
        if (!(std::isfinite(w) && w > 0.0))
            fail(ErrorCode::ZeroNorm, "branch " + b.mass_label + " wavefunction has zero or non-finite norm");
        const double scale = 1.0 / std::sqrt(w);
        for (auto& v : b.psi) v *= scale;
        b.point_frames.clear();
        b.origin_metric = minkowski_eta();
        amp_weight += std::norm(b.amplitude);
    }
    if (!(std::isfinite(amp_weight) && amp_weight > 0.0))
        fail(ErrorCode::ZeroNorm, "branch amplitudes are all zero");
    const double amp_scale = 1.0 / std::sqrt(amp_weight);
    for (auto& b : branches) b.amplitude *= amp_scale;

    return StateAccess::assemble(grid, Frame::R, std::move(branches), PrefactorConvention{});
}

Complex inner_product(const SuperposedState& a, const SuperposedState& b) {
    if (!(a.grid() == b.grid())) fail(ErrorCode::GridMismatch, "inner product of states on different grids");
    if (a.frame() != b.frame()) fail(ErrorCode::WrongFrame, "inner product of states in different frames");
    const double dv = a.grid().cell_volume();
    Complex total{0.0, 0.0};
    for (const auto& ba : a.branches()) {
        const Branch* bb = find_branch(b.branches(), key_of(ba));
        if (!bb) continue;
        total += std::conj(ba.amplitude) * bb->amplitude * weighted_overlap(ba.psi, bb->psi, ba.sqrt_neg_g, dv);
    }
    return total;
}

SuperposedState translate_state(const SuperposedState& s, const Vector3& d) {
    if (s.frame() != Frame::R) fail(ErrorCode::WrongFrame, "translate_state acts on R-frame states");
    const GridSpec& g = s.grid();
    std::array<std::ptrdiff_t, 3> shift{};
    for (int a = 0; a < 3; ++a) {
        const double steps = d[a] / g.axes[a].spacing();
        const double rounded = std::round(steps);
        if (!std::isfinite(steps) || std::abs(steps - rounded) > 1e-9 * std::max(1.0, std::abs(steps))) {
            std::ostringstream os;
            os << "translation " << d[a] << " along axis " << a << " is not a whole number of grid steps ("
               << g.axes[a].spacing() << ")";
            fail(ErrorCode::OffGridTranslation, os.str());
        }
        const auto n = static_cast<std::ptrdiff_t>(g.axes[a].n);
        shift[a] = ((static_cast<std::ptrdiff_t>(rounded) % n) + n) % n;
    }

    std::vector<Branch> out = s.branches();
    for (auto& b : out) {
        std::vector<Complex> moved(b.psi.size());
        for (std::size_t n = 0; n < b.psi.size(); ++n) {
            const auto [i, j, k] = g.unravel(n);
            const std::size_t ti = (i + shift[0]) % g.axes[0].n;
            const std::size_t tj = (j + shift[1]) % g.axes[1].n;
            const std::size_t tk = (k + shift[2]) % g.axes[2].n;
            moved[g.index(ti, tj, tk)] = b.psi[n];
        }
        b.psi = std::move(moved);
        b.sqrt_neg_g = sample_sqrt_neg_g(b.metric, g, b.psi);
    }
    return StateAccess::assemble(g, Frame::R, std::move(out), s.convention());
}

std::vector<Complex> gaussian_wavefunction(const GridSpec& grid, const Vector3& center, double sigma,
                                           const Vector3& wave_vector) {
    grid.validate();
    if (!(std::isfinite(sigma) && sigma > 0.0)) fail(ErrorCode::InvalidArgument, "Gaussian width must be > 0");
    std::vector<Complex> psi(grid.size());
    for (std::size_t n = 0; n < psi.size(); ++n) {
        const Vector3 x = grid.position(n);
        const double r2 = (x - center).squaredNorm();
        psi[n] = std::exp(-r2 / (2.0 * sigma * sigma)) * std::polar(1.0, wave_vector.dot(x));
    }
    return psi;
}

void save_state(std::ostream& out, const SuperposedState& s) {
    using json_io::json;
    json header;
    header["format"] = "qlif-state";
    header["version"] = 1;
    header["grid"] = json_io::to_json(s.grid());
    header["units"] = json_io::to_json(s.units());
    header["frame"] = std::string(to_string(s.frame()));
    header["convention"] = {{"global_prefactor", s.convention().global_prefactor},
                            {"kernel_scale", s.convention().kernel_scale}};
    header["sample_encoding"] = "f64le complex (re, im), row-major axis order (x, y, z)";
    json table = json::array();
    for (const auto& b : s.branches()) {
        table.push_back({{"amplitude", {b.amplitude.real(), b.amplitude.imag()}},
                         {"mass_label", b.mass_label},
                         {"mass_position", json_io::to_json(b.mass_position)},
                         {"metric_id", b.metric_id},
                         {"metric", json_io::to_json(b.metric)},
                         {"samples", b.psi.size()},
                         {"point_frames", b.point_frames.size()}});
    }
    header["branches"] = table;

    const std::string text = header.dump();
    out.write(kMagic, sizeof kMagic);
    write_u64(out, text.size());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto& b : s.branches())
        for (const auto& v : b.psi) {
            write_f64(out, v.real());
            write_f64(out, v.imag());
        }
    // Point-frame record: u64 present flag, b (16), f (16), mass_local (4).
    for (const auto& b : s.branches())
        for (const auto& pf : b.point_frames) {
            write_u64(out, pf.present ? 1u : 0u);
            write_matrix(out, pf.b);
            write_matrix(out, pf.f);
            for (int i = 0; i < 4; ++i) write_f64(out, pf.mass_local[i]);
        }
    if (!out) fail(ErrorCode::Io, "failed writing state container");
}

SuperposedState load_state(std::istream& in) {
    using json_io::json;
    char magic[8];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) fail(ErrorCode::Format, "not a qlif state container");
    const std::uint64_t len = read_u64(in);
    if (len > (std::uint64_t{1} << 32)) fail(ErrorCode::Format, "state header too large");
    std::string text(len, '\0');
    in.read(text.data(), static_cast<std::streamsize>(len));
    if (!in) fail(ErrorCode::Format, "state container truncated");

    json header;
    try {
        header = json::parse(text);
    } catch (const json::exception& e) {
        fail(ErrorCode::Format, std::string("state header: ") + e.what());
    }

    try {
        const GridSpec grid = json_io::grid_from_json(header.at("grid"));
        const UnitSystem units = json_io::units_from_json(header.at("units"));
        const std::string frame_text = header.at("frame").get<std::string>();
        if (frame_text != "R" && frame_text != "P") fail(ErrorCode::Format, "unknown frame tag " + frame_text);
        const Frame frame = frame_text == "R" ? Frame::R : Frame::P;
        PrefactorConvention conv;
        conv.global_prefactor = header.at("convention").at("global_prefactor").get<double>();
        conv.kernel_scale = header.at("convention").at("kernel_scale").get<double>();

        const GridSpec& stored_grid = grid;
        std::vector<Branch> branches;
        for (const auto& row : header.at("branches")) {
            Branch b;
            const auto& amp = row.at("amplitude");
            b.amplitude = Complex(amp.at(0).get<double>(), amp.at(1).get<double>());
            b.mass_label = row.at("mass_label").get<std::string>();
            b.mass_position = json_io::four_vector_from_json(row.at("mass_position"));
            b.metric_id = row.at("metric_id").get<std::string>();
            b.metric = json_io::metric_from_json(row.at("metric"), units);
            const auto samples = row.at("samples").get<std::size_t>();
            if (samples != stored_grid.size()) fail(ErrorCode::Format, "branch sample count does not match grid");
            b.point_frames.resize(row.at("point_frames").get<std::size_t>());
            if (!b.point_frames.empty() && b.point_frames.size() != samples)
                fail(ErrorCode::Format, "point-frame count does not match grid");
            b.psi.resize(samples);
            branches.push_back(std::move(b));
        }
        for (auto& b : branches)
            for (auto& v : b.psi) {
                const double re = read_f64(in);
                const double im = read_f64(in);
                v = Complex(re, im);
            }
        for (auto& b : branches)
            for (auto& pf : b.point_frames) {
                pf.present = read_u64(in) != 0;
                pf.b = read_matrix(in);
                pf.f = read_matrix(in);
                for (int i = 0; i < 4; ++i) pf.mass_local[i] = read_f64(in);
            }

        // sqrt(-g) is a function of the metric and the R-frame position; the
        // P-frame grid is the reflected R-frame grid.
        const GridSpec r_grid = frame == Frame::R ? stored_grid : stored_grid.reflected();
        for (auto& b : branches) {
            std::vector<Complex> r_psi = b.psi;
            if (frame == Frame::P) {
                const std::size_t n = r_psi.size();
                for (std::size_t i = 0; i < n; ++i) r_psi[i] = b.psi[n - 1 - i];
            }
            std::vector<double> w = sample_sqrt_neg_g(b.metric, r_grid, r_psi);
            if (frame == Frame::P) std::reverse(w.begin(), w.end());
            b.sqrt_neg_g = std::move(w);
            if (frame == Frame::P) b.origin_metric = minkowski_eta();
        }
        return StateAccess::assemble(stored_grid, frame, std::move(branches), conv);
    } catch (const json::exception& e) {
        fail(ErrorCode::Format, std::string("state header: ") + e.what());
    }
}

void save_state(const std::string& path, const SuperposedState& s) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::Io, "cannot open " + path + " for writing");
    save_state(out, s);
}

SuperposedState load_state(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Io, "cannot open " + path);
    return load_state(in);
}

}  // namespace qlif
