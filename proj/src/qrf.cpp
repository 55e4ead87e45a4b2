#include "qlif/qrf.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>

namespace qlif {

namespace {

// Runs body(begin, end) over [0, n) in contiguous chunks. Each index is
// written by exactly one worker, so output is independent of thread count.
template <class Body>
void parallel_chunks(std::size_t n, unsigned threads, Body body) {
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, n / 1024))));
    if (threads == 1) {
        body(std::size_t{0}, n);
        return;
    }
    std::exception_ptr first_error;
    std::mutex guard;
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        const std::size_t begin = t * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&, begin, end] {
            try {
                body(begin, end);
            } catch (...) {
                std::lock_guard lock(guard);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

double branch_weight(const Branch& b, double dv) {
    double w = 0.0;
    for (std::size_t n = 0; n < b.psi.size(); ++n) w += std::norm(b.psi[n]) * b.sqrt_neg_g[n];
    return std::norm(b.amplitude) * w * dv;
}

}  // namespace

FourVector mass_in_local_frame(const MetricField& field, const FourVector& particle, const FourVector& mass_position) {
    return to_local(build_tetrad(field, particle), mass_position);
}

std::pair<SuperposedState, QrfTransformReport> to_qlif(const SuperposedState& s, const QrfOptions& options) {
    if (s.frame() != Frame::R) fail(ErrorCode::WrongFrame, "to_qlif expects an R-frame state");

    const GridSpec& grid = s.grid();
    const std::size_t npts = grid.size();
    const double dv = grid.cell_volume();
    const Matrix4 eta = minkowski_eta();

    QrfTransformReport report;
    report.norm_before = s.norm();

    std::vector<Branch> out;
    out.reserve(s.branches().size());
    for (const Branch& in : s.branches()) {
        const double c = in.metric.units().c;
        std::vector<PointFrame> frames(npts);
        std::vector<double> deviation(npts, 0.0);

        parallel_chunks(npts, options.threads, [&](std::size_t begin, std::size_t end) {
            for (std::size_t n = begin; n < end; ++n) {
                if (in.psi[n] == Complex{0.0, 0.0}) continue;
                const FourVector x = grid.event(n, c);
                const Matrix4 g = in.metric.eval(x);
                const Tetrad t = build_tetrad(g, x);
                PointFrame& pf = frames[n];
                pf.b = t.b;
                pf.f = t.f;
                pf.mass_local = to_local(t, in.mass_position);
                pf.present = true;
                deviation[n] = max_abs_diff(t.f.transpose() * g * t.f, eta);
            }
        });

        Branch b;
        b.amplitude = in.amplitude;
        b.mass_label = in.mass_label;
        b.mass_position = in.mass_position;
        b.metric_id = in.metric_id;
        b.metric = in.metric;
        b.origin_metric = eta;
        // R sits at -x: reversing the flat index maps point x of the grid to
        // point -x of the reflected grid.
        b.psi.assign(in.psi.rbegin(), in.psi.rend());
        b.sqrt_neg_g.assign(in.sqrt_neg_g.rbegin(), in.sqrt_neg_g.rend());
        b.point_frames.assign(std::make_move_iterator(frames.rbegin()), std::make_move_iterator(frames.rend()));

        BranchTransformRecord rec;
        rec.mass_label = in.mass_label;
        rec.metric_id = in.metric_id;
        rec.weight_before = branch_weight(in, dv);
        rec.weight_after = branch_weight(b, dv);
        rec.max_metric_deviation_at_origin = *std::max_element(deviation.begin(), deviation.end());
        rec.support_points = static_cast<std::size_t>(
            std::count_if(b.point_frames.begin(), b.point_frames.end(), [](const PointFrame& p) { return p.present; }));
        report.max_metric_deviation_at_origin =
            std::max(report.max_metric_deviation_at_origin, rec.max_metric_deviation_at_origin);
        report.branches.push_back(rec);
        out.push_back(std::move(b));
    }

    SuperposedState result = StateAccess::assemble(grid.reflected(), Frame::P, std::move(out), s.convention());
    report.norm_after = result.norm();
    const SuperposedState back = from_qlif(result);
    report.roundtrip_error = std::abs(inner_product(s, back) - Complex{1.0, 0.0});
    for (std::size_t i = 0; i < report.branches.size(); ++i)
        report.branches[i].mass_position_roundtrip =
            (back.branches()[i].mass_position - s.branches()[i].mass_position).cwiseAbs().maxCoeff();
    return {std::move(result), std::move(report)};
}

SuperposedState from_qlif(const SuperposedState& s) {
    if (s.frame() != Frame::P) fail(ErrorCode::WrongFrame, "from_qlif expects a P-frame state");

    const GridSpec r_grid = s.grid().reflected();
    std::vector<Branch> out;
    out.reserve(s.branches().size());
    for (const Branch& in : s.branches()) {
        if (in.point_frames.size() != in.psi.size())
            fail(ErrorCode::MissingTetradRecord, "branch " + in.mass_label + " carries no tetrad records");
        const double c = in.metric.units().c;
        const std::size_t npts = in.psi.size();

        Branch b;
        b.amplitude = in.amplitude;
        b.mass_label = in.mass_label;
        b.metric_id = in.metric_id;
        b.metric = in.metric;
        b.psi.assign(in.psi.rbegin(), in.psi.rend());
        b.sqrt_neg_g.assign(in.sqrt_neg_g.rbegin(), in.sqrt_neg_g.rend());

        // Recover the mass coordinate x + f xi at every support point and
        // average in index order.
        FourVector sum = FourVector::Zero();
        std::size_t count = 0;
        for (std::size_t n = 0; n < npts; ++n) {
            const PointFrame& pf = in.point_frames[npts - 1 - n];
            if (b.psi[n] == Complex{0.0, 0.0}) continue;
            if (!pf.present)
                fail(ErrorCode::MissingTetradRecord, "branch " + in.mass_label + " lacks a tetrad at a support point");
            sum += r_grid.event(n, c) + pf.f * pf.mass_local;
            ++count;
        }
        if (count == 0) fail(ErrorCode::MissingTetradRecord, "branch " + in.mass_label + " has no support points");
        b.mass_position = sum / static_cast<double>(count);
        out.push_back(std::move(b));
    }
    return StateAccess::assemble(r_grid, Frame::R, std::move(out), s.convention());
}

std::vector<BranchMetricDeviation> check_qlif_metric(const SuperposedState& s, double radius) {
    if (s.frame() != Frame::P) fail(ErrorCode::WrongFrame, "check_qlif_metric expects a P-frame state");
    if (!(std::isfinite(radius) && radius >= 0.0)) fail(ErrorCode::InvalidArgument, "radius must be >= 0");

    const GridSpec r_grid = s.grid().reflected();
    const Matrix4 eta = minkowski_eta();
    std::vector<BranchMetricDeviation> table;
    for (const Branch& br : s.branches()) {
        if (br.point_frames.size() != br.psi.size())
            fail(ErrorCode::MissingTetradRecord, "branch " + br.mass_label + " carries no tetrad records");
        const double c = br.metric.units().c;
        const std::size_t npts = br.psi.size();
        BranchMetricDeviation row{br.mass_label, br.metric_id, 0.0, 0.0};
        row.at_origin = max_abs_diff(br.origin_metric, eta);
        for (std::size_t p = 0; p < npts; ++p) {
            const PointFrame& pf = br.point_frames[p];
            if (!pf.present) continue;
            const FourVector anchor = r_grid.event(npts - 1 - p, c);
            const double origin = max_abs_diff(pf.f.transpose() * br.metric.eval(anchor) * pf.f, eta);
            row.at_origin = std::max(row.at_origin, origin);
            row.within_radius = std::max(row.within_radius, origin);
            if (radius == 0.0) continue;
            for (int mu = 0; mu < 4; ++mu) {
                for (double sign : {-1.0, 1.0}) {
                    FourVector xi = FourVector::Zero();
                    xi[mu] = sign * radius;
                    const FourVector x = anchor + pf.f * xi;
                    const double dev = max_abs_diff(pf.f.transpose() * br.metric.eval(x) * pf.f, eta);
                    row.within_radius = std::max(row.within_radius, dev);
                }
            }
        }
        table.push_back(row);
    }
    return table;
}

}  // namespace qlif
