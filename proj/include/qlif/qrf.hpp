#pragma once

#include <string>
#include <utility>
#include <vector>

#include "qlif/qstate.hpp"
#include "qlif/tetrad.hpp"

namespace qlif {

struct BranchTransformRecord {
    std::string mass_label;
    std::string metric_id;
    double weight_before = 0.0;
    double weight_after = 0.0;
    double max_metric_deviation_at_origin = 0.0;
    std::size_t support_points = 0;
    /// max |x_S recovered by from_qlif - x_S|
    double mass_position_roundtrip = 0.0;
};

struct QrfTransformReport {
    double norm_before = 0.0;
    double norm_after = 0.0;
    /// max over branches and support points of |f^T g f - eta|
    double max_metric_deviation_at_origin = 0.0;
    /// |<Psi|from_qlif(to_qlif(Psi))> - 1|
    double roundtrip_error = 0.0;
    std::vector<BranchTransformRecord> branches;
};

struct QrfOptions {
    /// Worker threads for the per-point tetrad construction; results do not
    /// depend on this value.
    unsigned threads = 1;
};

/// Controlled transformation from the R frame to the locally inertial frame
/// of P. For every branch i and support point x of psi_i:
///   - the sample moves to R-relative coordinate -x (reflected grid);
///   - the tetrad b(x, g_i), f(x, g_i) is stored;
///   - the mass coordinate becomes b (x_S^(i) - x);
///   - the metric at the new origin is eta.
/// Errors: WrongFrame, SingularRegion, DegenerateMetric.
std::pair<SuperposedState, QrfTransformReport> to_qlif(const SuperposedState& s, const QrfOptions& options = {});

/// Inverse map using the stored tetrads. Errors: WrongFrame, MissingTetradRecord.
SuperposedState from_qlif(const SuperposedState& s);

struct BranchMetricDeviation {
    std::string mass_label;
    std::string metric_id;
    double at_origin = 0.0;
    /// max |g'(xi) - eta| over xi = 0 and xi = +-radius e_mu
    double within_radius = 0.0;
};

/// Pulled-back metric deviation around the new origin, per branch, over all
/// support points. Only leading order: the deviation grows linearly in radius.
std::vector<BranchMetricDeviation> check_qlif_metric(const SuperposedState& s, double radius);

/// Classical single-point map applied by to_qlif: local coordinate of the
/// mass seen from a particle at `particle`.
FourVector mass_in_local_frame(const MetricField& field, const FourVector& particle, const FourVector& mass_position);

}  // namespace qlif
