#include "qlif/tetrad.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <sstream>

namespace qlif {

namespace {

constexpr double kDegenerateEigenvalue = 1e-12;

Eigen::Vector4d canonical_sign(Eigen::Vector4d v) {
    int imax = 0;
    for (int i = 1; i < 4; ++i)
        if (std::abs(v[i]) > std::abs(v[imax])) imax = i;
    if (v[imax] < 0.0) v = -v;
    return v;
}

}  // namespace

Tetrad build_tetrad(const Matrix4& g, const FourVector& anchor, std::string metric_id) {
    if (!g.allFinite()) fail(ErrorCode::DegenerateMetric, "metric has non-finite components");

    const Matrix4 sym = 0.5 * (g + g.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix4> es(sym);
    if (es.info() != Eigen::Success) fail(ErrorCode::DegenerateMetric, "eigendecomposition failed");
    const Eigen::Vector4d& lambda = es.eigenvalues();
    const Matrix4& vecs = es.eigenvectors();

    int negative = -1;
    int n_negative = 0;
    for (int i = 0; i < 4; ++i) {
        if (std::abs(lambda[i]) < kDegenerateEigenvalue) {
            std::ostringstream os;
            os << "metric eigenvalue " << lambda[i] << " below " << kDegenerateEigenvalue;
            fail(ErrorCode::DegenerateMetric, os.str());
        }
        if (lambda[i] < 0.0) {
            negative = i;
            ++n_negative;
        }
    }
    if (n_negative != 1) {
        std::ostringstream os;
        os << "metric has " << n_negative << " negative eigenvalues; expected signature (-,+,+,+)";
        fail(ErrorCode::DegenerateMetric, os.str());
    }

    // Eigen returns ascending eigenvalues, so the spacelike ones already sort.
    std::array<int, 4> order{negative, 0, 0, 0};
    int k = 1;
    for (int i = 0; i < 4; ++i)
        if (i != negative) order[k++] = i;

    Tetrad t;
    t.anchor = anchor;
    t.metric_id = std::move(metric_id);
    for (int col = 0; col < 4; ++col) {
        const int src = order[col];
        const Eigen::Vector4d v = canonical_sign(vecs.col(src));
        const double mag = std::sqrt(std::abs(lambda[src]));
        t.f.col(col) = v / mag;
        t.b.row(col) = v.transpose() * mag;
    }
    return t;
}

Tetrad build_tetrad(const MetricField& field, const FourVector& anchor, std::string metric_id) {
    return build_tetrad(field.eval(anchor), anchor, std::move(metric_id));
}

FourVector to_local(const Tetrad& t, const FourVector& x_prime) {
    return t.b * (x_prime - t.anchor);
}

FourVector from_local(const Tetrad& t, const FourVector& xi) {
    return t.anchor + t.f * xi;
}

Matrix4 pulled_back_metric(const Tetrad& t, const MetricField& field, const FourVector& xi) {
    return t.f.transpose() * field.eval(from_local(t, xi)) * t.f;
}

double max_abs_diff(const Matrix4& a, const Matrix4& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace qlif
