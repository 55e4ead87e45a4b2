#pragma once

#include <string>

#include "qlif/spacetime.hpp"

namespace qlif {

/// Leading-order map between chart coordinates and a locally inertial frame
/// anchored at a point:
///   xi      = b (x' - anchor)
///   x'      = anchor + f xi
/// with f b = b f = 1 and f^T g(anchor) f = eta.
/// Columns of f are the frame vectors; column 0 is timelike.
struct Tetrad {
    Matrix4 b = Matrix4::Identity();
    Matrix4 f = Matrix4::Identity();
    FourVector anchor = FourVector::Zero();
    std::string metric_id;
};

/// Canonical tetrad from the eigendecomposition g = O diag(lambda) O^T:
/// f = O |lambda|^{-1/2} P with the timelike direction permuted to index 0,
/// spacelike directions in ascending eigenvalue order, and each eigenvector
/// signed so that its largest-magnitude component is positive.
/// Throws DegenerateMetric for |lambda| < 1e-12 or a non-Lorentzian signature.
Tetrad build_tetrad(const Matrix4& g, const FourVector& anchor, std::string metric_id = {});
Tetrad build_tetrad(const MetricField& field, const FourVector& anchor, std::string metric_id = {});

FourVector to_local(const Tetrad& t, const FourVector& x_prime);
FourVector from_local(const Tetrad& t, const FourVector& xi);

/// f^T g f evaluated with g taken at anchor + f xi.
Matrix4 pulled_back_metric(const Tetrad& t, const MetricField& field, const FourVector& xi);

/// max |A_ij - B_ij|
double max_abs_diff(const Matrix4& a, const Matrix4& b);

}  // namespace qlif
