#ifndef REALIZER_RECON_HPP
#define REALIZER_RECON_HPP

#include <functional>
#include <string>
#include <vector>

#include "realizer/flows.hpp"

namespace realizer {

/// One reconstructed value of the log-conductivity w = ln sigma.
struct LogConductivitySample {
    Point3 point;
    TripleCoordinates coords;
    double w = 0.0;
    Normalization normalization = Normalization::Standard;
    // Diagnostics filled in by w_at_point.
    double inversion_residual = 0.0;
    double jacobian_condition = std::numeric_limits<double>::quiet_NaN();
    // When the coordinate inversion found several preimages (the map is not
    // injective there), their w values are all reported.
    struct Alternate {
        TripleCoordinates coords;
        double w;
        double residual;
    };
    std::vector<Alternate> alternates;
};

/// Residual statistics certifying curl(e^{-w} j) = 0 and the two
/// directional-derivative identities of the construction.
struct ResidualReport {
    double curl_residual_max = 0.0;   // max |curl(e^{-w} j)|
    double curl_residual_mean = 0.0;
    double grad_w_dot_curl_max = 0.0; // max |grad w . curl j|
    double d3_identity_max = 0.0;     // max |grad w . (j x curl j)/|j|^2 - |curl j|^2/|j|^2|
    Box3 box{};
    int grid_n = 0;
    double fd_step = 0.0;
    int points = 0;
    int failures = 0;
    std::vector<std::string> failure_notes; // first few, annotated with the grid point
};

using ScalarField = std::function<double(const Point3&)>;

/// w at given flow coordinates: quadrature of |curl j|^2/|j|^2 (Standard,
/// along X3) or |curl j|/|j| (Tilde, along the renormalized X3), integrated
/// jointly with the flow. t3 = 0 gives w = 0 exactly.
LogConductivitySample compute_w(const VectorField& field, const TripleCoordinates& coords,
                                Normalization norm = Normalization::Standard,
                                const FlowOptions& opt = {});

/// w at a spatial point: invert the coordinate map at p, then compute_w.
/// NoConvergence propagates from the inversion.
LogConductivitySample w_at_point(const VectorField& field, const Point3& x0, const Point3& p,
                                 Normalization norm = Normalization::Standard,
                                 const InvertOptions& opt = {});

/// sigma = e^w at a spatial point.
double conductivity_at(const VectorField& field, const Point3& x0, const Point3& p,
                       Normalization norm = Normalization::Standard,
                       const InvertOptions& opt = {});

/// Check an arbitrary w source (closed form or reconstructed) against the
/// field on a grid_n^3 lattice over box: grad w by 4th-order central
/// differences with step h, curl j analytic when available. Failures of
/// w_source are recorded per grid point and the scan continues.
ResidualReport verify_residuals(const VectorField& field, const ScalarField& w_source,
                                const Box3& box, int grid_n, double h, int threads = 0);

} // namespace realizer

#endif
