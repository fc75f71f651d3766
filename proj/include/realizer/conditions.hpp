#ifndef REALIZER_CONDITIONS_HPP
#define REALIZER_CONDITIONS_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "realizer/field.hpp"
#include "realizer/geometry.hpp"

namespace realizer {

/// Verdicts for div j = 0, the Frobenius condition j.curl j = 0, and the
/// orthogonal-basis hypothesis (j, curl j, j x curl j all nonzero).
struct ConditionReport {
    double div_residual = 0.0;        // max |div j| over samples
    double frobenius_residual = 0.0;  // max |j.curl j| / (|j||curl j|), 0 when curl j = 0
    double min_j_norm = 0.0;          // polished minimum of |j|
    double min_curl_norm = 0.0;       // polished minimum of |curl j|
    bool basis_ok = false;
    int sample_count = 0;
    Box3 box{};
    double tol = 0.0;
    // Where the polished minima were attained; evidence for a basis failure.
    Point3 argmin_j{};
    Point3 argmin_curl{};
};

/// Deterministic low-discrepancy point in `box`: Halton bases (2,3,5), with a
/// start offset derived from the box so reports are reproducible per region.
Point3 halton_point(const Box3& box, std::uint64_t index);

/// Sample residuals of the paper's hypotheses at n quasi-random points of
/// `box`, then polish the smallest |j| / |curl j| samples by local descent so
/// measure-zero vanishing sets are actually found. basis_ok requires
/// min |j| > tol, min |curl j| > tol and the normalized Frobenius residual
/// <= tol everywhere.
ConditionReport check_conditions(const VectorField& field, const Box3& box, int n_samples,
                                 double tol = 1e-6, double fd_step = 0.0);

} // namespace realizer

#endif
