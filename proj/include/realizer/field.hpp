#ifndef REALIZER_FIELD_HPP
#define REALIZER_FIELD_HPP

#include <functional>
#include <optional>
#include <string>

#include "realizer/errors.hpp"
#include "realizer/geometry.hpp"

namespace realizer {

/// Lattice periodicity flags (unit cell [0,1] per flagged axis).
struct Periodicity {
    bool x = false;
    bool y = false;
    bool z = false;
    bool any() const { return x || y || z; }
    bool full() const { return x && y && z; }
};

/// Structural family a field is known to belong to. Some realizability
/// verdicts depend on results that only hold for a family (see periodic.hpp);
/// a plain user field is Generic.
enum class FieldStructure { Generic, Fgh, PlanarAlphaV };

/// A vector field j on R^3. The evaluator is required; curl and divergence
/// fall back to 4th-order central differences when the analytic forms are
/// not supplied. Immutable after construction, safe to share across threads.
struct VectorField {
    std::function<Vec3(const Point3&)> evaluator;
    std::function<Vec3(const Point3&)> analytic_curl;   // may be empty
    std::function<double(const Point3&)> analytic_div;  // may be empty
    Periodicity periodicity;
    std::string regularity_hint = "C2";
    FieldStructure structure = FieldStructure::Generic;

    bool has_analytic_curl() const { return static_cast<bool>(analytic_curl); }
    bool has_analytic_div() const { return static_cast<bool>(analytic_div); }
};

/// Default FD step: 1e-3 scaled by the point's magnitude.
inline double default_fd_step(const Point3& p) { return 1e-3 * std::max(1.0, norm_inf(p)); }

/// Evaluate j(p); throws NonFiniteField if p or the value is not finite.
Vec3 evaluate(const VectorField& field, const Point3& p);

/// curl j at p: analytic if available, else 4th-order central differences
/// with step h (h <= 0 selects the default step).
Vec3 curl(const VectorField& field, const Point3& p, double h = 0.0);

/// div j at p, same conventions as curl().
double divergence(const VectorField& field, const Point3& p, double h = 0.0);

/// Gradient of a scalar function by 4th-order central differences.
Vec3 fd_gradient(const std::function<double(const Point3&)>& f, const Point3& p, double h);

} // namespace realizer

#endif
