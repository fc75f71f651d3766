#ifndef REALIZER_ERRORS_HPP
#define REALIZER_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

#include "realizer/geometry.hpp"

namespace realizer {

/// Base class for every error this library throws on purpose.
struct RealizerError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A field evaluator (or one of its FD stencil points) produced NaN/Inf.
struct NonFiniteField : RealizerError {
    Point3 at;
    explicit NonFiniteField(const Point3& p, const std::string& what_arg)
        : RealizerError(what_arg), at(p) {}
};

/// Expression parse failure; offset is the byte position the parser stalled at.
struct SyntaxError : RealizerError {
    std::size_t offset;
    std::string expected;
    SyntaxError(std::size_t off, const std::string& exp, const std::string& what_arg)
        : RealizerError(what_arg), offset(off), expected(exp) {}
};

/// Expression evaluation hit a domain error (ln of non-positive, atanh outside
/// (-1,1), division by zero, fractional power of a negative base, ...).
struct EvalDomain : RealizerError {
    using RealizerError::RealizerError;
};

/// |j| or |curl j| fell below the singularity guard along a trajectory.
struct SingularDirection : RealizerError {
    double at_time;
    Point3 at;
    SingularDirection(double t, const Point3& p, const std::string& what_arg)
        : RealizerError(what_arg), at_time(t), at(p) {}
};

/// Adaptive step size collapsed below the machine floor (blow-up or stiffness).
struct StepUnderflow : RealizerError {
    double at_time;
    StepUnderflow(double t, const std::string& what_arg) : RealizerError(what_arg), at_time(t) {}
};

/// Coordinate inversion failed to converge; carries the best iterate found.
struct NoConvergence : RealizerError {
    double best_residual;
    std::array<double, 3> best_times;
    NoConvergence(double r, const std::array<double, 3>& t, const std::string& what_arg)
        : RealizerError(what_arg), best_residual(r), best_times(t) {}
};

/// An operation's precondition (e.g. the orthogonal-basis hypothesis) fails.
struct PreconditionFailed : RealizerError {
    using RealizerError::RealizerError;
};

/// Planar gradient flow escaped to infinity in finite time.
struct FlowBlowup : RealizerError {
    double at_time;
    FlowBlowup(double t, const std::string& what_arg) : RealizerError(what_arg), at_time(t) {}
};

/// Planar hitting-time search exhausted its horizon without a level crossing.
struct NoCrossing : RealizerError {
    using RealizerError::RealizerError;
};

/// Bad run configuration (CLI / file input).
struct ConfigError : RealizerError {
    using RealizerError::RealizerError;
};

} // namespace realizer

#endif
