#ifndef REALIZER_FLOWS_HPP
#define REALIZER_FLOWS_HPP

#include <optional>
#include <vector>

#include "realizer/dopri5.hpp"
#include "realizer/field.hpp"
#include "realizer/geometry.hpp"

namespace realizer {

/// Velocity law of a flow leg:
///   D1      j/|j|                    (unit speed)
///   D2      curl j/|curl j|          (unit speed)
///   D3      (j x curl j)/|j|^2       (speed |curl j|/|j| when j _|_ curl j)
///   D3Tilde (j x curl j)/(|j||curl j|) (unit speed)
enum class FlowDirection { D1, D2, D3, D3Tilde };

/// Which log-conductivity normalization a composed flow serves: Standard
/// integrates |curl j|^2/|j|^2 along D3, Tilde integrates |curl j|/|j|
/// along D3Tilde.
enum class Normalization { Standard, Tilde };

/// Scalar accumulated along a trajectory by ODE-state augmentation.
enum class Quadrature { None, CurlSqOverJSq, CurlOverJ };

struct FlowOptions {
    OdeOptions ode{};         // defaults: rtol 1e-9, atol 1e-11
    double eps_j = 1e-9;      // singularity guards; hitting one is an error
    double eps_curl = 1e-9;
    double fd_step = 0.0;     // curl FD step when no analytic curl (0 = auto)
};

struct TrajectorySample {
    double t;
    Point3 p;
    double q; // accumulated quadrature value at t
};

/// Time-stamped polyline of a flow solution plus integrator statistics.
struct Trajectory {
    std::vector<TrajectorySample> samples;
    OdeStats stats;
    FlowDirection direction{};

    const Point3& endpoint() const { return samples.back().p; }
    double q_end() const { return samples.back().q; }
    double t_end() const { return samples.back().t; }
};

/// Flow times (t1, t2, t3) anchored at a base point x0.
struct TripleCoordinates {
    Point3 x0;
    double t1 = 0.0, t2 = 0.0, t3 = 0.0;
};

/// Integrate a single flow leg from `start` over [0, t_end] (t_end may be
/// negative). Throws SingularDirection when a guard trips, StepUnderflow on
/// blow-up/stiffness collapse.
Trajectory integrate_flow(const VectorField& field, FlowDirection dir, const Point3& start,
                          double t_end, const FlowOptions& opt = {},
                          Quadrature quad = Quadrature::None);

/// Composition X3(t3, X2(t2, X1(t1, x0))); the Tilde normalization runs the
/// renormalized third leg. Returns the endpoint.
Point3 forward_map(const VectorField& field, const TripleCoordinates& coords,
                   Normalization norm = Normalization::Standard, const FlowOptions& opt = {});

/// Same composition, also returning the quadrature accumulated on leg 3
/// (|curl j|^2/|j|^2 for Standard, |curl j|/|j| for Tilde).
std::pair<Point3, double> forward_map_with_w(const VectorField& field,
                                             const TripleCoordinates& coords,
                                             Normalization norm = Normalization::Standard,
                                             const FlowOptions& opt = {});

struct InvertOptions {
    FlowOptions flow{};
    double residual_tol = 1e-8;   // |forward_map - target|_inf target
    int max_iterations = 60;
    double jacobian_step = 1e-6;  // forward-difference step on (t1,t2,t3)
    Box3 multistart_box{{-2.5, -2.5, -2.5}, {2.5, 2.5, 2.5}}; // (t1,t2,t3) grid
    int multistart_per_axis = 5;
    Normalization normalization = Normalization::Standard;
};

struct InvertSolution {
    TripleCoordinates coords;
    double residual;
};

struct InvertResult {
    TripleCoordinates coords;       // best solution found
    double residual;                // |forward_map(coords) - target|_inf
    bool converged;
    int newton_iterations;
    bool used_multistart;
    double jacobian_condition;      // 2-norm condition estimate at the solution
    std::vector<InvertSolution> alternates; // other distinct preimages found
};

/// Invert the coordinate map: find (t1,t2,t3) with X32 = target, by damped
/// Newton with FD Jacobian, falling back to a multi-start grid. Throws
/// NoConvergence (with the best iterate) when nothing reaches residual_tol.
InvertResult invert_coordinates(const VectorField& field, const Point3& x0, const Point3& target,
                                std::optional<TripleCoordinates> guess = std::nullopt,
                                const InvertOptions& opt = {});

/// Diagnostic for the X2/X3 commutation on an equipotential surface: the
/// distance |X3(t3, X2(t2, x0)) - X2(s2, X3(s3, x0))| minimized over (s2,s3).
/// Refuses (PreconditionFailed) when the orthogonal-basis hypothesis fails
/// at x0.
double commutation_defect(const VectorField& field, const Point3& x0, double t2, double t3,
                          const FlowOptions& opt = {});

/// 2-norm condition number of a 3x3 matrix (columns), via the singular
/// values; exposed for diagnostics and tests.
double condition_number_3x3(const std::array<Vec3, 3>& columns);

} // namespace realizer

#endif
