#include "realizer/flows.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace realizer {

namespace {

using State4 = std::array<double, 4>;

struct DirectionRhs {
    const VectorField& field;
    FlowDirection dir;
    Quadrature quad;
    const FlowOptions& opt;

    void operator()(double t, const State4& s, State4& ds) const {
        const Point3 p{s[0], s[1], s[2]};
        const Vec3 j = evaluate(field, p);
        const double nj = norm(j);
        if (nj <= opt.eps_j) {
            std::ostringstream os;
            os << "|j| = " << nj << " fell below guard at t = " << t << ", p = " << p;
            throw SingularDirection(t, p, os.str());
        }
        Vec3 v;
        double qdot = 0.0;
        if (dir == FlowDirection::D1) {
            v = j / nj;
        } else {
            const Vec3 c = curl(field, p, opt.fd_step);
            const double nc = norm(c);
            const bool needs_curl_norm = (dir != FlowDirection::D3);
            if (needs_curl_norm && nc <= opt.eps_curl) {
                std::ostringstream os;
                os << "|curl j| = " << nc << " fell below guard at t = " << t << ", p = " << p;
                throw SingularDirection(t, p, os.str());
            }
            switch (dir) {
                case FlowDirection::D2: v = c / nc; break;
                case FlowDirection::D3: v = cross(j, c) / (nj * nj); break;
                case FlowDirection::D3Tilde: v = cross(j, c) / (nj * nc); break;
                default: break;
            }
            switch (quad) {
                case Quadrature::None: break;
                case Quadrature::CurlSqOverJSq: qdot = (nc * nc) / (nj * nj); break;
                case Quadrature::CurlOverJ: qdot = nc / nj; break;
            }
        }
        ds[0] = v.x;
        ds[1] = v.y;
        ds[2] = v.z;
        ds[3] = qdot;
    }
};

Point3 to_point(const State4& s) { return {s[0], s[1], s[2]}; }

} // namespace

Trajectory integrate_flow(const VectorField& field, FlowDirection dir, const Point3& start,
                          double t_end, const FlowOptions& opt, Quadrature quad) {
    Trajectory traj;
    traj.direction = dir;
    traj.samples.push_back({0.0, start, 0.0});
    if (t_end == 0.0) return traj; // no quadrature steps taken, q = 0 exactly

    DirectionRhs rhs{field, dir, quad, opt};
    State4 y0{start.x, start.y, start.z, 0.0};
    dopri5_integrate<4>(
        rhs, 0.0, y0, t_end, opt.ode, &traj.stats, [&](const StepView<4>& step) {
            traj.samples.push_back({step.t_end, to_point(*step.y_end), (*step.y_end)[3]});
            return true;
        });
    return traj;
}

Point3 forward_map(const VectorField& field, const TripleCoordinates& coords, Normalization norm,
                   const FlowOptions& opt) {
    return forward_map_with_w(field, coords, norm, opt).first;
}

std::pair<Point3, double> forward_map_with_w(const VectorField& field,
                                             const TripleCoordinates& coords, Normalization norm,
                                             const FlowOptions& opt) {
    const char* leg = "X1";
    try {
        Point3 p = coords.x0;
        if (coords.t1 != 0.0)
            p = integrate_flow(field, FlowDirection::D1, p, coords.t1, opt).endpoint();
        leg = "X2";
        if (coords.t2 != 0.0)
            p = integrate_flow(field, FlowDirection::D2, p, coords.t2, opt).endpoint();
        leg = "X3";
        if (coords.t3 == 0.0) return {p, 0.0};
        const bool tilde = (norm == Normalization::Tilde);
        const Trajectory t3 =
            integrate_flow(field, tilde ? FlowDirection::D3Tilde : FlowDirection::D3, p,
                           coords.t3, opt, tilde ? Quadrature::CurlOverJ : Quadrature::CurlSqOverJSq);
        return {t3.endpoint(), t3.q_end()};
    } catch (SingularDirection& e) {
        std::ostringstream os;
        os << "leg " << leg << ": " << e.what();
        throw SingularDirection(e.at_time, e.at, os.str());
    } catch (StepUnderflow& e) {
        std::ostringstream os;
        os << "leg " << leg << ": " << e.what();
        throw StepUnderflow(e.at_time, os.str());
    }
}

namespace {

// Singular values of a 3x3 matrix via the eigenvalues of J^T J (closed-form
// symmetric 3x3 eigenvalue formula, Smith's trigonometric method).
std::array<double, 3> singular_values(const std::array<Vec3, 3>& col) {
    double a[3][3]; // a = J^T J (symmetric, PSD)
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) a[i][k] = dot(col[i], col[k]);

    const double tr = a[0][0] + a[1][1] + a[2][2];
    const double q = tr / 3.0;
    double p2 = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) p2 += (a[i][k] - (i == k ? q : 0.0)) * (a[i][k] - (i == k ? q : 0.0));
    const double p = std::sqrt(std::max(p2 / 6.0, 0.0));
    std::array<double, 3> eig;
    if (p < 1e-300) {
        eig = {q, q, q};
    } else {
        double b[3][3];
        for (int i = 0; i < 3; ++i)
            for (int k = 0; k < 3; ++k) b[i][k] = (a[i][k] - (i == k ? q : 0.0)) / p;
        const double detb = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1]) -
                            b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0]) +
                            b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
        const double r = std::clamp(detb / 2.0, -1.0, 1.0);
        const double phi = std::acos(r) / 3.0;
        eig[0] = q + 2.0 * p * std::cos(phi);
        eig[2] = q + 2.0 * p * std::cos(phi + 2.0 * M_PI / 3.0);
        eig[1] = tr - eig[0] - eig[2];
    }
    for (double& e : eig) e = std::sqrt(std::max(e, 0.0));
    std::sort(eig.begin(), eig.end(), std::greater<>());
    return eig;
}

// Solve A x = b for 3x3 A given by columns, Gaussian elimination with
// partial pivoting. Returns false if A is numerically singular.
bool solve3(const std::array<Vec3, 3>& col, const Vec3& b, std::array<double, 3>& x) {
    double m[3][4];
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) m[r][c] = col[c][r];
        m[r][3] = b[r];
    }
    for (int c = 0; c < 3; ++c) {
        int piv = c;
        for (int r = c + 1; r < 3; ++r)
            if (std::abs(m[r][c]) > std::abs(m[piv][c])) piv = r;
        if (std::abs(m[piv][c]) < 1e-300) return false;
        if (piv != c)
            for (int k = 0; k < 4; ++k) std::swap(m[piv][k], m[c][k]);
        for (int r = 0; r < 3; ++r) {
            if (r == c) continue;
            const double f = m[r][c] / m[c][c];
            for (int k = c; k < 4; ++k) m[r][k] -= f * m[c][k];
        }
    }
    for (int i = 0; i < 3; ++i) x[i] = m[i][3] / m[i][i];
    return true;
}

} // namespace

double condition_number_3x3(const std::array<Vec3, 3>& columns) {
    const auto sv = singular_values(columns);
    if (sv[2] <= 0.0) return std::numeric_limits<double>::infinity();
    return sv[0] / sv[2];
}

namespace {

struct ResidualEval {
    const VectorField& field;
    const Point3& x0;
    const Point3& target;
    const InvertOptions& opt;

    // Residual of the shooting problem; nullopt when the flow legs fail
    // (guard trip / blow-up), which a search step treats as "very bad".
    std::optional<Vec3> operator()(const std::array<double, 3>& t) const {
        TripleCoordinates c{x0, t[0], t[1], t[2]};
        try {
            return forward_map(field, c, opt.normalization, opt.flow) - target;
        } catch (const SingularDirection&) {
            return std::nullopt;
        } catch (const StepUnderflow&) {
            return std::nullopt;
        }
    }
};

struct NewtonOutcome {
    std::array<double, 3> t;
    double res_inf = std::numeric_limits<double>::infinity();
    bool converged = false;
    int iterations = 0;
    double condition = std::numeric_limits<double>::quiet_NaN();
};

NewtonOutcome damped_newton(const ResidualEval& eval, std::array<double, 3> t,
                            const InvertOptions& opt) {
    NewtonOutcome out;
    out.t = t;
    auto r0 = eval(t);
    if (!r0) return out;
    double r2 = norm2(*r0);
    out.res_inf = norm_inf(*r0);

    for (int it = 0; it < opt.max_iterations; ++it) {
        out.iterations = it;
        if (out.res_inf <= opt.residual_tol) {
            out.converged = true;
            return out;
        }
        // Forward-difference Jacobian of the residual in (t1,t2,t3).
        std::array<Vec3, 3> jac;
        bool jac_ok = true;
        for (int c = 0; c < 3; ++c) {
            auto tp = t;
            tp[c] += opt.jacobian_step;
            const auto rp = eval(tp);
            if (!rp) {
                jac_ok = false;
                break;
            }
            jac[c] = (*rp - *r0) / opt.jacobian_step;
        }
        if (!jac_ok) return out;
        out.condition = condition_number_3x3(jac);

        std::array<double, 3> dt;
        if (!solve3(jac, -1.0 * (*r0), dt)) return out;

        // Armijo backtracking on |r|^2.
        double lambda = 1.0;
        bool stepped = false;
        for (int bt = 0; bt < 12; ++bt, lambda *= 0.5) {
            std::array<double, 3> tn{t[0] + lambda * dt[0], t[1] + lambda * dt[1],
                                     t[2] + lambda * dt[2]};
            const auto rn = eval(tn);
            if (!rn) continue;
            const double rn2 = norm2(*rn);
            if (rn2 <= (1.0 - 1e-4 * lambda) * r2 || rn2 < r2 * 0.999999) {
                t = tn;
                r0 = rn;
                r2 = rn2;
                out.t = t;
                out.res_inf = norm_inf(*rn);
                stepped = true;
                break;
            }
        }
        if (!stepped) return out; // stalled
    }
    out.converged = out.res_inf <= opt.residual_tol;
    return out;
}

} // namespace

InvertResult invert_coordinates(const VectorField& field, const Point3& x0, const Point3& target,
                                std::optional<TripleCoordinates> guess,
                                const InvertOptions& opt) {
    ResidualEval eval{field, x0, target, opt};

    std::array<double, 3> t0{0.0, 0.0, 0.0};
    if (guess) t0 = {guess->t1, guess->t2, guess->t3};

    NewtonOutcome best = damped_newton(eval, t0, opt);
    InvertResult result;
    result.used_multistart = false;

    if (!best.converged) {
        // Multi-start over a coarse grid; polish the most promising starts.
        const int n = std::max(2, opt.multistart_per_axis);
        std::vector<std::pair<double, std::array<double, 3>>> ranked;
        const Vec3 lo = opt.multistart_box.lo, e = opt.multistart_box.extent();
        for (int i = 0; i < n; ++i)
            for (int jj = 0; jj < n; ++jj)
                for (int k = 0; k < n; ++k) {
                    std::array<double, 3> t{lo.x + e.x * i / (n - 1.0),
                                            lo.y + e.y * jj / (n - 1.0),
                                            lo.z + e.z * k / (n - 1.0)};
                    const auto r = eval(t);
                    if (r) ranked.emplace_back(norm2(*r), t);
                }
        std::sort(ranked.begin(), ranked.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        const std::size_t tries = std::min<std::size_t>(ranked.size(), 6);
        std::vector<NewtonOutcome> found;
        for (std::size_t i = 0; i < tries; ++i) {
            NewtonOutcome o = damped_newton(eval, ranked[i].second, opt);
            if (o.converged) found.push_back(o);
            if (o.res_inf < best.res_inf) best = o;
        }
        result.used_multistart = true;
        // Keep distinct converged solutions as alternates.
        for (const auto& o : found) {
            const bool same_as_best = norm_inf(Vec3{o.t[0] - best.t[0], o.t[1] - best.t[1],
                                                    o.t[2] - best.t[2]}) < 1e-4;
            if (same_as_best) continue;
            bool dup = false;
            for (const auto& alt : result.alternates)
                if (std::abs(alt.coords.t1 - o.t[0]) < 1e-4 &&
                    std::abs(alt.coords.t2 - o.t[1]) < 1e-4 &&
                    std::abs(alt.coords.t3 - o.t[2]) < 1e-4)
                    dup = true;
            if (!dup)
                result.alternates.push_back(
                    {TripleCoordinates{x0, o.t[0], o.t[1], o.t[2]}, o.res_inf});
        }
    }

    result.coords = TripleCoordinates{x0, best.t[0], best.t[1], best.t[2]};
    result.residual = best.res_inf;
    result.converged = best.converged;
    result.newton_iterations = best.iterations;
    result.jacobian_condition = best.condition;

    if (!result.converged) {
        std::ostringstream os;
        os << "invert_coordinates did not converge: best residual " << best.res_inf << " at (t1,t2,t3) = ("
           << best.t[0] << ", " << best.t[1] << ", " << best.t[2]
           << "); the diffeomorphism hypothesis may fail near the target";
        throw NoConvergence(best.res_inf, best.t, os.str());
    }
    return result;
}

double commutation_defect(const VectorField& field, const Point3& x0, double t2, double t3,
                          const FlowOptions& opt) {
    // Guard: the orthogonal-basis hypothesis must hold at the anchor.
    const Vec3 j = evaluate(field, x0);
    const Vec3 c = curl(field, x0, opt.fd_step);
    const double nj = norm(j), nc = norm(c);
    if (nj <= opt.eps_j || nc <= opt.eps_curl ||
        std::abs(dot(j, c)) / (nj * nc) > 1e-6) {
        std::ostringstream os;
        os << "orthogonal-basis hypothesis fails at " << x0 << " (|j| = " << nj
           << ", |curl j| = " << nc << ")";
        throw PreconditionFailed(os.str());
    }

    const Point3 a = integrate_flow(field, FlowDirection::D3,
                                    integrate_flow(field, FlowDirection::D2, x0, t2, opt)
                                        .endpoint(),
                                    t3, opt)
                         .endpoint();

    auto loop_gap = [&](double s2, double s3) -> std::optional<Vec3> {
        try {
            const Point3 b = integrate_flow(field, FlowDirection::D2,
                                            integrate_flow(field, FlowDirection::D3, x0, s3, opt)
                                                .endpoint(),
                                            s2, opt)
                                 .endpoint();
            return b - a;
        } catch (const SingularDirection&) {
            return std::nullopt;
        } catch (const StepUnderflow&) {
            return std::nullopt;
        }
    };

    // Gauss-Newton in (s2,s3) from the commuted times.
    double s2 = t2, s3 = t3;
    auto r = loop_gap(s2, s3);
    if (!r) throw PreconditionFailed("commutation probe left the admissible region");
    double r2 = norm2(*r);
    const double fd = 1e-6;
    for (int it = 0; it < 40 && std::sqrt(r2) > 1e-12; ++it) {
        const auto rp2 = loop_gap(s2 + fd, s3);
        const auto rp3 = loop_gap(s2, s3 + fd);
        if (!rp2 || !rp3) break;
        const Vec3 j2 = (*rp2 - *r) / fd;
        const Vec3 j3 = (*rp3 - *r) / fd;
        // Normal equations for the 2-parameter least squares step.
        const double g11 = dot(j2, j2), g12 = dot(j2, j3), g22 = dot(j3, j3);
        const double b1 = -dot(j2, *r), b2 = -dot(j3, *r);
        const double det = g11 * g22 - g12 * g12;
        if (std::abs(det) < 1e-300) break;
        const double d2 = (b1 * g22 - b2 * g12) / det;
        const double d3 = (b2 * g11 - b1 * g12) / det;
        double lambda = 1.0;
        bool stepped = false;
        for (int bt = 0; bt < 10; ++bt, lambda *= 0.5) {
            const auto rn = loop_gap(s2 + lambda * d2, s3 + lambda * d3);
            if (!rn) continue;
            if (norm2(*rn) < r2) {
                s2 += lambda * d2;
                s3 += lambda * d3;
                r = rn;
                r2 = norm2(*rn);
                stepped = true;
                break;
            }
        }
        if (!stepped) break;
    }
    return std::sqrt(r2);
}

} // namespace realizer
