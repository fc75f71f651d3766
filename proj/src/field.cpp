#include "realizer/field.hpp"

#include <sstream>

namespace realizer {

namespace {

void require_finite_point(const Point3& p) {
    if (!is_finite(p)) {
        std::ostringstream os;
        os << "non-finite evaluation point " << p;
        throw NonFiniteField(p, os.str());
    }
}

Vec3 eval_checked(const VectorField& field, const Point3& p) {
    Vec3 v = field.evaluator(p);
    if (!is_finite(v)) {
        std::ostringstream os;
        os << "field evaluator returned non-finite value " << v << " at " << p;
        throw NonFiniteField(p, os.str());
    }
    return v;
}

Point3 shifted(const Point3& p, int axis, double d) {
    Point3 q = p;
    q[axis] += d;
    return q;
}

} // namespace

Vec3 evaluate(const VectorField& field, const Point3& p) {
    require_finite_point(p);
    return eval_checked(field, p);
}

// 4th-order first derivative: (-f(+2h) + 8 f(+h) - 8 f(-h) + f(-2h)) / (12 h).
Vec3 curl(const VectorField& field, const Point3& p, double h) {
    require_finite_point(p);
    if (field.has_analytic_curl()) {
        Vec3 c = field.analytic_curl(p);
        if (!is_finite(c)) throw NonFiniteField(p, "analytic curl non-finite");
        return c;
    }
    if (h <= 0.0) h = default_fd_step(p);
    Vec3 d[3]; // d[a] = d j / d x_a
    for (int a = 0; a < 3; ++a) {
        const Vec3 f1 = eval_checked(field, shifted(p, a, h));
        const Vec3 f_1 = eval_checked(field, shifted(p, a, -h));
        const Vec3 f2 = eval_checked(field, shifted(p, a, 2 * h));
        const Vec3 f_2 = eval_checked(field, shifted(p, a, -2 * h));
        d[a] = (1.0 / (12.0 * h)) * (-1.0 * f2 + 8.0 * f1 - 8.0 * f_1 + f_2);
    }
    return {d[1].z - d[2].y, d[2].x - d[0].z, d[0].y - d[1].x};
}

double divergence(const VectorField& field, const Point3& p, double h) {
    require_finite_point(p);
    if (field.has_analytic_div()) {
        double v = field.analytic_div(p);
        if (!std::isfinite(v)) throw NonFiniteField(p, "analytic divergence non-finite");
        return v;
    }
    if (h <= 0.0) h = default_fd_step(p);
    double acc = 0.0;
    for (int a = 0; a < 3; ++a) {
        const double f1 = eval_checked(field, shifted(p, a, h))[a];
        const double f_1 = eval_checked(field, shifted(p, a, -h))[a];
        const double f2 = eval_checked(field, shifted(p, a, 2 * h))[a];
        const double f_2 = eval_checked(field, shifted(p, a, -2 * h))[a];
        acc += (-f2 + 8.0 * f1 - 8.0 * f_1 + f_2) / (12.0 * h);
    }
    return acc;
}

Vec3 fd_gradient(const std::function<double(const Point3&)>& f, const Point3& p, double h) {
    Vec3 g;
    for (int a = 0; a < 3; ++a) {
        const double f1 = f(shifted(p, a, h));
        const double f_1 = f(shifted(p, a, -h));
        const double f2 = f(shifted(p, a, 2 * h));
        const double f_2 = f(shifted(p, a, -2 * h));
        g[a] = (-f2 + 8.0 * f1 - 8.0 * f_1 + f_2) / (12.0 * h);
    }
    return g;
}

} // namespace realizer
