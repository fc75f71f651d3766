#include "realizer/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

namespace realizer {

namespace {

double radical_inverse(std::uint64_t i, std::uint64_t base) {
    double inv = 1.0 / static_cast<double>(base);
    double f = inv;
    double r = 0.0;
    while (i > 0) {
        r += f * static_cast<double>(i % base);
        i /= base;
        f *= inv;
    }
    return r;
}

std::uint64_t box_seed(const Box3& box) {
    // FNV-1a over the raw bounds; only used to offset the Halton index.
    std::uint64_t h = 1469598103934665603ull;
    const double vals[6] = {box.lo.x, box.lo.y, box.lo.z, box.hi.x, box.hi.y, box.hi.z};
    for (double v : vals) {
        std::uint64_t bits;
        static_assert(sizeof(bits) == sizeof(v));
        std::memcpy(&bits, &v, sizeof(bits));
        for (int b = 0; b < 8; ++b) {
            h ^= (bits >> (8 * b)) & 0xffu;
            h *= 1099511628211ull;
        }
    }
    return h % 4096;
}

/// Derivative-free coordinate descent on |g|, shrinking steps. Good enough to
/// localize a smooth scalar minimum to ~1e-8 in a handful of sweeps.
template <typename F>
Point3 polish_minimum(const F& g, Point3 p, const Box3& box, double step0) {
    double step = step0;
    double best = g(p);
    for (int sweep = 0; sweep < 60 && step > 1e-10; ++sweep) {
        bool improved = false;
        for (int a = 0; a < 3; ++a) {
            for (double s : {step, -step}) {
                Point3 q = p;
                q[a] += s;
                q = box.clamp(q);
                const double v = g(q);
                if (v < best) {
                    best = v;
                    p = q;
                    improved = true;
                }
            }
        }
        if (!improved) step *= 0.35;
    }
    return p;
}

} // namespace

Point3 halton_point(const Box3& box, std::uint64_t index) {
    const std::uint64_t i = index + box_seed(box) + 1;
    const Vec3 e = box.extent();
    return {box.lo.x + e.x * radical_inverse(i, 2), box.lo.y + e.y * radical_inverse(i, 3),
            box.lo.z + e.z * radical_inverse(i, 5)};
}

ConditionReport check_conditions(const VectorField& field, const Box3& box, int n_samples,
                                 double tol, double fd_step) {
    if (n_samples < 1) throw std::invalid_argument("check_conditions: n_samples must be >= 1");

    ConditionReport rep;
    rep.sample_count = n_samples;
    rep.box = box;
    rep.tol = tol;

    const auto j_norm = [&](const Point3& p) { return norm(evaluate(field, p)); };
    const auto curl_norm = [&](const Point3& p) { return norm(curl(field, p, fd_step)); };

    double max_div = 0.0;
    double max_frob = 0.0;
    // Keep the few smallest samples of each norm as polish seeds.
    constexpr int kSeeds = 6;
    std::vector<std::pair<double, Point3>> low_j, low_c;

    for (int i = 0; i < n_samples; ++i) {
        const Point3 p = halton_point(box, static_cast<std::uint64_t>(i));
        const Vec3 j = evaluate(field, p);
        const Vec3 c = curl(field, p, fd_step);
        const double nj = norm(j);
        const double nc = norm(c);
        max_div = std::max(max_div, std::abs(divergence(field, p, fd_step)));
        if (nc > 0.0 && nj > 0.0)
            max_frob = std::max(max_frob, std::abs(dot(j, c)) / (nj * nc));
        low_j.emplace_back(nj, p);
        low_c.emplace_back(nc, p);
        auto by_val = [](const auto& a, const auto& b) { return a.first < b.first; };
        std::sort(low_j.begin(), low_j.end(), by_val);
        std::sort(low_c.begin(), low_c.end(), by_val);
        if (low_j.size() > kSeeds) low_j.resize(kSeeds);
        if (low_c.size() > kSeeds) low_c.resize(kSeeds);
    }

    const double step0 = 0.25 * norm_inf(box.extent());
    double min_j = low_j.front().first;
    rep.argmin_j = low_j.front().second;
    for (const auto& [v0, p] : low_j) {
        (void)v0;
        const Point3 q = polish_minimum(j_norm, p, box, step0);
        const double m = j_norm(q);
        if (m < min_j) {
            min_j = m;
            rep.argmin_j = q;
        }
    }
    double min_c = low_c.front().first;
    rep.argmin_curl = low_c.front().second;
    for (const auto& [v0, p] : low_c) {
        (void)v0;
        const Point3 q = polish_minimum(curl_norm, p, box, step0);
        const double m = curl_norm(q);
        if (m < min_c) {
            min_c = m;
            rep.argmin_curl = q;
        }
    }

    rep.div_residual = max_div;
    rep.frobenius_residual = max_frob;
    rep.min_j_norm = min_j;
    rep.min_curl_norm = min_c;
    rep.basis_ok = (min_j > tol) && (min_c > tol) && (max_frob <= tol);
    return rep;
}

} // namespace realizer
