#include "realizer/recon.hpp"

#include <cmath>
#include <mutex>
#include <sstream>

#include "realizer/parallel.hpp"

namespace realizer {

LogConductivitySample compute_w(const VectorField& field, const TripleCoordinates& coords,
                                Normalization norm, const FlowOptions& opt) {
    LogConductivitySample s;
    s.coords = coords;
    s.normalization = norm;
    const auto [endpoint, w] = forward_map_with_w(field, coords, norm, opt);
    s.point = endpoint;
    s.w = w;
    return s;
}

LogConductivitySample w_at_point(const VectorField& field, const Point3& x0, const Point3& p,
                                 Normalization norm, const InvertOptions& opt) {
    InvertOptions io = opt;
    io.normalization = norm;
    const InvertResult inv = invert_coordinates(field, x0, p, std::nullopt, io);
    LogConductivitySample s = compute_w(field, inv.coords, norm, io.flow);
    s.inversion_residual = inv.residual;
    s.jacobian_condition = inv.jacobian_condition;
    for (const auto& alt : inv.alternates) {
        const double w_alt = compute_w(field, alt.coords, norm, io.flow).w;
        s.alternates.push_back({alt.coords, w_alt, alt.residual});
    }
    return s;
}

double conductivity_at(const VectorField& field, const Point3& x0, const Point3& p,
                       Normalization norm, const InvertOptions& opt) {
    return std::exp(w_at_point(field, x0, p, norm, opt).w);
}

ResidualReport verify_residuals(const VectorField& field, const ScalarField& w_source,
                                const Box3& box, int grid_n, double h, int threads) {
    ResidualReport rep;
    rep.box = box;
    rep.grid_n = grid_n;
    rep.fd_step = h;

    const int n = std::max(grid_n, 1);
    const Vec3 e = box.extent();
    auto grid_point = [&](int i, int a) {
        return n == 1 ? box.center()[a] : box.lo[a] + e[a] * i / (n - 1.0);
    };

    struct Cell {
        double curl_res = 0.0;
        double grad_dot_curl = 0.0;
        double d3_identity = 0.0;
        bool ok = false;
        std::string note;
    };
    std::vector<Cell> cells(static_cast<std::size_t>(n) * n * n);

    parallel_for(cells.size(), threads, [&](std::size_t idx) {
        const int i = static_cast<int>(idx % n);
        const int jj = static_cast<int>((idx / n) % n);
        const int k = static_cast<int>(idx / (static_cast<std::size_t>(n) * n));
        const Point3 p{grid_point(i, 0), grid_point(jj, 1), grid_point(k, 2)};
        Cell& cell = cells[idx];
        try {
            const double w = w_source(p);
            const Vec3 gw = fd_gradient(w_source, p, h);
            const Vec3 j = evaluate(field, p);
            const Vec3 c = curl(field, p, 0.0);
            const double nj2 = norm2(j);
            const Vec3 curl_ewj = c - cross(gw, j); // curl(e^-w j) = e^-w (curl j - grad w x j)
            cell.curl_res = std::exp(-w) * norm(curl_ewj);
            cell.grad_dot_curl = std::abs(dot(gw, c));
            cell.d3_identity = std::abs(dot(gw, cross(j, c)) / nj2 - norm2(c) / nj2);
            cell.ok = true;
        } catch (const std::exception& ex) {
            std::ostringstream os;
            os << "w_source failed at " << p << ": " << ex.what();
            cell.note = os.str();
        }
    });

    double sum = 0.0;
    for (const Cell& cell : cells) {
        rep.points++;
        if (!cell.ok) {
            rep.failures++;
            if (rep.failure_notes.size() < 8) rep.failure_notes.push_back(cell.note);
            continue;
        }
        rep.curl_residual_max = std::max(rep.curl_residual_max, cell.curl_res);
        rep.grad_w_dot_curl_max = std::max(rep.grad_w_dot_curl_max, cell.grad_dot_curl);
        rep.d3_identity_max = std::max(rep.d3_identity_max, cell.d3_identity);
        sum += cell.curl_res;
    }
    const int good = rep.points - rep.failures;
    rep.curl_residual_mean = good > 0 ? sum / good : 0.0;
    return rep;
}

} // namespace realizer
