#ifndef REALIZER_DOPRI5_HPP
#define REALIZER_DOPRI5_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

#include "realizer/errors.hpp"

namespace realizer {

/// Integration statistics collected per run.
struct OdeStats {
    long steps = 0;          // accepted
    long rejected = 0;
    long rhs_evals = 0;
    double max_error_estimate = 0.0; // max scaled error of accepted steps
};

struct OdeOptions {
    double rtol = 1e-9;
    double atol = 1e-11;
    double h_init = 0.0;     // 0 = automatic
    double h_max = 0.0;      // 0 = |t1 - t0|
    long max_steps = 5000000;
};

/// View of one accepted step; dense(t) evaluates the 4th-order continuous
/// extension inside [t_begin, t_end].
template <int N>
struct StepView {
    using State = std::array<double, N>;
    double t_begin = 0.0;
    double t_end = 0.0;
    const State* y_begin = nullptr;
    const State* y_end = nullptr;
    const std::array<State, 5>* cont = nullptr;

    State dense(double t) const {
        const double h = t_end - t_begin;
        const double th = (t - t_begin) / h;
        const double th1 = 1.0 - th;
        State out;
        for (int i = 0; i < N; ++i) {
            const auto& c = *cont;
            out[i] = c[0][i] + th * (c[1][i] + th1 * (c[2][i] + th * (c[3][i] + th1 * c[4][i])));
        }
        return out;
    }
};

/// Adaptive Dormand-Prince 5(4) with Lund-stabilized (PI) step control.
/// RHS signature: void(double t, const State& y, State& dydt).
/// Observer signature: bool(const StepView<N>&); returning false stops the
/// run after that step (used for event detection).
template <int N, typename RHS, typename OBS>
std::array<double, N> dopri5_integrate(RHS&& rhs, double t0, std::array<double, N> y,
                                       double t1, const OdeOptions& opt, OdeStats* stats,
                                       OBS&& observer, double* t_reached = nullptr) {
    using State = std::array<double, N>;

    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                            a75 = -2187.0 / 6784, a76 = 11.0 / 84;
    // Error coefficients: b5 - b4.
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    // Dense output coefficients (Hairer, Norsett, Wanner).
    static constexpr double d1 = -12715105075.0 / 11282082432.0,
                            d3 = 87487479700.0 / 32700410799.0,
                            d4 = -10690763975.0 / 1880347072.0,
                            d5 = 701980252875.0 / 199316789632.0,
                            d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

    OdeStats local_stats;
    OdeStats& st = stats ? *stats : local_stats;

    if (t_reached) *t_reached = t0;
    if (t1 == t0) return y;

    const double dir = (t1 > t0) ? 1.0 : -1.0;
    const double span = std::abs(t1 - t0);
    const double hmax = (opt.h_max > 0.0) ? opt.h_max : span;

    State k1, k2, k3, k4, k5, k6, k7, ytmp, ynew;
    auto f = [&](double t, const State& yy, State& out) {
        rhs(t, yy, out);
        ++st.rhs_evals;
    };

    f(t0, y, k1);

    auto scale = [&](const State& a, const State& b, int i) {
        return opt.atol + opt.rtol * std::max(std::abs(a[i]), std::abs(b[i]));
    };

    // Automatic initial step (Hairer's hinit, simplified).
    double h = opt.h_init;
    if (h <= 0.0) {
        double dnf = 0.0, dny = 0.0;
        for (int i = 0; i < N; ++i) {
            const double sk = opt.atol + opt.rtol * std::abs(y[i]);
            dnf += (k1[i] / sk) * (k1[i] / sk);
            dny += (y[i] / sk) * (y[i] / sk);
        }
        h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * std::sqrt(dny / dnf);
        h = std::min(h, hmax);
        // One explicit Euler probe to refine.
        for (int i = 0; i < N; ++i) ytmp[i] = y[i] + dir * h * k1[i];
        f(t0 + dir * h, ytmp, k2);
        double der2 = 0.0;
        for (int i = 0; i < N; ++i) {
            const double sk = opt.atol + opt.rtol * std::abs(y[i]);
            der2 += ((k2[i] - k1[i]) / sk) * ((k2[i] - k1[i]) / sk);
        }
        der2 = std::sqrt(der2) / h;
        const double der12 = std::max(der2, std::sqrt(dnf));
        const double h1 =
            (der12 <= 1e-15) ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.2);
        h = std::min({100.0 * h, h1, hmax});
    }

    constexpr double beta = 0.04;
    constexpr double expo1 = 0.2 - beta * 0.75;
    constexpr double safe = 0.9;
    constexpr double fac1 = 0.2, fac2 = 10.0; // bounds on step ratio
    double facold = 1e-4;

    double t = t0;
    bool last = false;
    std::array<State, 5> cont;

    for (long step = 0; step < opt.max_steps;) {
        if (h > std::abs(t1 - t)) {
            h = std::abs(t1 - t);
            last = true;
        }
        const double hd = dir * h;
        if (!(std::abs(hd) > std::abs(t) * 1e-16 + 1e-300))
            throw StepUnderflow(t, "step size underflow in dopri5");

        for (int i = 0; i < N; ++i) ytmp[i] = y[i] + hd * a21 * k1[i];
        f(t + c2 * hd, ytmp, k2);
        for (int i = 0; i < N; ++i) ytmp[i] = y[i] + hd * (a31 * k1[i] + a32 * k2[i]);
        f(t + c3 * hd, ytmp, k3);
        for (int i = 0; i < N; ++i)
            ytmp[i] = y[i] + hd * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        f(t + c4 * hd, ytmp, k4);
        for (int i = 0; i < N; ++i)
            ytmp[i] = y[i] + hd * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        f(t + c5 * hd, ytmp, k5);
        for (int i = 0; i < N; ++i)
            ytmp[i] =
                y[i] + hd * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        f(t + hd, ytmp, k6);
        for (int i = 0; i < N; ++i)
            ynew[i] =
                y[i] + hd * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
        f(t + hd, ynew, k7);

        double err = 0.0;
        for (int i = 0; i < N; ++i) {
            const double ei = hd * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                                    e6 * k6[i] + e7 * k7[i]);
            const double sk = scale(y, ynew, i);
            err += (ei / sk) * (ei / sk);
        }
        err = std::sqrt(err / N);

        const double fac11 = std::pow(err, expo1);
        if (err <= 1.0) {
            // Accepted. Step-ratio uses the previous error (Lund stabilization).
            double fac = fac11 / std::pow(facold, beta);
            fac = std::max(1.0 / fac2, std::min(1.0 / fac1, fac / safe));
            const double h_next = std::min(h / fac, hmax);
            facold = std::max(err, 1e-4);
            st.max_error_estimate = std::max(st.max_error_estimate, err);
            ++st.steps;
            ++step;

            for (int i = 0; i < N; ++i) {
                const double ydiff = ynew[i] - y[i];
                const double bspl = hd * k1[i] - ydiff;
                cont[0][i] = y[i];
                cont[1][i] = ydiff;
                cont[2][i] = bspl;
                cont[3][i] = ydiff - hd * k7[i] - bspl;
                cont[4][i] = hd * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] +
                                   d6 * k6[i] + d7 * k7[i]);
            }

            StepView<N> view;
            view.t_begin = t;
            view.t_end = t + hd;
            view.y_begin = &y;
            view.y_end = &ynew;
            view.cont = &cont;

            const double t_new = t + hd;
            k1 = k7; // FSAL
            y = ynew;
            t = t_new;
            if (t_reached) *t_reached = t;

            if (!observer(view)) return y;
            if (last || std::abs(t - t1) <= 1e-14 * std::max(1.0, std::abs(t1))) return y;

            h = h_next;
        } else {
            // Rejected.
            ++st.rejected;
            ++step;
            h = h / std::min(1.0 / fac1, fac11 / safe);
            last = false;
        }
    }
    throw StepUnderflow(t, "dopri5 exceeded max step count");
}

/// Convenience overload without observer.
template <int N, typename RHS>
std::array<double, N> dopri5_integrate(RHS&& rhs, double t0, std::array<double, N> y, double t1,
                                       const OdeOptions& opt, OdeStats* stats = nullptr) {
    return dopri5_integrate<N>(std::forward<RHS>(rhs), t0, std::move(y), t1, opt, stats,
                               [](const StepView<N>&) { return true; });
}

} // namespace realizer

#endif
