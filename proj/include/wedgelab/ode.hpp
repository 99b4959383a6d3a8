#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

namespace wedgelab {

enum class OdeStatus { ok, escape, step_underflow, max_steps };

inline const char* to_string(OdeStatus s) {
    switch (s) {
    case OdeStatus::ok: return "ok";
    case OdeStatus::escape: return "escape";
    case OdeStatus::step_underflow: return "step-underflow";
    case OdeStatus::max_steps: return "max-steps";
    }
    return "?";
}

struct OdeOptions {
    double rtol = 1e-10;
    double atol = 1e-14;
    double h0 = 0.0;      // 0 picks 1e-3 of the interval
    double h_min = 0.0;   // step floor; reaching it ends the run with step_underflow
    double escape = std::numeric_limits<double>::infinity();  // max-norm ceiling
    std::size_t max_steps = 5'000'000;
};

template <std::size_t N>
struct OdeResult {
    std::vector<double> t;
    std::vector<std::array<double, N>> y;
    OdeStatus status = OdeStatus::ok;
};

// Dormand-Prince 5(4) with the 5th-order solution propagated and max-norm error control.
template <std::size_t N, class F>
OdeResult<N> dopri45(F&& f, double t0, std::array<double, N> y0, double t_end, const OdeOptions& opt = {}) {
    using S = std::array<double, N>;
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                     a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    constexpr double e1 = b1 - 5179.0 / 57600, e3 = b3 - 7571.0 / 16695, e4 = b4 - 393.0 / 640,
                     e5 = b5 + 92097.0 / 339200, e6 = b6 - 187.0 / 2100, e7 = -1.0 / 40;

    auto axpy = [](const S& y, double h, std::initializer_list<std::pair<double, const S*>> terms) {
        S out = y;
        for (auto [c, k] : terms)
            for (std::size_t i = 0; i < N; ++i) out[i] += h * c * (*k)[i];
        return out;
    };
    auto norm_inf = [](const S& y) {
        double m = 0;
        for (double v : y) m = std::max(m, std::abs(v));
        return m;
    };

    OdeResult<N> res;
    res.t.push_back(t0);
    res.y.push_back(y0);
    double t = t0;
    S y = y0;
    const double span = t_end - t0;
    if (span <= 0) return res;
    double h = opt.h0 > 0 ? opt.h0 : 1e-3 * span;
    S k1 = f(t, y);
    for (std::size_t step = 0; step < opt.max_steps; ++step) {
        if (t >= t_end) return res;
        bool last = false;
        if (t + h >= t_end) {
            h = t_end - t;
            last = true;
        }
        const S k2 = f(t + c2 * h, axpy(y, h, {{a21, &k1}}));
        const S k3 = f(t + c3 * h, axpy(y, h, {{a31, &k1}, {a32, &k2}}));
        const S k4 = f(t + c4 * h, axpy(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
        const S k5 = f(t + c5 * h, axpy(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
        const S k6 = f(t + h, axpy(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
        const S y5 = axpy(y, h, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
        const S k7 = f(t + h, y5);
        double err = 0;
        bool finite = true;
        for (std::size_t i = 0; i < N; ++i) {
            const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
            const double sc = opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
            err = std::max(err, std::abs(e) / sc);
            finite = finite && std::isfinite(y5[i]);
        }
        if (!finite) err = std::numeric_limits<double>::infinity();
        if (err <= 1.0) {
            t = last ? t_end : t + h;
            y = y5;
            k1 = k7;
            res.t.push_back(t);
            res.y.push_back(y);
            if (norm_inf(y) >= opt.escape) {
                res.status = OdeStatus::escape;
                return res;
            }
            if (last) return res;
            const double fac = err == 0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
            h *= fac;
        } else {
            const double fac = std::isfinite(err) ? std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9) : 0.1;
            h *= fac;
        }
        if (h < opt.h_min || h <= 4 * std::numeric_limits<double>::epsilon() * std::abs(t)) {
            res.status = OdeStatus::step_underflow;
            return res;
        }
    }
    res.status = OdeStatus::max_steps;
    return res;
}

} // namespace wedgelab
