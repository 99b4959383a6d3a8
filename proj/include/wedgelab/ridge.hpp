#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "wedgelab/background.hpp"
#include "wedgelab/ode.hpp"

namespace wedgelab {

struct RidgeSpec {
    double xi0 = 1.0;
    double lambda = 1.5;
    double mu = std::sqrt(5.0 / 3.0);
};

struct RidgeState {
    double U = 0, V = 0;
};

// U_t = VU/3, V_t = V²/6 − 5U²/12.
inline RidgeState ridge_rhs(const RidgeState& s) {
    return {s.V * s.U / 3.0, s.V * s.V / 6.0 - 5.0 * s.U * s.U / 12.0};
}

// Closed form for initial data (U0, V0) = (b, a) at t = 0, no seed profile involved.
inline RidgeState ridge_closed_form(double a, double b, double t) {
    const double s = 6.0 - t * a;
    const double D = 2 * s * s + 5 * t * t * b * b;
    return {72 * b / D, 6 * (2 * a * s - 5 * t * b * b) / D};
}

struct RidgeOptions {
    double rtol = 1e-10;
    double atol = 1e-300;
    double floor_fraction = 1e-14;  // step floor relative to the time scale
    double escape = 1e12;
};

struct RidgeTrajectory {
    std::vector<double> t, U, V;
    OdeStatus status = OdeStatus::ok;
};

inline RidgeTrajectory integrate_ridge(const RidgeState& s0, double t_end, double dt0 = 0.0,
                                       const RidgeOptions& o = {}) {
    if (!std::isfinite(s0.U) || !std::isfinite(s0.V)) throw NonFiniteError("integrate_ridge: non-finite state");
    if (!(t_end > 0)) throw ConfigError("integrate_ridge: t_end must be positive");
    OdeOptions opt;
    opt.rtol = o.rtol;
    opt.atol = o.atol;
    opt.h0 = dt0;
    opt.h_min = o.floor_fraction * t_end;
    opt.escape = o.escape;
    auto rhs = [](double, const std::array<double, 2>& y) {
        const auto d = ridge_rhs({y[0], y[1]});
        return std::array<double, 2>{d.U, d.V};
    };
    auto r = dopri45<2>(rhs, 0.0, {s0.U, s0.V}, t_end, opt);
    RidgeTrajectory out;
    out.status = r.status;
    out.t = std::move(r.t);
    for (const auto& y : r.y) {
        out.U.push_back(y[0]);
        out.V.push_back(y[1]);
    }
    return out;
}

struct BlowupFit {
    double T_est = std::numeric_limits<double>::quiet_NaN();
    double residual = std::numeric_limits<double>::quiet_NaN();  // spread of t + 6/V over the window
    std::size_t samples = 0;
};

// V ≈ 6/(T − t) near escape, so each sample in the last decade of growth gives T ≈ t + 6/V.
inline BlowupFit fit_blowup(const RidgeTrajectory& tr) {
    BlowupFit f;
    if (tr.V.empty()) return f;
    const double vmax = tr.V.back();
    if (!(vmax > 0)) return f;
    double sum = 0, lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < tr.t.size(); ++i) {
        if (tr.V[i] >= vmax / 10 && tr.V[i] > 0) {
            const double Ti = tr.t[i] + 6.0 / tr.V[i];
            sum += Ti;
            lo = std::min(lo, Ti);
            hi = std::max(hi, Ti);
            ++f.samples;
        }
    }
    if (f.samples == 0) return f;
    f.T_est = sum / static_cast<double>(f.samples);
    f.residual = hi - lo;
    return f;
}

struct ClmReport {
    bool degenerate = false;       // zero trajectory: every pair fits
    double s = 0, k2 = 0;          // fitted τ = s·t and ω = k U with H = 2V
    double residual_fit_1 = 0, residual_fit_2 = 0;
    double s_printed = 6.0, k2_printed = 8.0 / 5.0;
    double residual_printed_1 = 0, residual_printed_2 = 0;
    bool matches_printed = false;
};

// With p = 1/s and q = k², the CLM identities along the trajectory become linear:
//   p U_t = 2 U V,   2 p V_t + q U²/2 = 2 V².
inline ClmReport clm_map_check(const RidgeState& s0, double horizon, double tol = 1e-10) {
    const auto tr = integrate_ridge(s0, horizon);
    const std::size_t n = tr.t.size();
    Eigen::MatrixXd M(2 * n, 2);
    Eigen::VectorXd rhs(2 * n);
    double scale1 = 0, scale2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const RidgeState st{tr.U[i], tr.V[i]};
        const auto d = ridge_rhs(st);
        M(2 * i, 0) = d.U;
        M(2 * i, 1) = 0;
        rhs(2 * i) = 2 * st.U * st.V;
        M(2 * i + 1, 0) = 2 * d.V;
        M(2 * i + 1, 1) = st.U * st.U / 2;
        rhs(2 * i + 1) = 2 * st.V * st.V;
        scale1 = std::max({scale1, std::abs(rhs(2 * i)), std::abs(M(2 * i, 0))});
        scale2 = std::max({scale2, std::abs(rhs(2 * i + 1)), std::abs(M(2 * i + 1, 0)), std::abs(M(2 * i + 1, 1))});
    }
    ClmReport rep;
    auto residuals = [&](double p, double q) {
        double r1 = 0, r2 = 0;
        for (std::size_t i = 0; i < n; ++i) {
            r1 = std::max(r1, std::abs(M(2 * i, 0) * p - rhs(2 * i)));
            r2 = std::max(r2, std::abs(M(2 * i + 1, 0) * p + M(2 * i + 1, 1) * q - rhs(2 * i + 1)));
        }
        return std::pair{scale1 > 0 ? r1 / scale1 : 0.0, scale2 > 0 ? r2 / scale2 : 0.0};
    };
    std::tie(rep.residual_printed_1, rep.residual_printed_2) = residuals(1 / rep.s_printed, rep.k2_printed);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(M);
    if (scale1 == 0 && scale2 == 0) {
        rep.degenerate = true;
        rep.s = rep.k2 = std::numeric_limits<double>::quiet_NaN();
        return rep;
    }
    if (qr.rank() < 2) {
        rep.degenerate = true;
        rep.s = rep.k2 = std::numeric_limits<double>::quiet_NaN();
        return rep;
    }
    const Eigen::Vector2d sol = qr.solve(rhs);
    rep.s = 1 / sol(0);
    rep.k2 = sol(1);
    std::tie(rep.residual_fit_1, rep.residual_fit_2) = residuals(sol(0), sol(1));
    rep.matches_printed = std::abs(rep.s - rep.s_printed) < 1e-6 * rep.s_printed &&
                          std::abs(rep.k2 - rep.k2_printed) < 1e-6 * rep.k2_printed;
    if (std::max(rep.residual_fit_1, rep.residual_fit_2) > tol) {
        throw NumericError("clm_map_check: no consistent scaling, residual " +
                           format_double(std::max(rep.residual_fit_1, rep.residual_fit_2)));
    }
    return rep;
}

// P_x = (3x/8)(U² − 2V²) on the ridge.
inline double ridge_pressure_gradient(const RidgeState& s, double x) {
    return 3.0 * x / 8.0 * (s.U * s.U - 2.0 * s.V * s.V);
}

} // namespace wedgelab
