#pragma once

#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wedgelab/background.hpp"
#include "wedgelab/elliptic.hpp"
#include "wedgelab/ode.hpp"
#include "wedgelab/remainder.hpp"
#include "wedgelab/stencil.hpp"

namespace wedgelab {

// Σ_{j+l<=n} ‖∂_x^j D_ξ^l f‖² in the weighted measure.
inline double derivative_sum(const ScalarField& f, int n, const WeightSpec& w) {
    double s = 0;
    ScalarField fl = f;
    fl.set_parity(fl.parity_x(), Parity::even);
    for (int l = 0; l <= n; ++l) {
        if (l > 0) fl = adapted_Dxi(fl);
        ScalarField fj = fl;
        for (int j = 0; j + l <= n; ++j) {
            if (j > 0) fj = diff_x(fj);
            s += weighted_l2_squared(fj, w);
        }
    }
    return s;
}

// E_k = Σ_{j+l<=k} (‖∂_x^j D_ξ^l u‖² + ‖∂_x^j D_ξ^l ω‖²) + Σ_{j+l<=k+1} ‖∂_x^j D_ξ^l ψ‖².
inline double energy_Ek(const RemainderState& s, int k, const WeightSpec& w = {}) {
    if (k < 0) throw ConfigError("energy order k must be non-negative");
    return derivative_sum(s.u, k, w) + derivative_sum(s.omega, k, w) + derivative_sum(s.psi, k + 1, w);
}

struct InitialEnergyOptions {
    double y_min = -8, y_max = 6;  // y = log x
    std::size_t ny = 1401;
    std::size_t ntheta = 64;
};

struct InitialEnergyReport {
    double value = 0;          // grid value on the given domain
    double refined = 0;        // domain doubled and grid refined
    double relative_change = 0;
    double tail_estimate = 0;  // integral beyond y_max from the fitted slope
    double tail_slope = 0;     // d log(x³∫(V0²+U0²)dθ) / d log x at large x
    bool tail_converged = false;
    bool stable_3_digits = false;
};

namespace detail {

// x³ ∫_{−π/4}^{π/4} (V0² + U0²) dθ by the periodic trapezoid rule.
inline double theta_density(const SeedParams& s, double x, std::size_t ntheta) {
    const double a = -std::numbers::pi / 4, h = (std::numbers::pi / 2) / static_cast<double>(ntheta);
    double sum = 0;
    for (std::size_t k = 0; k < ntheta; ++k) {
        const double th = a + h * static_cast<double>(k);
        const auto sv = seed_values(s, x, std::tan(th));
        sum += sv.a * sv.a + sv.b * sv.b;
    }
    return x * x * x * sum * h;
}

// ∫∫ x²(V0²+U0²)|x| dx dθ over x ∈ ℝ: twice the x > 0 half, which is ∫ x⁴(...) dy.
inline double initial_energy_quadrature(const SeedParams& s, const InitialEnergyOptions& o) {
    const double h = (o.y_max - o.y_min) / static_cast<double>(o.ny - 1);
    double sum = 0;
    for (std::size_t i = 0; i < o.ny; ++i) {
        const double y = o.y_min + h * static_cast<double>(i);
        const double x = std::exp(y);
        const double wgt = (i == 0 || i + 1 == o.ny) ? 0.5 : 1.0;
        sum += wgt * x * theta_density(s, x, o.ntheta);
    }
    return 2 * sum * h;
}

} // namespace detail

// Initial energy of the background seeds. A may be zero here (degenerate seeds).
inline InitialEnergyReport initial_energy(const SeedParams& s, const InitialEnergyOptions& o = {}) {
    if (!(s.A >= 0) || !(s.B >= 0)) throw ConfigError("initial_energy needs A, B >= 0");
    if (o.ny < 3 || o.ntheta < 4 || !(o.y_max > o.y_min)) throw ConfigError("initial_energy grid is degenerate");
    InitialEnergyReport r;
    r.value = detail::initial_energy_quadrature(s, o);
    InitialEnergyOptions big = o;
    const double mid = 0.5 * (o.y_min + o.y_max), half = o.y_max - mid;
    big.y_min = mid - 2 * half;
    big.y_max = mid + 2 * half;
    big.ny = 4 * (o.ny - 1) + 1;
    big.ntheta = 2 * o.ntheta;
    r.refined = detail::initial_energy_quadrature(s, big);
    r.relative_change = r.refined != 0 ? std::abs(r.value - r.refined) / std::abs(r.refined) : 0.0;
    // slope over x ∈ [10², 10³] by least squares in log-log
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (int k = 0; k <= 20; ++k) {
        const double lx = std::log(100.0) + std::log(10.0) * k / 20.0;
        const double d = detail::theta_density(s, std::exp(lx), o.ntheta);
        if (!(d > 0)) continue;
        const double ly = std::log(d);
        sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly, ++n;
    }
    r.tail_slope = n >= 2 ? (n * sxy - sx * sy) / (n * sxx - sx * sx) : 0.0;
    // ∫_{X}^∞ d(x) dx with d ~ d(X)(x/X)^slope, doubled for x < 0
    const double X = std::exp(o.y_max);
    const double dX = detail::theta_density(s, X, o.ntheta);
    r.tail_estimate = (r.tail_slope < -1) ? 2 * dX * X / (-r.tail_slope - 1) : std::numeric_limits<double>::infinity();
    r.tail_converged = r.value == 0 || r.tail_estimate <= 0.01 * std::abs(r.value);
    r.stable_3_digits = r.relative_change <= 5e-4;
    return r;
}

// ---------------------------------------------------------------------------------------------
// Energy trace of a remainder run: Y = E_k^{1/2}, X_σ = (T−t)^σ Y.

struct EnergyRow {
    double t = 0, E_k = 0, Y = 0, X_sigma = 0, sup_u = 0, sup_omega = 0, cfl = 0;
};

struct EnergyRun {
    RemainderRun run;
    std::vector<EnergyRow> rows;
};

inline EnergyRun simulate_with_energy(RemainderSimulator& sim, const RemainderState& s0, int k, double sigma,
                                      const WeightSpec& w = {}, double fixed_dt = 0) {
    const double T = blowup_time(sim.config().seeds);
    EnergyRun out;
    out.run = sim.run(s0, fixed_dt, [&](const RemainderState& s, TrajectoryRow& r) {
        const double E = energy_Ek(s, k, w);
        out.rows.push_back({s.t, E, std::sqrt(E), std::pow(T - s.t, sigma) * std::sqrt(E), r.sup_u, r.sup_omega, r.cfl});
    });
    return out;
}

inline void write_energy_trajectory_csv(const std::string& path, const std::vector<EnergyRow>& rows,
                                        const std::string& status) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot write " + path);
    os << "t,E_k,Y,X_sigma,sup_u,sup_omega,cfl,status\n";
    for (const auto& r : rows) {
        os << format_double(r.t) << ',' << format_double(r.E_k) << ',' << format_double(r.Y) << ','
           << format_double(r.X_sigma) << ',' << format_double(r.sup_u) << ',' << format_double(r.sup_omega) << ','
           << format_double(r.cfl) << ',' << status << '\n';
    }
}

// ---------------------------------------------------------------------------------------------
// Envelope Y' = C_lin/(T−t)·Y + C_nl·Y².

struct EnvelopeParams {
    double T = 1, C_lin = 1, C_nl = 0, sigma = 1.5, Y0 = 1;

    void validate() const {
        if (!(T > 0)) throw ConfigError("envelope T must be positive");
        if (!(C_nl >= 0)) throw ConfigError("C_nl must be non-negative");
        if (!(sigma > 0)) throw ConfigError("sigma must be positive");
        if (!(Y0 >= 0)) throw ConfigError("Y0 must be non-negative");
    }
};

// Independent oracle: Z = 1/Y solves Z' + C_lin/(T−t)·Z = −C_nl, so
//   Z(t) = ((T−t)/T)^{C_lin} · (1/Y0 − C_nl T^{C_lin} J(t)),
//   J(t) = ∫_0^t (T−s)^{−C_lin} ds.
// Returns nullopt past the escape time.
inline std::optional<double> bernoulli_closed_form(const EnvelopeParams& p, double t) {
    if (p.Y0 == 0) return 0.0;
    const double c = p.C_lin, T = p.T;
    double J;
    if (std::abs(c - 1) < 1e-14) {
        J = std::log(T / (T - t));
    } else {
        J = (std::pow(T - t, 1 - c) - std::pow(T, 1 - c)) / (c - 1);
    }
    const double bracket = 1 / p.Y0 - p.C_nl * std::pow(T, c) * J;
    if (!(bracket > 0)) return std::nullopt;
    return 1 / (std::pow((T - t) / T, c) * bracket);
}

struct EnvelopePoint {
    double t, Y, X_sigma;
};

struct EnvelopeTrajectory {
    std::vector<EnvelopePoint> points;
    std::string status = "ok";     // ok | escape
    double escape_time_estimate = std::numeric_limits<double>::quiet_NaN();
};

inline EnvelopeTrajectory envelope_integrate(const EnvelopeParams& p, double t_end, double rtol = 1e-12,
                                             double escape = 1e12) {
    p.validate();
    if (!(t_end < p.T) || !(t_end >= 0)) throw ConfigError("envelope t_end must lie in [0, T)");
    EnvelopeTrajectory out;
    auto push = [&](double t, double Y) { out.points.push_back({t, Y, std::pow(p.T - t, p.sigma) * Y}); };
    if (p.Y0 == 0) {
        push(0, 0);
        push(t_end, 0);
        return out;
    }
    OdeOptions o;
    o.rtol = rtol;
    o.atol = 1e-300;
    o.escape = escape;
    const auto res = dopri45<1>(
        [&](double t, const std::array<double, 1>& y) {
            return std::array<double, 1>{p.C_lin / (p.T - t) * y[0] + p.C_nl * y[0] * y[0]};
        },
        0.0, std::array<double, 1>{p.Y0}, t_end, o);
    for (std::size_t k = 0; k < res.t.size(); ++k) push(res.t[k], res.y[k][0]);
    if (res.status == OdeStatus::escape || res.status == OdeStatus::step_underflow) {
        out.status = "escape";
        // Y ~ 1/(C_nl (t_e − t)) near a quadratic escape
        const auto& last = out.points.back();
        out.escape_time_estimate = p.C_nl > 0 ? last.t + 1 / (p.C_nl * last.Y) : last.t;
    } else if (res.status != OdeStatus::ok) {
        out.status = to_string(res.status);
    }
    return out;
}

inline void write_envelope_csv(const std::string& path, const EnvelopeTrajectory& tr) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot write " + path);
    os << "t,Y,X_sigma,status\n";
    for (const auto& pt : tr.points)
        os << format_double(pt.t) << ',' << format_double(pt.Y) << ',' << format_double(pt.X_sigma) << ',' << tr.status
           << '\n';
}

// X_σ(t) ≤ 2 X_σ(0) on [0, t_star] for the envelope started at Y0.
inline bool envelope_closes(const EnvelopeParams& p, double t_star) {
    const auto tr = envelope_integrate(p, t_star);
    if (tr.status != "ok") return false;
    const double X0 = tr.points.front().X_sigma;
    for (const auto& pt : tr.points)
        if (pt.X_sigma > 2 * X0 * (1 + 1e-12)) return false;
    return true;
}

struct BootstrapReport {
    double eps0 = 0;             // largest X_σ(0) that closes on [0, t_star]
    double t_star = 0;
    bool closes_at_given = false;
    bool sigma_below_one = false;
};

// Bisection in log X_σ(0) to relative width 5e-3. Requires the gap σ > C_lin.
inline BootstrapReport bootstrap_check(const EnvelopeParams& p, double t_star_fraction = 1 - 1e-6) {
    p.validate();
    if (!(p.sigma > p.C_lin)) {
        throw VerificationError("gap violated: sigma=" + format_double(p.sigma) + " <= C_lin=" + format_double(p.C_lin));
    }
    BootstrapReport r;
    r.t_star = p.T * t_star_fraction;
    r.sigma_below_one = p.sigma < 1;
    auto closes = [&](double X0) {
        EnvelopeParams q = p;
        q.Y0 = X0 / std::pow(p.T, p.sigma);
        return envelope_closes(q, r.t_star);
    };
    r.closes_at_given = closes(std::pow(p.T, p.sigma) * p.Y0);
    if (p.C_nl == 0) {
        r.eps0 = std::numeric_limits<double>::infinity();
        return r;
    }
    double lo = 1e-12, hi = 1.0;
    while (closes(hi)) {
        lo = hi;
        hi *= 10;
        if (hi > 1e12) {
            r.eps0 = std::numeric_limits<double>::infinity();
            return r;
        }
    }
    if (!closes(lo)) {
        r.eps0 = 0;
        return r;
    }
    while (hi / lo > 1.005) {
        const double mid = std::sqrt(lo * hi);
        (closes(mid) ? lo : hi) = mid;
    }
    r.eps0 = lo;
    return r;
}

// ---------------------------------------------------------------------------------------------

struct PowerFit {
    double exponent = std::numeric_limits<double>::quiet_NaN();
    double prefactor = std::numeric_limits<double>::quiet_NaN();
    bool defined = false;
};

// N ≈ c (T−t)^{−p} by least squares on the last decade of T−t.
inline PowerFit fit_power_law(const std::vector<double>& t, const std::vector<double>& N, double T) {
    if (t.size() != N.size()) throw ConfigError("trace columns differ in length");
    double tau_min = std::numeric_limits<double>::infinity();
    for (double s : t) tau_min = std::min(tau_min, T - s);
    if (!(tau_min > 0)) throw ConfigError("trace reaches or passes T");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    bool all_zero = true;
    for (std::size_t k = 0; k < t.size(); ++k) {
        const double tau = T - t[k];
        if (tau > 10 * tau_min * (1 + 1e-12)) continue;
        if (N[k] != 0) all_zero = false;
        if (!(std::abs(N[k]) > 0)) continue;
        const double lx = std::log(tau), ly = std::log(std::abs(N[k]));
        sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly, ++n;
    }
    PowerFit f;
    if (all_zero) return f;
    if (n < 3) throw NumericError("insufficient samples in the last decade (" + std::to_string(n) + ")");
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    f.exponent = -slope;
    f.prefactor = std::exp((sy - slope * sx) / n);
    f.defined = true;
    return f;
}

struct TransferReport {
    PowerFit background, remainder;
    bool transfer = false;
};

inline TransferReport transfer_detector(const std::vector<double>& t, const std::vector<double>& bg,
                                        const std::vector<double>& rem, double sigma, double T, double tol = 0.1) {
    TransferReport r;
    r.background = fit_power_law(t, bg, T);
    r.remainder = fit_power_law(t, rem, T);
    const bool bg_ok = r.background.defined && std::abs(r.background.exponent - 1) <= tol;
    const bool rem_ok = !r.remainder.defined || r.remainder.exponent <= sigma + 1e-12;
    r.transfer = bg_ok && rem_ok && sigma < 1;
    return r;
}

struct GronwallFit {
    double C_lin_hat = 0, C_nl_hat = 0, residual = 0;
    bool ill_conditioned = false;
};

// Y' ≈ a Y/(T−t) + b Y² with Y' from three-point nonuniform differences.
inline GronwallFit gronwall_fit(const std::vector<double>& t, const std::vector<double>& Y, double T) {
    if (t.size() != Y.size() || t.size() < 3) throw ConfigError("gronwall_fit needs at least 3 samples");
    const std::size_t n = t.size();
    Eigen::MatrixXd M(n, 2);
    Eigen::VectorXd d(n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t first = k == 0 ? 0 : (k + 1 == n ? n - 3 : k - 1);
        const std::vector<double> nodes{t[first], t[first + 1], t[first + 2]};
        const auto w = fornberg_weights(t[k], nodes, 1);
        d(static_cast<Eigen::Index>(k)) = w[0][1] * Y[first] + w[1][1] * Y[first + 1] + w[2][1] * Y[first + 2];
        M(static_cast<Eigen::Index>(k), 0) = Y[k] / (T - t[k]);
        M(static_cast<Eigen::Index>(k), 1) = Y[k] * Y[k];
    }
    GronwallFit f;
    if (M.norm() == 0 || d.norm() == 0) return f;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto sv = svd.singularValues();
    f.ill_conditioned = sv(1) <= 1e-12 * sv(0);
    const Eigen::Vector2d c = svd.solve(d);
    f.C_lin_hat = c(0);
    f.C_nl_hat = c(1);
    f.residual = (M * c - d).norm() / d.norm();
    return f;
}

// Largest relative excess of the differenced Y' over a·Y/(T−t) + b·Y²; ≤ 0 means the inequality holds at every sample.
inline double gronwall_excess(const std::vector<double>& t, const std::vector<double>& Y, double T, double a, double b) {
    if (t.size() != Y.size() || t.size() < 3) throw ConfigError("gronwall_excess needs at least 3 samples");
    double worst = -std::numeric_limits<double>::infinity();
    const std::size_t n = t.size();
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t first = k == 0 ? 0 : (k + 1 == n ? n - 3 : k - 1);
        const std::vector<double> nodes{t[first], t[first + 1], t[first + 2]};
        const auto w = fornberg_weights(t[k], nodes, 1);
        const double d = w[0][1] * Y[first] + w[1][1] * Y[first + 1] + w[2][1] * Y[first + 2];
        const double bound = a * Y[k] / (T - t[k]) + b * Y[k] * Y[k];
        const double scale = std::abs(a) * Y[k] / (T - t[k]) + std::abs(b) * Y[k] * Y[k];
        if (scale > 0) worst = std::max(worst, (d - bound) / scale);
    }
    return worst;
}

} // namespace wedgelab
