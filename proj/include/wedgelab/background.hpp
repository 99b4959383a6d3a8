#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "wedgelab/calculus.hpp"
#include "wedgelab/error.hpp"
#include "wedgelab/jet.hpp"

namespace wedgelab {

enum class RDef { ridge_x2, aniso_poly, aniso_trig };
enum class SeedShape { cubic_3_6, cubic_r3 };
// Off-ridge continuation of G. Both are heuristics: only G = V on the ridge is known.
enum class GExtension { equal_v, zero_blend };

inline const char* to_string(RDef r) {
    switch (r) {
    case RDef::ridge_x2: return "ridge-x2";
    case RDef::aniso_poly: return "aniso-poly";
    case RDef::aniso_trig: return "aniso-trig";
    }
    return "?";
}
inline const char* to_string(SeedShape s) { return s == SeedShape::cubic_3_6 ? "cubic-3-6" : "cubic-r3"; }
inline const char* to_string(GExtension g) { return g == GExtension::equal_v ? "G=V" : "G=0-blend"; }

inline RDef parse_rdef(const std::string& s) {
    if (s == "ridge-x2") return RDef::ridge_x2;
    if (s == "aniso-poly") return RDef::aniso_poly;
    if (s == "aniso-trig") return RDef::aniso_trig;
    throw ConfigError("unknown r_def '" + s + "'");
}
inline SeedShape parse_shape(const std::string& s) {
    if (s == "cubic-3-6") return SeedShape::cubic_3_6;
    if (s == "cubic-r3") return SeedShape::cubic_r3;
    throw ConfigError("unknown seed_shape '" + s + "'");
}
inline GExtension parse_gext(const std::string& s) {
    if (s == "G=V" || s == "equal-v") return GExtension::equal_v;
    if (s == "G=0-blend" || s == "zero-blend") return GExtension::zero_blend;
    throw ConfigError("unknown G extension '" + s + "'");
}

struct SeedParams {
    double A = 6.0;
    double B = 1.0;
    double A1 = 0.0;
    int m = 2;
    RDef r_def = RDef::ridge_x2;
    SeedShape shape = SeedShape::cubic_3_6;
    int u_sign = 1;

    void validate() const {
        if (!(A > 0) || !std::isfinite(A)) throw ConfigError("seed amplitude A must be positive");
        if (!(B >= 0) || !std::isfinite(B)) throw ConfigError("seed amplitude B must be nonnegative");
        if (!(A1 >= 0)) throw ConfigError("anisotropy amplitude A1 must be nonnegative");
        if (m < 1) throw ConfigError("flatness power m must be >= 1");
        if (u_sign != 1 && u_sign != -1) throw ConfigError("u_sign must be +1 or -1");
    }
};

inline double blowup_time(const SeedParams& s) {
    if (!(s.A > 0)) throw ConfigError("blowup_time needs A > 0");
    return 6.0 / s.A;
}

// Closest a query may come to T before evaluation is refused.
inline constexpr double kBlowupGuard = 1e-12;
inline constexpr double kDenominatorFloor = 1e-300;

template <class T>
T seed_r(const SeedParams& s, T x, T xi) {
    switch (s.r_def) {
    case RDef::ridge_x2: return x * x;
    case RDef::aniso_poly: return x * x + s.A1 * ipow(xi * xi - 1.0, 2 * s.m);
    case RDef::aniso_trig: {
        const T c2 = (1.0 - xi * xi) / (1.0 + xi * xi);  // cos 2θ with ξ = tan θ
        return x * x * (1.0 + c2 * c2);
    }
    }
    return x * x;
}

template <class T>
struct SeedValues {
    T a, b, A_minus_a;  // V0, U0 (unsigned), and A − V0 without cancellation
};

template <class T>
SeedValues<T> seed_values(const SeedParams& s, T x, T xi) {
    const T r = seed_r(s, x, xi);
    if (s.shape == SeedShape::cubic_3_6) {
        const T p = 1.0 + r;
        const T p3 = p * p * p;
        return {s.A / p3, s.B * r / (p3 * p3), s.A * (r * (3.0 + r * (3.0 + r))) / p3};
    }
    const T r3 = r * r * r;
    const T q = 1.0 + r3;
    return {s.A / q, s.B * r / (q * q), s.A * r3 / q};
}

template <class T>
struct ClosedForm {
    T V, U, D;
};

// Closed-form ridge solution with (a,b) = seeds(x,ξ); no domain checks.
// Uses 6 − t a = A(T − t) + t(A − a) so V stays accurate as t → T at the apex.
template <class T>
ClosedForm<T> closed_form(const SeedParams& s, double t, T x, T xi) {
    const auto sv = seed_values(s, x, xi);
    const double T_b = 6.0 / s.A;
    const T sd = s.A * (T_b - t) + t * sv.A_minus_a;
    const T D = 2.0 * sd * sd + 5.0 * t * t * sv.b * sv.b;
    const T V = 6.0 * (2.0 * sv.a * sd - 5.0 * t * sv.b * sv.b) / D;
    const T U = static_cast<double>(s.u_sign) * 72.0 * sv.b / D;
    return {V, U, D};
}

template <class T>
T g_extension(GExtension ext, T V, T xi) {
    if (ext == GExtension::equal_v) return V;
    const T w = 1.0 - xi * xi;
    return (1.0 - w * w) * V;
}

struct BackgroundSample {
    double t = 0, x = 0, xi = 0;
    double V = 0, U = 0, G = 0, denominator = 0;
};

inline void check_time(const SeedParams& s, double t) {
    const double T = blowup_time(s);
    if (!(t >= 0)) throw ConfigError("background time must be >= 0");
    if (t > T - kBlowupGuard * std::max(1.0, T)) {
        throw BlowupError("background evaluation at t=" + format_double(t) + " is within the guard of T=" +
                          format_double(T));
    }
}

inline BackgroundSample eval_background(const SeedParams& s, double t, double x, double xi,
                                        GExtension ext = GExtension::equal_v) {
    s.validate();
    check_time(s, t);
    if (std::abs(xi) > 1.0) throw ConfigError("xi must lie in [-1, 1]");
    const auto cf = closed_form<double>(s, t, x, xi);
    if (!(cf.D > kDenominatorFloor)) throw BlowupError("closed-form denominator vanished");
    return {t, x, xi, cf.V, cf.U, g_extension(ext, cf.V, xi), cf.D};
}

// 4th-order central differences of a point function; nested for mixed partials.
// Step 1e-3·scale keeps nested second differences well above roundoff.
template <class F>
double point_diff(F&& f, double x, double xi, int ox, int oxi, double hx = 1e-3, double hxi = 1e-3) {
    if (ox == 0 && oxi == 0) return f(x, xi);
    auto d1 = [](auto&& g, double p, double h) {
        return (g(p - 2 * h) - 8 * g(p - h) + 8 * g(p + h) - g(p + 2 * h)) / (12 * h);
    };
    auto d2 = [](auto&& g, double p, double h) {
        return (-g(p - 2 * h) + 16 * g(p - h) - 30 * g(p) + 16 * g(p + h) - g(p + 2 * h)) / (12 * h * h);
    };
    if (ox > 0) {
        auto inner = [&](double xx) { return point_diff(f, xx, xi, 0, oxi, hx, hxi); };
        return ox == 1 ? d1(inner, x, hx) : d2(inner, x, hx);
    }
    auto inner = [&](double q) { return f(x, q); };
    return oxi == 1 ? d1(inner, xi, hxi) : d2(inner, xi, hxi);
}

// Sample V, U, G on a grid at time t.
struct BackgroundFields {
    double t = 0;
    ScalarField V, U, G, D;
};

inline BackgroundFields sample_background(const SeedParams& s, const GridPtr& grid, double t,
                                          GExtension ext = GExtension::equal_v) {
    s.validate();
    check_time(s, t);
    BackgroundFields out{t, ScalarField(grid, Parity::even, Parity::even), ScalarField(grid, Parity::even, Parity::even),
                         ScalarField(grid, Parity::even, Parity::even), ScalarField(grid, Parity::even, Parity::even)};
    for (std::size_t i = 0; i < grid->nx(); ++i) {
        for (std::size_t j = 0; j < grid->nxi(); ++j) {
            const auto cf = closed_form<double>(s, t, grid->x(i), grid->xi(j));
            if (!(cf.D > kDenominatorFloor)) throw BlowupError("closed-form denominator vanished on grid");
            out.V(i, j) = cf.V;
            out.U(i, j) = cf.U;
            out.G(i, j) = g_extension(ext, cf.V, grid->xi(j));
            out.D(i, j) = cf.D;
        }
    }
    return out;
}

struct ScanRow {
    double t = 0;
    int k = 0;
    double M_k = 0;
    double scaled = 0;       // (T − t)·M_k
    double sup_V_scaled = 0; // (T − t)·max|V| alone
};

// M_k(t) = max of |Z^j D^l f| over j+l <= k for f in {V, U, xV_x, xU_x}. Grid finite differences.
inline ScanRow coefficient_scan(const SeedParams& s, const GridPtr& grid, double t, int k) {
    if (k < 0 || k > 4) throw ConfigError("coefficient_scan order must lie in 0..4");
    const auto bg = sample_background(s, grid, t);
    const double T = blowup_time(s);
    double M = 0.0;
    for (const ScalarField* base : {&bg.V, &bg.U}) {
        // Z^j D^l (x f_x) = Z^{j+1} D^l f, so orders up to k+1 in Z are needed.
        ScalarField f_l = *base;
        for (int l = 0; l <= k; ++l) {
            if (l > 0) f_l = adapted_Dxi(f_l);
            ScalarField f = f_l;
            for (int j = 0; j <= k - l + 1; ++j) {
                if (j > 0) f = adapted_Zx(f);
                M = std::max(M, f.max_abs());
            }
        }
    }
    const double supV = bg.V.max_abs();
    return {t, k, M, (T - t) * M, (T - t) * supV};
}

struct LocalizationReport {
    double x = 0;
    double sup_V = 0, t_sup_V = 0;
    double sup_U = 0, t_sup_U = 0;
    double envelope_V = 0, envelope_U = 0;  // analytic sup over the same window
};

// Candidate times where |V| or |U| at fixed (a, b) can peak: the window ends and the
// critical points t = (12a ± 6√10 b)/(2a² + 5b²) for V and t = 12a/(2a² + 5b²) for U.
inline LocalizationReport localization_check(const SeedParams& s, double x_off, double t_hi = -1,
                                             std::size_t samples = 200001) {
    if (x_off == 0.0) throw ConfigError("localization_check needs x_off != 0");
    s.validate();
    const double T = blowup_time(s);
    if (t_hi < 0) t_hi = T - 1e-6;
    LocalizationReport rep;
    rep.x = x_off;
    for (std::size_t n = 0; n < samples; ++n) {
        const double t = t_hi * static_cast<double>(n) / static_cast<double>(samples - 1);
        const auto cf = closed_form<double>(s, t, x_off, 1.0);
        if (std::abs(cf.V) > rep.sup_V) rep.sup_V = std::abs(cf.V), rep.t_sup_V = t;
        if (std::abs(cf.U) > rep.sup_U) rep.sup_U = std::abs(cf.U), rep.t_sup_U = t;
    }
    const auto sv = seed_values<double>(s, x_off, 1.0);
    const double q = 2 * sv.a * sv.a + 5 * sv.b * sv.b;
    std::vector<double> cand{0.0, t_hi};
    if (q > 0) {
        cand.push_back((12 * sv.a + 6 * std::sqrt(10.0) * sv.b) / q);
        cand.push_back((12 * sv.a - 6 * std::sqrt(10.0) * sv.b) / q);
        cand.push_back(12 * sv.a / q);
    }
    for (double t : cand) {
        if (t < 0 || t > t_hi) continue;
        const auto cf = closed_form<double>(s, t, x_off, 1.0);
        rep.envelope_V = std::max(rep.envelope_V, std::abs(cf.V));
        rep.envelope_U = std::max(rep.envelope_U, std::abs(cf.U));
    }
    return rep;
}

} // namespace wedgelab
