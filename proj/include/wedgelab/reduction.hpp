#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "wedgelab/background.hpp"
#include "wedgelab/corpus.hpp"
#include "wedgelab/elliptic.hpp"
#include "wedgelab/remainder.hpp"

namespace wedgelab {

// Scaling factors of the quotient system (u, v, g, p): λ multiplies ∂_t, μ² the z-pressure term.
struct Scalings {
    double lambda = 1.5;
    double mu2 = 5.0 / 3.0;
};

enum class Transcription { derived, printed };
enum class N1Form { corrected, printed };

inline const char* to_string(N1Form f) { return f == N1Form::corrected ? "corrected" : "printed"; }

// Cartesian meridian-plane fields (ρ, z) with their time derivatives.
struct CartesianBundle {
    using Fn = std::function<double(double, double)>;
    Fn u, v, g, p, ut, vt, gt;
};

// Smooth fields even in ρ and z, as the quotient system requires on the meridian plane.
inline CartesianBundle smooth_bundle() {
    CartesianBundle b;
    b.u = [](double r, double z) { return std::exp(-0.5 * r * r - 0.7 * z * z) * (1 + 0.2 * r * r * z * z); };
    b.v = [](double r, double z) { return std::cos(0.8 * r) * std::exp(-0.3 * z * z) + 0.5; };
    b.g = [](double r, double z) { return std::exp(-0.4 * r * r) * (1 + 0.5 * z * z) - 0.3; };
    b.p = [](double r, double z) { return std::exp(-0.5 * (r * r + z * z)) * (1 + 0.3 * z * z); };
    b.ut = [](double r, double z) { return 0.5 * r * r * std::exp(-z * z); };
    b.vt = [](double r, double z) { return std::cos(r * z); };
    b.gt = [](double r, double z) { return std::exp(-r * r * z * z); };
    return b;
}

struct QuotientResidual {
    double r[4] = {0, 0, 0, 0};
};

// Quotient-system residuals R1..R4 (u, v, g equations and divergence) at one point, central differences of step h.
inline QuotientResidual quotient_residual_point(const CartesianBundle& b, double rho, double z, double h, const Scalings& sc) {
    auto dr = [&](const CartesianBundle::Fn& f) { return (f(rho + h, z) - f(rho - h, z)) / (2 * h); };
    auto dz = [&](const CartesianBundle::Fn& f) { return (f(rho, z + h) - f(rho, z - h)) / (2 * h); };
    const double u = b.u(rho, z), v = b.v(rho, z), g = b.g(rho, z);
    auto conv = [&](const CartesianBundle::Fn& f) { return g * z * dz(f) - v * rho * dr(f); };
    QuotientResidual out;
    out.r[0] = sc.lambda * b.ut(rho, z) + conv(b.u) - 0.5 * u * v;
    out.r[1] = sc.lambda * b.vt(rho, z) + conv(b.v) - v * v + u * u - dr(b.p) / rho;
    out.r[2] = sc.lambda * b.gt(rho, z) + conv(b.g) + g * g + sc.mu2 * dz(b.p) / z;
    out.r[3] = z * dz(b.g) - rho * dr(b.v) + g - v;
    return out;
}

// Grid fields in polar variables (x, ξ) for one set of unknowns.
struct PolarFields {
    ScalarField u, v, g, p, ut, vt, gt;
};

inline PolarFields sample_polar(const CartesianBundle& b, const GridPtr& grid) {
    auto map = [&](const CartesianBundle::Fn& f) {
        return ScalarField::sample(
            grid,
            [&](double x, double xi) {
                const double c = 1 / std::sqrt(1 + xi * xi);
                return f(x * c, x * xi * c);
            },
            Parity::none, Parity::even);
    };
    return {map(b.u), map(b.v), map(b.g), map(b.p), map(b.ut), map(b.vt), map(b.gt)};
}

// Polar residuals P1..P4 of the quotient system. The derived transcription is its exact image under
// ρ = x/√(1+ξ²), z = xξ/√(1+ξ²), with P4 = (1+ξ²)·R4. The printed one carries the
// published G-equation and divergence forms and is kept for the discrepancy report.
inline std::vector<ScalarField> polar_residual(const PolarFields& f, const Scalings& sc,
                                               Transcription tr = Transcription::derived) {
    const auto& gr = f.u.grid();
    const ScalarField Xu = adapted_Zx(f.u), Xv = adapted_Zx(f.v), Xg = adapted_Zx(f.g);
    const ScalarField su = diff_xi(f.u), sv = diff_xi(f.v), sg = diff_xi(f.g);
    const ScalarField px = diff_x(f.p), pxi = diff_xi(f.p);
    std::vector<ScalarField> out(4, ScalarField(f.u.grid_ptr()));
    for (std::size_t i = 0; i < gr.nx(); ++i) {
        const double x = gr.x(i);
        for (std::size_t j = 0; j < gr.nxi(); ++j) {
            const double xi = gr.xi(j), x2 = xi * xi, q = 1 / (1 + x2);
            const double u = f.u(i, j), v = f.v(i, j), g = f.g(i, j);
            const double a = q * (x2 * g - v), c = (g + v) * xi;
            out[0](i, j) = sc.lambda * f.ut(i, j) - 0.5 * u * v + a * Xu(i, j) + c * su(i, j);
            out[1](i, j) = sc.lambda * f.vt(i, j) - v * v + u * u + a * Xv(i, j) + c * sv(i, j) -
                           (px(i, j) / x - (1 + x2) * xi * pxi(i, j) / (x * x));
            if (tr == Transcription::derived) {
                out[2](i, j) = sc.lambda * f.gt(i, j) + g * g + a * Xg(i, j) + c * sg(i, j) +
                               sc.mu2 * (px(i, j) / x + (1 + x2) * pxi(i, j) / (x * x * xi));
                out[3](i, j) = (1 + x2) * (g - v + xi * sg(i, j) + xi * sv(i, j)) + x2 * Xg(i, j) - Xv(i, j);
            } else {
                const double mu = std::sqrt(sc.mu2);
                out[2](i, j) = sc.lambda * f.gt(i, j) + g * g + a * Xg(i, j) + xi * (g * sg(i, j) + v * sv(i, j)) +
                               mu * px(i, j) / x + mu * (1 + x2) * xi * pxi(i, j) / (x * x * x2);
                out[3](i, j) = g - v + q * (x2 * Xg(i, j) - Xv(i, j)) - xi * (sg(i, j) + sv(i, j));
            }
        }
    }
    return out;
}

// max over equations and interior nodes of |P_k − w_k·R_k| with R_k the Cartesian residual at the mapped point.
inline double quotient_polar_defect(const CartesianBundle& b, const GridPtr& grid, const Scalings& sc, Transcription tr,
                              std::size_t margin) {
    const auto P = polar_residual(sample_polar(b, grid), sc, tr);
    const double h = grid->h_x();
    double worst = 0;
    for (std::size_t i = margin; i + margin < grid->nx(); ++i) {
        for (std::size_t j = margin; j + margin < grid->nxi(); ++j) {
            const double x = grid->x(i), xi = grid->xi(j), c = 1 / std::sqrt(1 + xi * xi);
            const auto R = quotient_residual_point(b, x * c, x * xi * c, h, sc);
            const double w4 = tr == Transcription::derived ? 1 + xi * xi : 1.0;
            worst = std::max(worst, std::abs(P[0](i, j) - R.r[0]));
            worst = std::max(worst, std::abs(P[1](i, j) - R.r[1]));
            worst = std::max(worst, std::abs(P[2](i, j) - R.r[2]));
            worst = std::max(worst, std::abs(P[3](i, j) - w4 * R.r[3]));
        }
    }
    return worst;
}

// Boussinesq residuals from the quotient bundle through u2 = −ρv, u3 = zg, ϑ = ρu², P = p, compared with
// weighted quotient residuals 2ρu·R1, −ρ·R2, z·R3, R4 on a box away from the axes (λ = μ² = 1).
inline double boussinesq_quotient_defect(const CartesianBundle& b, const GridPtr& box, std::size_t margin) {
    if (box->mode() != GridMode::box) throw ConfigError("boussinesq check needs a box grid");
    auto S = [&](const CartesianBundle::Fn& f) { return ScalarField::sample(box, [&](double r, double z) { return f(r, z); }); };
    const ScalarField u = S(b.u), v = S(b.v), g = S(b.g), p = S(b.p), ut = S(b.ut), vt = S(b.vt), gt = S(b.gt);
    const ScalarField rho = ScalarField::sample(box, [](double r, double) { return r; });
    const ScalarField z = ScalarField::sample(box, [](double, double zz) { return zz; });
    // Boussinesq unknowns and their exact time derivatives by the product rule
    const ScalarField th = rho * u * u, u2 = -(rho * v), u3 = z * g;
    const ScalarField th_t = 2.0 * rho * u * ut, u2_t = -(rho * vt), u3_t = z * gt;
    auto dr = [](const ScalarField& f) { return diff_x(f); };
    auto dz = [](const ScalarField& f) { return diff_xi(f); };
    const ScalarField B1 = th_t + u2 * dr(th) + u3 * dz(th);
    const ScalarField B2 = u2_t + u2 * dr(u2) + u3 * dz(u2) + dr(p) - th;
    const ScalarField B3 = u3_t + u2 * dr(u3) + u3 * dz(u3) + dz(p);
    const ScalarField B4 = dr(u2) + dz(u3);
    // quotient system with grid derivatives
    auto conv = [&](const ScalarField& f) { return g * z * dz(f) - v * rho * dr(f); };
    const ScalarField R1 = ut + conv(u) - 0.5 * (u * v);
    ScalarField R2 = vt + conv(v) - v * v + u * u;
    ScalarField R3 = gt + conv(g) + g * g;
    const ScalarField pr = dr(p), pz = dz(p);
    for (std::size_t i = 0; i < box->nx(); ++i)
        for (std::size_t j = 0; j < box->nxi(); ++j) {
            R2(i, j) -= pr(i, j) / box->x(i);
            R3(i, j) += pz(i, j) / box->xi(j);
        }
    const ScalarField R4 = z * dz(g) - rho * dr(v) + g - v;
    double worst = 0;
    worst = std::max(worst, (B1 - 2.0 * rho * u * R1).max_abs_interior(margin));
    worst = std::max(worst, (B2 + rho * R2).max_abs_interior(margin));
    worst = std::max(worst, (B3 - z * R3).max_abs_interior(margin));
    worst = std::max(worst, (B4 - R4).max_abs_interior(margin));
    return worst;
}

// Polar divergence residual for (v, g) built from ψ. The derived form is (1+ξ²) times the divergence equation;
// the printed form is ξxg_x + xv_x − (1+ξ²)(g − v + ξg_ξ + ξv_ξ).
inline ScalarField stream_divergence(const ScalarField& psi, Transcription tr = Transcription::derived) {
    const auto vg = reconstruct_vg(psi);
    const auto& gr = psi.grid();
    const ScalarField Xv = adapted_Zx(vg.v), Xg = adapted_Zx(vg.g), sv = diff_xi(vg.v), sg = diff_xi(vg.g);
    ScalarField out(psi.grid_ptr());
    for (std::size_t i = 0; i < gr.nx(); ++i)
        for (std::size_t j = 0; j < gr.nxi(); ++j) {
            const double xi = gr.xi(j), x2 = xi * xi;
            const double core = vg.g(i, j) - vg.v(i, j) + xi * sg(i, j) + xi * sv(i, j);
            out(i, j) = tr == Transcription::derived ? (1 + x2) * core + x2 * Xg(i, j) - Xv(i, j)
                                                     : xi * Xg(i, j) + Xv(i, j) - (1 + x2) * core;
        }
    return out;
}

// Split of the polar system into background plus exact remainder equations. Returns the max of
// |P_k(full) − P_k(background) − Rem_k| relative to the largest term, which is roundoff when the
// remainder equations are algebraically exact.
inline double remainder_split_defect(const PolarFields& bg, const PolarFields& rem, const Scalings& sc, N1Form n1) {
    PolarFields full{bg.u + rem.u, bg.v + rem.v, bg.g + rem.g, bg.p + rem.p, bg.ut + rem.ut, bg.vt + rem.vt, bg.gt + rem.gt};
    const auto Pf = polar_residual(full, sc), Pb = polar_residual(bg, sc);
    const auto& gr = bg.u.grid();
    const ScalarField XU = adapted_Zx(bg.u), XV = adapted_Zx(bg.v), XG = adapted_Zx(bg.g);
    const ScalarField sU = diff_xi(bg.u), sV = diff_xi(bg.v), sG = diff_xi(bg.g);
    const ScalarField Xu = adapted_Zx(rem.u), Xv = adapted_Zx(rem.v), Xg = adapted_Zx(rem.g);
    const ScalarField su = diff_xi(rem.u), sv = diff_xi(rem.v), sg = diff_xi(rem.g);
    const ScalarField px = diff_x(rem.p), pxi = diff_xi(rem.p);
    double worst = 0, scale = 0;
    for (std::size_t i = 0; i < gr.nx(); ++i) {
        const double x = gr.x(i);
        for (std::size_t j = 0; j < gr.nxi(); ++j) {
            const double xi = gr.xi(j), x2 = xi * xi, q = 1 / (1 + x2);
            const double U = bg.u(i, j), V = bg.v(i, j), G = bg.g(i, j);
            const double u = rem.u(i, j), v = rem.v(i, j), g = rem.g(i, j);
            const double A = q * (x2 * G - V), a = q * (x2 * g - v);
            const double N1 = 0.5 * u * v - (n1 == N1Form::corrected ? a : x2 * g - v) * Xu(i, j) - (g + v) * xi * su(i, j);
            const double N2 = v * v - u * u - a * Xv(i, j) - (g + v) * xi * sv(i, j);
            const double N3 = -g * g - a * Xg(i, j) - (g + v) * xi * sg(i, j);
            const double pv = px(i, j) / x - (1 + x2) * xi * pxi(i, j) / (x * x);
            const double pg = sc.mu2 * (px(i, j) / x + (1 + x2) * pxi(i, j) / (x * x * xi));
            const double rem1 = sc.lambda * rem.ut(i, j) -
                                (0.5 * (u * V + U * v) - (g + v) * xi * sU(i, j) - (G + V) * xi * su(i, j) -
                                 A * Xu(i, j) - a * XU(i, j) + N1);
            const double rem2 = sc.lambda * rem.vt(i, j) -
                                (2 * (v * V - u * U) - (g + v) * xi * sV(i, j) - (G + V) * xi * sv(i, j) -
                                 A * Xv(i, j) - a * XV(i, j) + N2 + pv);
            const double rem3 = sc.lambda * rem.gt(i, j) -
                                (-2 * g * G - (g + v) * xi * sG(i, j) - (G + V) * xi * sg(i, j) - A * Xg(i, j) -
                                 a * XG(i, j) + N3 - pg);
            const double d[3] = {Pf[0](i, j) - Pb[0](i, j) - rem1, Pf[1](i, j) - Pb[1](i, j) - rem2,
                                 Pf[2](i, j) - Pb[2](i, j) - rem3};
            for (double e : d) worst = std::max(worst, std::abs(e));
            scale = std::max({scale, std::abs(Pf[0](i, j)), std::abs(Pf[1](i, j)), std::abs(Pf[2](i, j)),
                              std::abs(rem1), std::abs(rem2), std::abs(rem3)});
        }
    }
    return worst / std::max(scale, 1e-300);
}

struct PressureCheckSetup {
    SeedParams seeds{};
    GExtension ext = GExtension::equal_v;
    double t = 0.3;
    std::string u_profile = "x2-q2";
    std::string psi_profile = "x2-q1";
    double amplitude = 0.5;
};

// Recovers (p_x, p_ξ) from the remainder v- and g-equations with (v_t, g_t) built from ω_t of the
// evolution system, then returns the mixed-partial defect ∂_ξ p_x − ∂_x p_ξ on the interior.
inline ScalarField pressure_mixed_partial_field(const GridPtr& grid, const PressureCheckSetup& su, L2Form form) {
    const auto& gr = *grid;
    const auto bgc = background_coefficients(su.seeds, grid, su.t, su.ext);
    ScalarField u = find_profile(su.u_profile).sample(grid) * su.amplitude;
    ScalarField psi = find_profile(su.psi_profile).sample(grid) * su.amplitude;
    for (std::size_t i = 0; i < gr.nx(); ++i)
        for (std::size_t j = 0; j < gr.nxi(); ++j)
            if (gr.is_x_boundary(i) || gr.is_xi_boundary(j)) psi(i, j) = 0;
    const ScalarField omega = apply_operator(psi);
    const auto terms = remainder_terms(bgc, u, omega, psi, form);
    const ScalarField omega_t = (terms.L2 + terms.M2) * (1 / kLambda);
    EllipticOperator op(grid);
    const auto vgt = reconstruct_vg(op.solve(omega_t));
    const auto vg = reconstruct_vg(psi);
    const ScalarField &v = vg.v, &g = vg.g;
    const ScalarField Xv = adapted_Zx(v), Xg = adapted_Zx(g), sv = diff_xi(v), sg = diff_xi(g);
    const ScalarField XV = adapted_Zx(bgc.V), XG = adapted_Zx(bgc.G);
    ScalarField px(grid, Parity::none, Parity::even), pxi(grid, Parity::none, Parity::odd);
    for (std::size_t i = 0; i < gr.nx(); ++i) {
        const double x = gr.x(i);
        for (std::size_t j = 0; j < gr.nxi(); ++j) {
            const double xi = gr.xi(j), x2 = xi * xi, q = 1 / (1 + x2);
            const double V = bgc.V(i, j), U = bgc.U(i, j), G = bgc.G(i, j);
            const double vv = v(i, j), gg = g(i, j), uu = u(i, j);
            const double Aq = q * (x2 * G - V), aq = q * (x2 * gg - vv);
            const double A = 2 * (vv * V - uu * U) - (gg + vv) * bgc.xiV(i, j) - (G + V) * xi * sv(i, j) -
                             Aq * Xv(i, j) - aq * XV(i, j);
            const double B = -2 * gg * G - (gg + vv) * bgc.xiG(i, j) - (G + V) * xi * sg(i, j) - Aq * Xg(i, j) -
                             aq * XG(i, j);
            const double N2 = vv * vv - uu * uu - aq * Xv(i, j) - (gg + vv) * xi * sv(i, j);
            const double N3 = -gg * gg - aq * Xg(i, j) - (gg + vv) * xi * sg(i, j);
            const double R1 = kLambda * vgt.v(i, j) - A - N2;
            const double R2 = kLambda * vgt.g(i, j) - B - N3;
            px(i, j) = x * (R1 - 0.6 * x2 * R2) / (1 + x2);
            pxi(i, j) = -x * x * xi * (R1 + 0.6 * R2) / ((1 + x2) * (1 + x2));
        }
    }
    return diff_xi(px) - diff_x(pxi);
}

// Max defect over interior nodes with |ξ| ≤ xi_max. Profiles vanishing to second order at ξ = ±1 leave an O(1)
// layer a fixed number of nodes wide there (three differences of the discrete solve next to the half-spaced node).
inline double pressure_mixed_partial_defect(const GridPtr& grid, const PressureCheckSetup& su, L2Form form,
                                            std::size_t margin, double xi_max = 1.0) {
    const ScalarField d = pressure_mixed_partial_field(grid, su, form);
    const auto& gr = *grid;
    double m = 0;
    for (std::size_t i = margin; i + margin < gr.nx(); ++i)
        for (std::size_t j = margin; j + margin < gr.nxi(); ++j)
            if (std::abs(gr.xi(j)) <= xi_max) m = std::max(m, std::abs(d(i, j)));
    return m;
}

// λ∂_t U_ξ at a ridge ξ0 = ±1 and t = 0 from the U-equation, against the reduced form −ξ0·V0·(xU0_x + 2U0_ξξ).
struct CompatReport {
    double x = 0, xi0 = 0, h = 0;
    double lhs = 0;            // λ ∂_t U_ξ = ∂_ξ F
    double rhs_full = 0;       // −ξ0 V0 (xU0_x + 2U0_ξξ)
    double rhs_reduced = 0;    // −ξ0 V0 xU0_x
    double u_xixi = 0, u0_sup = 0;
    double closed_form_rate = 0;  // ∂_t U_ξ of the closed form at t = 0
    bool flat_ok = false, match_ok = false, nonzero = false;
};

inline CompatReport compatibility_check(const SeedParams& s, double x, double xi0, GExtension ext = GExtension::equal_v,
                                        double h = 1e-3) {
    s.validate();
    auto field = [&](double t) {
        return [&s, ext, t](double xx, double q) {
            const auto cf = closed_form<double>(s, t, xx, q);
            return std::array<double, 2>{cf.V, g_extension(ext, cf.V, q)};
        };
    };
    auto U0 = [&](double xx, double q) { return closed_form<double>(s, 0.0, xx, q).U; };
    auto F = [&](double xx, double q) {
        const auto vg = field(0.0)(xx, q);
        const double V = vg[0], G = vg[1], U = U0(xx, q);
        const double Ux = point_diff(U0, xx, q, 1, 0, h, h), Uq = point_diff(U0, xx, q, 0, 1, h, h);
        return 0.5 * V * U - (q * q * G - V) / (1 + q * q) * xx * Ux - (G + V) * q * Uq;
    };
    CompatReport r;
    r.x = x;
    r.xi0 = xi0;
    r.h = h;
    r.lhs = point_diff(F, x, xi0, 0, 1, h, h);
    const double V0 = field(0.0)(x, xi0)[0];
    const double xUx = x * point_diff(U0, x, xi0, 1, 0, h, h);
    r.u_xixi = point_diff(U0, x, xi0, 0, 2, h, h);
    r.rhs_full = -xi0 * V0 * (xUx + 2 * r.u_xixi);
    r.rhs_reduced = -xi0 * V0 * xUx;
    for (int k = 0; k <= 400; ++k) r.u0_sup = std::max(r.u0_sup, std::abs(U0(0.01 * k, xi0)));
    auto Uxi_at = [&](double t) {
        return point_diff([&](double xx, double q) { return closed_form<double>(s, t, xx, q).U; }, x, xi0, 0, 1, h, h);
    };
    const double dt = 1e-4;
    r.closed_form_rate = (Uxi_at(dt) - Uxi_at(-dt)) / (2 * dt);
    const double tol = 10 * h * h * std::max(1.0, r.u0_sup);
    r.flat_ok = std::abs(r.u_xixi) <= tol;
    r.match_ok = std::abs(r.lhs - r.rhs_reduced) <= 10 * h * h * std::max(1.0, std::abs(r.rhs_reduced));
    r.nonzero = std::abs(r.lhs) > 100 * tol;
    return r;
}

// The stream-function formulas for v and g substituted into the divergence equation, with exact Jet derivatives of a Cartesian ψ(ρ, z).
template <class F>
double jet_divergence_identity(F&& psi, double rho, double z) {
    const auto P = partials(psi, rho, z);
    const double v = P.f + z * P.fy, g = P.f + rho * P.fx;
    const double gz = P.fy + rho * P.fxy, vr = P.fx + z * P.fxy;
    return z * gz - rho * vr + g - v;
}

} // namespace wedgelab
