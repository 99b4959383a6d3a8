#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "wedgelab/wedgelab.hpp"

using namespace wedgelab;
using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

// Plain-string seed options, parsed after CLI11 so errors map to exit code 2.
struct SeedOptions {
    double A = 6, B = 1, A1 = 0;
    int m = 2, u_sign = 1;
    std::string r_def = "ridge-x2", shape = "cubic-3-6", extension = "G=V";

    void add(CLI::App& app) {
        app.add_option("--A", A, "seed amplitude of V0");
        app.add_option("--B", B, "seed amplitude of U0");
        app.add_option("--A1", A1, "anisotropy amplitude");
        app.add_option("--m", m, "flatness power");
        app.add_option("--u-sign", u_sign, "sign of U in the closed form (+1 or -1)");
        app.add_option("--r-def", r_def, "ridge-x2 | aniso-poly | aniso-trig");
        app.add_option("--seed-shape", shape, "cubic-3-6 | cubic-r3");
        app.add_option("--extension", extension, "off-ridge G extension: G=V | G=0-blend");
    }
    SeedParams params() const {
        SeedParams s;
        s.A = A;
        s.B = B;
        s.A1 = A1;
        s.m = m;
        s.u_sign = u_sign;
        s.r_def = parse_rdef(r_def);
        s.shape = parse_shape(shape);
        s.validate();
        return s;
    }
    GExtension ext() const { return parse_gext(extension); }
};

struct Output {
    std::string dir = "wedgelab-out";
    fs::path path(const std::string& name) const { return fs::path(dir) / name; }
};

void write_text(const fs::path& p, const std::string& body) {
    std::ofstream os(p);
    if (!os) throw ConfigError("cannot write " + p.string());
    os << body;
}

void write_json(const fs::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

std::string fmt(double v) { return format_double(v); }

// ---------------------------------------------------------------------------------------------

struct RidgeCmd {
    double a = 6, b = 0;
    int levels = 6;
    double horizon = -1;  // defaults to 0.9 T, or 1 when there is no blow-up
    bool fit = false;
    double clm_u = 0.5, clm_v = 1.0, clm_horizon = 4.0;

    void add(CLI::App& c) {
        c.add_option("--a", a, "ridge V(0)");
        c.add_option("--b", b, "ridge U(0)");
        c.add_option("--levels", levels, "rate table rows t = T - 10^-k, k = 1..levels");
        c.add_option("--horizon", horizon, "trajectory end time (negative: 0.9 T or 1)");
        c.add_flag("--fit-blowup", fit, "integrate to escape and fit the blow-up time");
        c.add_option("--clm-u", clm_u, "U(0) for the CLM scaling check");
        c.add_option("--clm-v", clm_v, "V(0) for the CLM scaling check");
        c.add_option("--clm-horizon", clm_horizon, "time horizon for the CLM scaling check");
    }

    int run(const Output& out) {
        if (levels < 1 || levels > 12) throw ConfigError("levels must lie in 1..12");
        const bool blows_up = a > 0 && b == 0;
        const double T = blows_up ? 6 / a : std::numeric_limits<double>::infinity();
        const double t_end = horizon > 0 ? horizon : (blows_up ? 0.9 * T : 1.0);
        if (blows_up && !(t_end < T)) throw ConfigError("horizon must lie below T = " + fmt(T));
        json summary{{"a", a}, {"b", b}, {"T", blows_up ? json(T) : json("none")}};

        std::ofstream tr(out.path("ridge_trajectory.csv"));
        tr << "t,U,V,U_closed,V_closed\n";
        double max_rel = 0;
        if (a == 0 && b == 0) {
            for (int k = 0; k <= 10; ++k) tr << fmt(t_end * k / 10) << ",0,0,0,0\n";
        } else {
            const auto traj = integrate_ridge({b, a}, t_end);
            if (traj.status != OdeStatus::ok) throw NumericError("ridge integration stopped: " + std::string(to_string(traj.status)));
            for (std::size_t i = 0; i < traj.t.size(); ++i) {
                const auto cf = ridge_closed_form(a, b, traj.t[i]);
                tr << fmt(traj.t[i]) << ',' << fmt(traj.U[i]) << ',' << fmt(traj.V[i]) << ',' << fmt(cf.U) << ','
                   << fmt(cf.V) << '\n';
                const double s = std::max(std::abs(cf.U), std::abs(cf.V));
                if (s > 0) max_rel = std::max(max_rel, std::max(std::abs(traj.U[i] - cf.U), std::abs(traj.V[i] - cf.V)) / s);
            }
        }
        summary["integrator_max_rel_error"] = max_rel;

        std::ofstream rt(out.path("blowup_rates.csv"));
        rt << "t,T_minus_t,V,scaled_V,U\n";
        if (blows_up) {
            std::vector<double> times{0.9 * T};
            for (int k = 1; k <= levels; ++k) times.push_back(T - std::pow(10.0, -k));
            for (double t : times) {
                const auto cf = ridge_closed_form(a, b, t);
                rt << fmt(t) << ',' << fmt(T - t) << ',' << fmt(cf.V) << ',' << fmt((T - t) * cf.V) << ',' << fmt(cf.U)
                   << '\n';
            }
        }

        if (fit) {
            if (!blows_up) throw ConfigError("--fit-blowup needs a > 0 and b = 0");
            const auto traj = integrate_ridge({b, a}, 2 * T);
            const auto f = fit_blowup(traj);
            summary["T_est"] = f.T_est;
            summary["T_est_error"] = std::abs(f.T_est - T);
            std::printf("blow-up fit: T_est=%.10g T=%.10g |diff|=%.3g\n", f.T_est, T, std::abs(f.T_est - T));
        }

        const auto clm = clm_map_check({clm_u, clm_v}, clm_horizon);
        std::ofstream cs(out.path("clm.csv"));
        cs << "pair,s,k2,residual_1,residual_2\n";
        cs << "fitted," << fmt(clm.s) << ',' << fmt(clm.k2) << ',' << fmt(clm.residual_fit_1) << ','
           << fmt(clm.residual_fit_2) << '\n';
        cs << "printed," << fmt(clm.s_printed) << ',' << fmt(clm.k2_printed) << ',' << fmt(clm.residual_printed_1)
           << ',' << fmt(clm.residual_printed_2) << '\n';
        summary["clm"] = {{"s", clm.s}, {"k2", clm.k2}, {"matches_printed", clm.matches_printed}};
        write_json(out.path("summary.json"), summary);
        std::printf("ridge: a=%g b=%g T=%s integrator max rel error %.3g\n", a, b, blows_up ? fmt(T).c_str() : "none",
                    max_rel);
        std::printf("clm: fitted s=%.12g k^2=%.12g (printed s=6, k^2=1.6 %s)\n", clm.s, clm.k2,
                    clm.matches_printed ? "matches" : "does not match");
        return 0;
    }
};

struct VerifyCmd {
    VerifyConfig cfg;
    std::string brk, n1 = "corrected";

    void add(CLI::App& c) {
        c.add_option("--grid", cfg.grid, "coarsest level; the ladder is grid, 2 grid, 4 grid");
        c.add_option("--order-min", cfg.order_min, "lower bound of the accepted order");
        c.add_option("--order-max", cfg.order_max, "upper bound of the accepted order");
        c.add_option("--margin", cfg.margin, "interior nodes skipped next to edges (the pressure check skips one more)");
        c.add_option("--omega-probe", cfg.omega_probe, "corpus profile for the omega-definition check");
        c.add_option("--stream-probe", cfg.stream_probe, "corpus profile for the divergence check");
        c.add_option("--pressure-u", cfg.pressure.u_profile, "u profile of the pressure check");
        c.add_option("--pressure-psi", cfg.pressure.psi_profile, "psi profile of the pressure check");
        c.add_option("--n1", n1, "N1 form: corrected | printed");
        c.add_option("--break", brk, "inject a known bug: n1-factor");
    }

    int run(const Output& out) {
        if (n1 != "corrected" && n1 != "printed") throw ConfigError("n1 must be corrected or printed");
        cfg.n1 = n1 == "printed" ? N1Form::printed : N1Form::corrected;
        if (!brk.empty()) {
            if (brk != "n1-factor") throw ConfigError("unknown --break value '" + brk + "'");
            cfg.n1 = N1Form::printed;
        }
        const auto rep = run_verify(cfg);
        write_verify_csv(out.path("verify.csv").string(), rep.rows);
        write_discrepancies_csv(out.path("discrepancies.csv").string(), rep.discrepancies);
        for (const auto& r : rep.rows) {
            char order[32] = "-";
            if (!std::isnan(r.order_estimate)) std::snprintf(order, sizeof order, "%.3f", r.order_estimate);
            std::printf("%-36s h=%-10.4g residual=%-11.4g order=%-7s %s\n", r.check_name.c_str(), r.grid_h,
                        r.residual_max, order, r.pass ? "pass" : "FAIL");
        }
        for (const auto& d : rep.discrepancies)
            std::printf("discrepancy %s: residual=%.4g (%s)\n", d.name.c_str(), d.residual_finest, d.note.c_str());
        if (!rep.all_pass()) {
            std::string names;
            for (const auto& f : rep.failed) names += (names.empty() ? "" : ", ") + f;
            throw VerificationError("identities failed: " + names);
        }
        std::printf("verify: all identities pass\n");
        return 0;
    }
};

struct EllipticCmd {
    double y_min = -8, y_max = 8;
    std::size_t ny = 129, xi_cells = 32, direct_limit = 1'000'000;
    int m = 0;
    std::string probe = "all";
    bool export_coo = false;

    void add(CLI::App& c) {
        c.add_option("--y-min", y_min, "left end of the log strip");
        c.add_option("--y-max", y_max, "right end of the log strip");
        c.add_option("--ny", ny, "nodes in y");
        c.add_option("--xi-cells", xi_cells, "cells in xi");
        c.add_option("--m", m, "Sobolev order for the elliptic constant");
        c.add_option("--probe", probe, "corpus profile or 'all' (profiles vanishing at x = 0)");
        c.add_option("--direct-limit", direct_limit, "largest system solved by sparse LU");
        c.add_flag("--export-coo", export_coo, "write the assembled matrix in COO form");
    }

    int run(const Output& out) {
        if (m < 0 || m > 2) throw ConfigError("m must lie in 0..2");
        const auto g = WedgeGrid::log_strip(y_min, y_max, ny, xi_cells);
        EllipticOperator op(g, direct_limit);
        std::vector<Profile> probes = probe == "all" ? decaying_corpus() : std::vector<Profile>{find_profile(probe)};
        std::ofstream os(out.path("elliptic.csv"));
        os << "probe,method,relative_residual,roundtrip_residual,boundary_trace,ratio\n";
        double worst_rt = 0;
        for (const auto& pr : probes) {
            const ScalarField omega = pr.sample(g);
            const ScalarField psi = op.solve(omega);
            const auto st = op.last_stats();
            const double rt = (apply_operator(psi) - omega).max_abs_interior(1) / omega.max_abs();
            double trace = 0;
            for (std::size_t i = 0; i < g->nx(); ++i)
                trace = std::max({trace, std::abs(psi(i, 0)), std::abs(psi(i, g->nxi() - 1))});
            const double ratio =
                std::sqrt(adapted_sobolev_squared(psi, m + 2, {}) / adapted_sobolev_squared(omega, m, {}));
            os << pr.name << ',' << st.method << ',' << fmt(st.relative_residual) << ',' << fmt(rt) << ',' << fmt(trace)
               << ',' << fmt(ratio) << '\n';
            worst_rt = std::max(worst_rt, rt);
        }
        const auto rep = measure_elliptic_constant(op, m, probes);
        if (export_coo) op.export_coo(out.path("operator.coo").string());
        write_json(out.path("summary.json"), {{"unknowns", op.unknowns()},
                                              {"bandwidth", op.bandwidth()},
                                              {"method", rep.method},
                                              {"m", m},
                                              {"C_Delta", rep.ratio},
                                              {"worst_probe", rep.worst_probe},
                                              {"max_roundtrip_residual", worst_rt}});
        std::printf("elliptic: %zu unknowns, bandwidth %zu, %s; C_Delta,%d = %.6g (worst probe %s); round trip %.3g\n",
                    op.unknowns(), op.bandwidth(), rep.method.c_str(), m, rep.ratio, rep.worst_probe.c_str(), worst_rt);
        if (worst_rt > 1e-8) throw VerificationError("round-trip residual " + fmt(worst_rt) + " exceeds 1e-8");
        return 0;
    }
};

struct SimulateCmd {
    RemainderConfig cfg;
    SeedOptions seeds;
    std::string l2 = "corrected";
    int k = 2;
    double sigma = 0.8, fixed_dt = 0;

    void add(CLI::App& c) {
        seeds.add(c);
        c.add_option("--y-min", cfg.y_min, "left end of the log strip");
        c.add_option("--y-max", cfg.y_max, "right end of the log strip");
        c.add_option("--ny", cfg.ny, "nodes in y");
        c.add_option("--xi-cells", cfg.xi_cells, "cells in xi");
        c.add_option("--l2", l2, "L2 form: corrected | printed");
        c.add_option("--amplitude", cfg.amplitude, "initial remainder amplitude");
        c.add_option("--t-end", cfg.t_end, "end time (below the background blow-up time)");
        c.add_option("--max-steps", cfg.max_steps, "step limit");
        c.add_option("--cfl", cfg.cfl, "CFL number");
        c.add_option("--dt-max", cfg.dt_max, "largest time step");
        c.add_option("--dt", fixed_dt, "fixed time step (0: CFL controlled)");
        c.add_option("--ceiling", cfg.ceiling, "blow-up ceiling on sup|u| + sup|omega|");
        c.add_option("--output-every", cfg.output_every, "record every n-th step");
        c.add_flag("--pin-u-edges", cfg.pin_u_edges, "hold u = 0 at xi = +-1 instead of evolving it");
        c.add_option("--k", k, "energy order");
        c.add_option("--sigma", sigma, "renormalization exponent of X_sigma");
    }

    int run(const Output& out) {
        cfg.seeds = seeds.params();
        cfg.extension = seeds.ext();
        cfg.l2 = parse_l2_form(l2);
        if (k < 0 || k > 4) throw ConfigError("k must lie in 0..4");
        if (fixed_dt < 0) throw ConfigError("dt must be non-negative");
        RemainderSimulator sim(cfg);
        const auto er = simulate_with_energy(sim, sim.initial_state(), k, sigma, {}, fixed_dt);
        write_energy_trajectory_csv(out.path("trajectory.csv").string(), er.rows, er.run.status);
        write_trajectory_csv(out.path("sup_norms.csv").string(), er.run.rows);
        const double T = blowup_time(cfg.seeds);
        json summary{{"status", er.run.status}, {"steps", er.run.steps}, {"t_final", er.run.final_state.t},
                     {"T", T},         {"G_extension", to_string(cfg.extension)}, {"heuristic_extension", true},
                     {"weight", WeightSpec{}.label}};
        std::vector<double> t, Y;
        for (const auto& r : er.rows) t.push_back(r.t), Y.push_back(r.Y);
        std::ofstream fs_(out.path("fit.csv"));
        fs_ << "C_lin_hat,C_nl_hat,residual\n";
        if (t.size() >= 3 && Y.back() > 0) {
            const auto f = gronwall_fit(t, Y, T);
            fs_ << fmt(f.C_lin_hat) << ',' << fmt(f.C_nl_hat) << ',' << fmt(f.residual) << '\n';
            summary["C_lin_hat"] = f.C_lin_hat;
            summary["C_nl_hat"] = f.C_nl_hat;
            summary["fit_residual"] = f.residual;
            summary["fit_ill_conditioned"] = f.ill_conditioned;
            summary["inequality_excess"] = gronwall_excess(t, Y, T, f.C_lin_hat, f.C_nl_hat);
        }
        write_json(out.path("summary.json"), summary);
        std::printf("simulate: status %s after %zu steps, t=%.6g, Y=%.6g (G extension %s, heuristic)\n",
                    er.run.status.c_str(), er.run.steps, er.run.final_state.t, Y.empty() ? 0.0 : Y.back(),
                    to_string(cfg.extension));
        if (er.run.status == "forcing-free FAILED") throw VerificationError("zero data produced a nonzero remainder");
        if (er.run.status == "remainder-blowup") throw NumericError("remainder exceeded the ceiling");
        return 0;
    }
};

struct EnergyCmd {
    SeedOptions seeds;
    InitialEnergyOptions opt;
    int scan_levels = 10, scan_k = 2;
    double scan_extent = 2.0;
    std::size_t scan_nx = 201, scan_xi_cells = 32;

    EnergyCmd() {
        seeds.A = 1;
        seeds.B = 1;
        seeds.r_def = "aniso-trig";
        seeds.shape = "cubic-r3";
    }

    void add(CLI::App& c) {
        seeds.add(c);
        c.add_option("--y-min", opt.y_min, "left end of the log-radius quadrature");
        c.add_option("--y-max", opt.y_max, "right end of the log-radius quadrature");
        c.add_option("--ny", opt.ny, "quadrature nodes in log radius");
        c.add_option("--ntheta", opt.ntheta, "quadrature nodes in angle");
        c.add_option("--scan-levels", scan_levels, "coefficient scan at t = T(1 - 2^-j), j = 1..levels");
        c.add_option("--scan-k", scan_k, "largest derivative order of the coefficient scan");
        c.add_option("--scan-extent", scan_extent, "coefficient scan grid covers |x| <= extent");
        c.add_option("--scan-nx", scan_nx, "coefficient scan nodes in x");
        c.add_option("--scan-xi-cells", scan_xi_cells, "coefficient scan cells in xi");
    }

    int run(const Output& out) {
        SeedParams s;
        s.A = seeds.A;
        s.B = seeds.B;
        s.A1 = seeds.A1;
        s.m = seeds.m;
        s.u_sign = seeds.u_sign;
        s.r_def = parse_rdef(seeds.r_def);
        s.shape = parse_shape(seeds.shape);
        const auto r = initial_energy(s, opt);
        std::ofstream os(out.path("initial_energy.csv"));
        os << "E0,E0_refined,relative_change,tail_estimate,tail_slope,tail_converged,stable_3_digits\n";
        os << fmt(r.value) << ',' << fmt(r.refined) << ',' << fmt(r.relative_change) << ',' << fmt(r.tail_estimate)
           << ',' << fmt(r.tail_slope) << ',' << (r.tail_converged ? 1 : 0) << ',' << (r.stable_3_digits ? 1 : 0)
           << '\n';
        std::printf("energy: E(0)=%.12g (refined %.12g, change %.2g), tail slope %.4f, tail-converged %s\n", r.value,
                    r.refined, r.relative_change, r.tail_slope, r.tail_converged ? "yes" : "no");
        if (!r.tail_converged) std::printf("warning: domain truncation error above 1%%\n");

        json summary{{"E0", r.value}, {"tail_converged", r.tail_converged}, {"tail_slope", r.tail_slope}};
        if (s.A > 0 && scan_levels > 0) {
            s.validate();
            if (scan_k < 0 || scan_k > 4) throw ConfigError("scan-k must lie in 0..4");
            const auto grid = WedgeGrid::symmetric(scan_extent, scan_nx, scan_xi_cells);
            const double T = blowup_time(s);
            std::ofstream sc(out.path("coefficient_scan.csv"));
            sc << "j,t,k,M_k,scaled,sup_V_scaled\n";
            for (int j = 1; j <= scan_levels; ++j) {
                const double t = T * (1 - std::pow(2.0, -j));
                for (int k = 0; k <= scan_k; ++k) {
                    const auto row = coefficient_scan(s, grid, t, k);
                    sc << j << ',' << fmt(t) << ',' << k << ',' << fmt(row.M_k) << ',' << fmt(row.scaled) << ','
                       << fmt(row.sup_V_scaled) << '\n';
                }
            }
        }
        write_json(out.path("summary.json"), summary);
        return 0;
    }
};

struct BootstrapCmd {
    EnvelopeParams p{1.0, 0.5, 1.0, 0.8, 1e-3};
    double t_end_fraction = 0.99, t_star_fraction = 1 - 1e-6;

    void add(CLI::App& c) {
        c.add_option("--T", p.T, "blow-up time");
        c.add_option("--c-lin", p.C_lin, "linear constant");
        c.add_option("--c-nl", p.C_nl, "nonlinear constant");
        c.add_option("--sigma", p.sigma, "renormalization exponent");
        c.add_option("--y0", p.Y0, "initial envelope value");
        c.add_option("--t-end-fraction", t_end_fraction, "envelope output on [0, fraction T]");
        c.add_option("--t-star-fraction", t_star_fraction, "bootstrap horizon as a fraction of T");
    }

    int run(const Output& out) {
        p.validate();
        if (!(t_end_fraction > 0 && t_end_fraction < 1)) throw ConfigError("t-end-fraction must lie in (0, 1)");
        if (!(t_star_fraction > 0 && t_star_fraction < 1)) throw ConfigError("t-star-fraction must lie in (0, 1)");
        const auto tr = envelope_integrate(p, t_end_fraction * p.T);
        write_envelope_csv(out.path("envelope.csv").string(), tr);
        double worst = 0;
        for (const auto& pt : tr.points) {
            const auto ref = bernoulli_closed_form(p, pt.t);
            if (ref && *ref > 0) worst = std::max(worst, std::abs(pt.Y - *ref) / *ref);
        }
        std::printf("closed-form match: max relative error %.3g over %zu points (%s)\n", worst, tr.points.size(),
                    tr.status.c_str());
        json summary{{"envelope_status", tr.status}, {"closed_form_max_rel_error", worst}};
        const auto r = bootstrap_check(p, t_star_fraction);
        std::ofstream os(out.path("bootstrap.csv"));
        os << "T,C_lin,C_nl,sigma,Y0,t_star,eps0,closes_at_given,sigma_below_one\n";
        os << fmt(p.T) << ',' << fmt(p.C_lin) << ',' << fmt(p.C_nl) << ',' << fmt(p.sigma) << ',' << fmt(p.Y0) << ','
           << fmt(r.t_star) << ',' << fmt(r.eps0) << ',' << (r.closes_at_given ? 1 : 0) << ','
           << (r.sigma_below_one ? 1 : 0) << '\n';
        summary["eps0"] = std::isinf(r.eps0) ? json("inf") : json(r.eps0);
        summary["closes_at_given"] = r.closes_at_given;
        summary["sigma_below_one"] = r.sigma_below_one;
        write_json(out.path("summary.json"), summary);
        std::printf("bootstrap: eps0=%s, X_sigma(t) <= 2 X_sigma(0) at the given Y0: %s\n", fmt(r.eps0).c_str(),
                    r.closes_at_given ? "yes" : "no");
        return 0;
    }
};

struct CompatCmd {
    SeedOptions seeds;
    std::vector<double> xs{0.5, 1.0, 2.0};
    double h = 1e-3;

    CompatCmd() {
        seeds.r_def = "aniso-poly";
        seeds.A1 = 0.25;
    }

    void add(CLI::App& c) {
        seeds.add(c);
        c.add_option("--x", xs, "radii to probe");
        c.add_option("--fd-step", h, "finite-difference step");
    }

    int run(const Output& out) {
        const auto s = seeds.params();
        std::ofstream os(out.path("compat.csv"));
        os << "x,xi0,lhs,rhs_reduced,rhs_full,u_xixi,closed_form_rate,flat_ok,match_ok,nonzero\n";
        bool all_ok = true;
        for (double x : xs) {
            for (double xi0 : {-1.0, 1.0}) {
                const auto r = compatibility_check(s, x, xi0, seeds.ext(), h);
                os << fmt(x) << ',' << fmt(xi0) << ',' << fmt(r.lhs) << ',' << fmt(r.rhs_reduced) << ','
                   << fmt(r.rhs_full) << ',' << fmt(r.u_xixi) << ',' << fmt(r.closed_form_rate) << ','
                   << (r.flat_ok ? 1 : 0) << ',' << (r.match_ok ? 1 : 0) << ',' << (r.nonzero ? 1 : 0) << '\n';
                std::printf("compat x=%g xi0=%+g: lambda dt U_xi=%.6g, -xi0 V0 xU0_x=%.6g, U_xixi=%.2g %s\n", x, xi0,
                            r.lhs, r.rhs_reduced, r.u_xixi, r.flat_ok && r.match_ok ? "ok" : "MISMATCH");
                all_ok = all_ok && r.flat_ok && r.match_ok;
            }
        }
        if (!all_ok) throw VerificationError("compatibility relation failed");
        return 0;
    }
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"wedgelab: wedge Boussinesq verification laboratory"};
    app.set_config("--config", "", "INI/TOML config file; sections are subcommand names");
    app.option_defaults()->always_capture_default();
    Output out;
    app.add_option("-o,--out", out.dir, "output directory");
    app.require_subcommand(1);
    app.fallthrough();

    RidgeCmd ridge;
    VerifyCmd verify;
    EllipticCmd elliptic;
    SimulateCmd simulate;
    EnergyCmd energy;
    BootstrapCmd bootstrap;
    CompatCmd compat;
    struct Entry {
        CLI::App* app;
        std::function<int()> run;
    };
    std::vector<Entry> cmds;
    auto reg = [&](const char* name, const char* help, auto& cmd) {
        auto* sub = app.add_subcommand(name, help);
        cmd.add(*sub);
        cmds.push_back({sub, [&cmd, &out] { return cmd.run(out); }});
    };
    reg("ridge", "ridge ODE: closed form, integrator, blow-up rates, CLM scaling", ridge);
    reg("verify", "reduction-identity suite with convergence orders", verify);
    reg("elliptic", "stream-function solve, round trip and elliptic constant", elliptic);
    reg("simulate", "remainder system evolution with energy trace", simulate);
    reg("energy", "initial energy quadrature and coefficient-bound scan", energy);
    reg("bootstrap", "envelope ODE, Bernoulli oracle and bootstrap threshold", bootstrap);
    reg("compat", "ridge compatibility relation for the normal derivative of U", compat);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        fs::create_directories(out.dir);
        for (auto& c : cmds) {
            if (!c.app->parsed()) continue;
            write_text(out.path("effective_config.ini"), "out=\"" + out.dir + "\"\n[" + c.app->get_name() + "]\n" +
                                                             c.app->config_to_str(true, false));
            const int code = c.run();
            std::fflush(stdout);
            return code;
        }
    } catch (const wedgelab::Error& e) {
        std::fflush(stdout);
        std::fprintf(stderr, "error: %s\n", e.what());
        return static_cast<int>(e.kind());
    } catch (const std::exception& e) {
        std::fflush(stdout);
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 2;
}
