#pragma once

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "wedgelab/background.hpp"
#include "wedgelab/elliptic.hpp"

namespace wedgelab {

inline constexpr double kLambda = 1.5;

enum class L2Form { corrected, printed };

inline const char* to_string(L2Form f) { return f == L2Form::corrected ? "corrected" : "printed"; }
inline L2Form parse_l2_form(const std::string& s) {
    if (s == "corrected") return L2Form::corrected;
    if (s == "printed") return L2Form::printed;
    throw ConfigError("unknown l2 form '" + s + "' (expected corrected|printed)");
}

// Background fields and the derivative combinations the remainder operators need.
// Derivatives use the grid stencils on the sampled closed form.
struct BackgroundCoefficients {
    double t = 0;
    ScalarField V, U, G, Om;
    ScalarField XU, DU, xiU;   // xU_x, U_ξ/ξ, ξU_ξ
    ScalarField XV, xiV, xiG;  // xV_x, ξV_ξ, ξG_ξ
    ScalarField XOm, xiOm;     // xΩ_x, ξΩ_ξ
};

inline BackgroundCoefficients background_coefficients(const SeedParams& s, const GridPtr& grid, double t,
                                                      GExtension ext) {
    auto bg = sample_background(s, grid, t, ext);
    BackgroundCoefficients c;
    c.t = t;
    c.Om = omega_combination(bg.V, bg.G);
    c.XU = adapted_Zx(bg.U);
    c.DU = adapted_Dxi(bg.U);
    c.xiU = xi_dxi(bg.U);
    c.XV = adapted_Zx(bg.V);
    c.xiV = xi_dxi(bg.V);
    c.xiG = xi_dxi(bg.G);
    c.XOm = adapted_Zx(c.Om);
    c.xiOm = xi_dxi(c.Om);
    c.V = std::move(bg.V);
    c.U = std::move(bg.U);
    c.G = std::move(bg.G);
    return c;
}

// Background coefficients memoized by time; RK4 revisits stage times.
class BackgroundCache {
public:
    BackgroundCache(SeedParams s, GridPtr grid, GExtension ext) : s_(s), grid_(std::move(grid)), ext_(ext) {}

    const BackgroundCoefficients& at(double t) {
        auto it = cache_.find(t);
        if (it != cache_.end()) return it->second;
        if (cache_.size() > 16) cache_.erase(cache_.begin());
        return cache_.emplace(t, background_coefficients(s_, grid_, t, ext_)).first->second;
    }
    const SeedParams& seeds() const { return s_; }
    GExtension extension() const { return ext_; }

private:
    SeedParams s_;
    GridPtr grid_;
    GExtension ext_;
    std::map<double, BackgroundCoefficients> cache_;
};

struct RemainderTerms {
    ScalarField L1, M1, L2, M2;
};

// Right-hand sides of (3/2)u_t = L1 + M1 and (3/2)ω_t = L2 + M2 at every node.
inline RemainderTerms remainder_terms(const BackgroundCoefficients& b, const ScalarField& u, const ScalarField& omega,
                                      const ScalarField& psi, L2Form form = L2Form::corrected) {
    const auto& g = u.grid();
    const ScalarField Xu = adapted_Zx(u), xiu = xi_dxi(u), Du = adapted_Dxi(u);
    const ScalarField Xp = adapted_Zx(psi), xip = xi_dxi(psi);
    const ScalarField Xw = adapted_Zx(omega), xiw = xi_dxi(omega);
    RemainderTerms r{ScalarField(u.grid_ptr(), Parity::even, Parity::even),
                     ScalarField(u.grid_ptr(), Parity::even, Parity::even),
                     ScalarField(u.grid_ptr(), Parity::even, Parity::even),
                     ScalarField(u.grid_ptr(), Parity::even, Parity::even)};
    const bool corrected = form == L2Form::corrected;
    parallel_for(g.nx(), [&](std::size_t i) {
        for (std::size_t j = 0; j < g.nxi(); ++j) {
            const double xi = g.xi(j), x2 = xi * xi, q = 1 / (1 + x2), pm = (x2 - 1) * q;
            const double V = b.V(i, j), U = b.U(i, j), G = b.G(i, j), Om = b.Om(i, j);
            const double uu = u(i, j), w = omega(i, j), p = psi(i, j);
            const double xu = Xu(i, j), su = xiu(i, j), xp = Xp(i, j), sp = xip(i, j);
            r.L1(i, j) = 0.5 * V * uu - (G + V) * su + q * (V - x2 * G) * xu +
                         0.5 * (U - 4 * b.xiU(i, j) - 2 * pm * b.XU(i, j)) * p +
                         0.5 * (U + 2 * b.XU(i, j)) * sp + 0.5 * (x2 * q * U - 2 * b.xiU(i, j)) * xp;
            r.M1(i, j) = 0.5 * uu * p + 0.5 * uu * (sp + x2 * q * xp) - q * p * (2 * (1 + x2) * su + (x2 - 1) * xu) +
                         (xu * sp - su * xp);
            double L2 = 10.0 / 3.0 * ((1 + x2) * b.DU(i, j) + b.XU(i, j)) * uu +
                        10.0 / 3.0 * U * ((1 + x2) * Du(i, j) + xu) +
                        q / 3.0 * ((1 + x2) * (2 * b.xiV(i, j) - 3 * (1 + x2) * b.xiG(i, j)) - 6 * G) * w +
                        q / 3.0 * ((5 * x2 + 3) * b.XV(i, j) + 6 * x2 * V) * w + q * (V - x2 * G) * Xw(i, j) -
                        (G + V) * xiw(i, j) + (2 * pm * Om - 2 * b.xiOm(i, j) - pm * b.XOm(i, j)) * p +
                        (pm * Om - b.xiOm(i, j)) * xp + b.XOm(i, j) * sp;
            if (corrected) L2 += x2 * q * Om * w;
            r.L2(i, j) = L2;
            r.M2(i, j) = 10.0 / 3.0 * ((1 + x2) * Du(i, j) + xu) * uu + pm * (xp + 2 * p) * w -
                         (xp + 2 * p) * xiw(i, j) + (sp - pm * p) * Xw(i, j);
        }
    });
    return r;
}

struct RemainderConfig {
    double y_min = -8, y_max = 8;
    std::size_t ny = 129, xi_cells = 32;
    SeedParams seeds{};
    GExtension extension = GExtension::equal_v;
    L2Form l2 = L2Form::corrected;
    double amplitude = 1e-3;
    double t_end = 0.5;
    std::size_t max_steps = 100000;
    double cfl = 0.4;
    double dt_max = 1e-2;
    double ceiling = 1e8;
    std::size_t output_every = 1;
    bool pin_u_edges = false;  // hold u = 0 at ξ = ±1 instead of evolving it there

    void validate() const {
        seeds.validate();
        if (!(y_max > y_min)) throw ConfigError("strip needs y_max > y_min");
        if (ny < 9) throw ConfigError("strip needs at least 9 nodes in y");
        if (!(cfl > 0 && cfl <= 1)) throw ConfigError("cfl must lie in (0, 1]");
        if (!(dt_max > 0)) throw ConfigError("dt_max must be positive");
        if (!(t_end >= 0)) throw ConfigError("t_end must be non-negative");
        if (!(t_end < blowup_time(seeds))) {
            throw ConfigError("t_end " + format_double(t_end) + " is not below the background blow-up time " +
                              format_double(blowup_time(seeds)));
        }
        if (!(ceiling > 0)) throw ConfigError("ceiling must be positive");
        if (output_every == 0) throw ConfigError("output_every must be at least 1");
    }
};

struct RemainderState {
    double t = 0;
    ScalarField u, omega, psi;
};

struct TrajectoryRow {
    std::size_t step = 0;
    double t = 0, dt = 0;
    double sup_u = 0, sup_omega = 0, sup_psi = 0;
    double l2_u = 0, l2_omega = 0;
    double cfl = 0;  // dt times the largest transport-plus-reaction rate
};

struct RemainderRun {
    std::vector<TrajectoryRow> rows;
    RemainderState final_state;
    std::string status;  // "ok", "forcing-free OK", "remainder-blowup", "max-steps"
    std::size_t steps = 0;
};

class RemainderSimulator {
public:
    explicit RemainderSimulator(RemainderConfig cfg)
        : cfg_((cfg.validate(), cfg)),
          grid_(WedgeGrid::log_strip(cfg_.y_min, cfg_.y_max, cfg_.ny, cfg_.xi_cells)),
          op_(grid_),
          cache_(cfg_.seeds, grid_, cfg_.extension) {}

    const GridPtr& grid() const { return grid_; }
    EllipticOperator& elliptic() { return op_; }
    const RemainderConfig& config() const { return cfg_; }

    // u0 = ψ0 = amp·x²e^{−x²}(1−ξ²)² with ψ0 zeroed on the boundary and ω0 = Δψ0.
    RemainderState initial_state() const {
        auto profile = [&](double x, double xi) {
            return cfg_.amplitude * x * x * std::exp(-x * x) * (1 - xi * xi) * (1 - xi * xi);
        };
        RemainderState s;
        s.u = ScalarField::sample(grid_, profile, Parity::even, Parity::even);
        s.psi = ScalarField::sample(grid_, profile, Parity::even, Parity::even);
        for (std::size_t i = 0; i < grid_->nx(); ++i)
            for (std::size_t j = 0; j < grid_->nxi(); ++j)
                if (grid_->is_x_boundary(i) || grid_->is_xi_boundary(j)) s.psi(i, j) = 0;
        s.omega = apply_operator(s.psi);
        return s;
    }

    // (u_t, ω_t) after recovering ψ from ω. Both rates vanish at the strip ends. The ξ-edges are outflow for the
    // transport (G+V)ξ∂_ξ, so u and ω evolve there unless pin_u_edges holds u at zero.
    std::pair<ScalarField, ScalarField> rates(double t, const ScalarField& u, const ScalarField& omega,
                                              ScalarField* psi_out = nullptr) {
        ScalarField psi = op_.solve(omega);
        const auto terms = remainder_terms(cache_.at(t), u, omega, psi, cfg_.l2);
        ScalarField ut = (terms.L1 + terms.M1) * (1 / kLambda);
        ScalarField wt = (terms.L2 + terms.M2) * (1 / kLambda);
        for (std::size_t i = 0; i < grid_->nx(); ++i) {
            for (std::size_t j = 0; j < grid_->nxi(); ++j) {
                if (grid_->is_x_boundary(i)) ut(i, j) = wt(i, j) = 0;
                if (cfg_.pin_u_edges && grid_->is_xi_boundary(j)) ut(i, j) = 0;
            }
        }
        if (psi_out) *psi_out = std::move(psi);
        return {std::move(ut), std::move(wt)};
    }

    // Largest transport-plus-reaction rate of the linearized system.
    double max_rate(double t, const ScalarField& psi) {
        const auto& b = cache_.at(t);
        const ScalarField Xp = adapted_Zx(psi), xip = xi_dxi(psi);
        const double hy = grid_->h_x(), hxi = grid_->h_xi();
        double rate = 0;
        for (std::size_t i = 0; i < grid_->nx(); ++i) {
            for (std::size_t j = 0; j < grid_->nxi(); ++j) {
                const double xi = grid_->xi(j), x2 = xi * xi, q = 1 / (1 + x2);
                const double V = b.V(i, j), G = b.G(i, j);
                const double ay = std::abs(q * (V - x2 * G)) + std::abs(xip(i, j)) + std::abs(psi(i, j));
                const double axi = std::abs((G + V) * xi) + std::abs(Xp(i, j)) + std::abs(psi(i, j));
                const double react = std::abs(V) + std::abs(G) + std::abs(b.U(i, j)) + std::abs(b.Om(i, j));
                rate = std::max(rate, (ay / hy + axi / hxi + react) / kLambda);
            }
        }
        return rate;
    }

    double stable_dt(double t, const ScalarField& psi) {
        const double rate = max_rate(t, psi);
        return rate > 0 ? std::min(cfg_.dt_max, cfg_.cfl / rate) : cfg_.dt_max;
    }

    RemainderState step(const RemainderState& s, double dt) {
        auto [k1u, k1w] = rates(s.t, s.u, s.omega);
        auto [k2u, k2w] = rates(s.t + dt / 2, s.u + k1u * (dt / 2), s.omega + k1w * (dt / 2));
        auto [k3u, k3w] = rates(s.t + dt / 2, s.u + k2u * (dt / 2), s.omega + k2w * (dt / 2));
        auto [k4u, k4w] = rates(s.t + dt, s.u + k3u * dt, s.omega + k3w * dt);
        RemainderState n;
        n.t = s.t + dt;
        n.u = s.u + (k1u + k2u * 2.0 + k3u * 2.0 + k4u) * (dt / 6);
        n.omega = s.omega + (k1w + k2w * 2.0 + k3w * 2.0 + k4w) * (dt / 6);
        n.u.set_parity(Parity::even, Parity::even);
        n.omega.set_parity(Parity::even, Parity::even);
        n.psi = op_.solve(n.omega);
        return n;
    }

    TrajectoryRow summarize(const RemainderState& s, std::size_t step, double dt) const {
        return {step, s.t, dt, s.u.max_abs(), s.omega.max_abs(), s.psi.max_abs(),
                std::sqrt(weighted_l2_squared(s.u)), std::sqrt(weighted_l2_squared(s.omega))};
    }

    using Observer = std::function<void(const RemainderState&, TrajectoryRow&)>;

    // Runs to t_end or max_steps, whichever comes first; a fixed dt > 0 overrides the CFL choice.
    // The observer sees every recorded row together with its state.
    RemainderRun run(RemainderState s, double fixed_dt = 0, const Observer& observe = {}) {
        RemainderRun out;
        if (s.psi.values().empty()) s.psi = op_.solve(s.omega);
        const bool zero_start = s.u.max_abs() == 0 && s.omega.max_abs() == 0;
        auto record = [&](std::size_t n, double dt, double cfl) {
            out.rows.push_back(summarize(s, n, dt));
            out.rows.back().cfl = cfl;
            if (observe) observe(s, out.rows.back());
        };
        record(0, 0, 0);
        std::size_t n = 0;
        out.status = "ok";
        while (n < cfg_.max_steps && s.t < cfg_.t_end) {
            double dt = fixed_dt > 0 ? fixed_dt : stable_dt(s.t, s.psi);
            if (fixed_dt <= 0) dt = std::min(dt, cfg_.t_end - s.t);
            if (s.t + dt >= blowup_time(cfg_.seeds)) break;
            const double cfl = dt * max_rate(s.t, s.psi);
            s = step(s, dt);
            ++n;
            if (!s.u.all_finite() || !s.omega.all_finite() || s.u.max_abs() + s.omega.max_abs() > cfg_.ceiling) {
                out.status = "remainder-blowup";
                out.rows.push_back(summarize(s, n, dt));
                out.rows.back().cfl = cfl;
                break;
            }
            if (n % cfg_.output_every == 0 || s.t >= cfg_.t_end) record(n, dt, cfl);
        }
        if (out.status == "ok" && s.t < cfg_.t_end && n >= cfg_.max_steps) out.status = "max-steps";
        if (zero_start && out.status != "remainder-blowup") {
            out.status = s.u.max_abs() + s.omega.max_abs() < 1e-12 ? "forcing-free OK" : "forcing-free FAILED";
        }
        out.steps = n;
        out.final_state = std::move(s);
        return out;
    }

private:
    RemainderConfig cfg_;
    GridPtr grid_;
    EllipticOperator op_;
    BackgroundCache cache_;
};

inline void write_trajectory_csv(const std::string& path, const std::vector<TrajectoryRow>& rows) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot write " + path);
    os << "step,t,dt,sup_u,sup_omega,sup_psi,l2_u,l2_omega,cfl\n";
    for (const auto& r : rows) {
        os << r.step << ',' << format_double(r.t) << ',' << format_double(r.dt) << ',' << format_double(r.sup_u) << ','
           << format_double(r.sup_omega) << ',' << format_double(r.sup_psi) << ',' << format_double(r.l2_u) << ','
           << format_double(r.l2_omega) << ',' << format_double(r.cfl) << '\n';
    }
}

} // namespace wedgelab
