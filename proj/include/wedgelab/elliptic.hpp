#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "wedgelab/calculus.hpp"
#include "wedgelab/jet.hpp"

namespace wedgelab {

// Coefficients of ω = Δψ. The 1/ξ of c3 is carried by D_ξ, so c3_tilde is bounded.
namespace coeff {
inline double c1(double xi) { return -(5 * xi * xi + 3) / (3 * (xi * xi + 1)); }
inline double c2(double xi) { return -(19 * xi * xi + 21) / (3 * (xi * xi + 1)); }
inline double c3_tilde(double xi) { return -10.0 / 3.0 * (xi * xi + 1); }
inline double c4(double xi) { return -4.0 / 3.0 * xi; }
inline double c5(double xi) { return -(xi * xi + 1) * (3 * xi * xi + 5) / 3.0; }
} // namespace coeff

// Δψ with the analytic partials of a point function; oracle for the discrete operator.
template <class F>
double analytic_operator(F&& psi, double x, double xi) {
    const auto P = partials(psi, x, xi);
    return coeff::c1(xi) * x * x * P.fxx + coeff::c2(xi) * x * P.fx + coeff::c4(xi) * x * P.fxy +
           coeff::c3_tilde(xi) * P.fy / xi + coeff::c5(xi) * P.fyy;
}

// Discrete Δψ on the full grid (one-sided stencils at the edges). Uses the same axis
// stencils as EllipticOperator, so both agree exactly at interior nodes.
inline ScalarField apply_operator(const ScalarField& psi) {
    const auto& g = psi.grid();
    if (g.mode() == GridMode::box) throw ConfigError("apply_operator needs a wedge grid");
    const ScalarField pxx = diff_x(psi, 2);
    const ScalarField Zs = adapted_Zx(psi);
    const ScalarField Zxi = diff_xi(Zs, 1);
    const ScalarField Ds = adapted_Dxi(psi);
    const ScalarField pss = diff_xi(psi, 2);
    ScalarField out(psi.grid_ptr(), psi.parity_x(), psi.parity_xi());
    for (std::size_t i = 0; i < g.nx(); ++i) {
        const double x2 = g.x(i) * g.x(i);
        for (std::size_t j = 0; j < g.nxi(); ++j) {
            const double xi = g.xi(j);
            out(i, j) = coeff::c1(xi) * x2 * pxx(i, j) + coeff::c2(xi) * Zs(i, j) + coeff::c4(xi) * Zxi(i, j) +
                        coeff::c3_tilde(xi) * Ds(i, j) + coeff::c5(xi) * pss(i, j);
        }
    }
    return out;
}

// Ω(a, b) = −x b_x − (5/3) x a_x + (1+ξ²)(ξ b_ξ − (5/3) D_ξ a); equals Δψ when (a, b) = (v, g) of ψ.
inline ScalarField omega_combination(const ScalarField& a, const ScalarField& b) {
    const auto& g = a.grid();
    const ScalarField Za = adapted_Zx(a), Zb = adapted_Zx(b);
    const ScalarField bxi = diff_xi(b, 1), Da = adapted_Dxi(a);
    ScalarField out(a.grid_ptr(), parity_sum(a.parity_x(), b.parity_x()), parity_sum(a.parity_xi(), b.parity_xi()));
    for (std::size_t i = 0; i < g.nx(); ++i) {
        for (std::size_t j = 0; j < g.nxi(); ++j) {
            const double xi = g.xi(j);
            out(i, j) = -Zb(i, j) - 5.0 / 3.0 * Za(i, j) + (1 + xi * xi) * (xi * bxi(i, j) - 5.0 / 3.0 * Da(i, j));
        }
    }
    return out;
}

struct VG {
    ScalarField v, g;
};

// v = ψ + ξ²/(1+ξ²) xψ_x + ξψ_ξ,  g = ψ + 1/(1+ξ²) xψ_x − ξψ_ξ.
inline VG reconstruct_vg(const ScalarField& psi) {
    const auto& gr = psi.grid();
    const ScalarField Z = adapted_Zx(psi);
    const ScalarField Xi = xi_dxi(psi);
    ScalarField v(psi.grid_ptr(), psi.parity_x(), psi.parity_xi());
    ScalarField g(psi.grid_ptr(), psi.parity_x(), psi.parity_xi());
    for (std::size_t i = 0; i < gr.nx(); ++i) {
        for (std::size_t j = 0; j < gr.nxi(); ++j) {
            const double xi = gr.xi(j), q = 1 / (1 + xi * xi);
            v(i, j) = psi(i, j) + xi * xi * q * Z(i, j) + Xi(i, j);
            g(i, j) = psi(i, j) + q * Z(i, j) - Xi(i, j);
        }
    }
    return {std::move(v), std::move(g)};
}

// Margin 3: composed first differences lose an order next to the half-spaced ξ edge node.
inline double omega_consistency(const ScalarField& psi, std::size_t margin = 3) {
    const auto vg = reconstruct_vg(psi);
    return (omega_combination(vg.v, vg.g) - apply_operator(psi)).max_abs_interior(margin);
}

struct SolveStats {
    std::string method;
    int iterations = 0;
    double relative_residual = 0;
};

// Δ on the truncated log strip with ψ = 0 on ξ = ±1 and at both y ends.
// Unknowns are interior nodes ordered ξ-fastest; the matrix stores −Δ.
class EllipticOperator {
public:
    using SpMat = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

    explicit EllipticOperator(GridPtr grid, std::size_t direct_limit = 1'000'000) : grid_(std::move(grid)) {
        if (grid_->mode() != GridMode::log_x) throw ConfigError("EllipticOperator needs a log-x strip grid");
        ny_ = grid_->nx() - 2;
        nj_ = grid_->nxi() - 2;
        assemble();
        if (unknowns() <= direct_limit) {
            lu_ = std::make_unique<Eigen::SparseLU<SpMat>>();
            lu_->analyzePattern(A_);
            lu_->factorize(A_);
            if (lu_->info() != Eigen::Success) throw SolverError("sparse LU factorization failed (singular matrix?)");
        }
    }

    const GridPtr& grid() const { return grid_; }
    std::size_t unknowns() const { return ny_ * nj_; }
    const SpMat& matrix() const { return A_; }
    const SolveStats& last_stats() const { return stats_; }

    std::size_t bandwidth() const {
        std::size_t bw = 0;
        for (int k = 0; k < A_.outerSize(); ++k)
            for (SpMat::InnerIterator it(A_, k); it; ++it)
                bw = std::max<std::size_t>(bw, static_cast<std::size_t>(std::abs(it.row() - it.col())));
        return bw;
    }

    ScalarField apply(const ScalarField& psi) const { return apply_operator(psi); }

    ScalarField solve(const ScalarField& omega, double tol = 1e-10) {
        if (omega.grid_ptr() != grid_) throw GridError("solve: omega lives on another grid");
        omega.require_finite("solve");
        Eigen::VectorXd rhs(unknowns());
        for (std::size_t i = 0; i < ny_; ++i)
            for (std::size_t j = 0; j < nj_; ++j) rhs(idx(i + 1, j + 1)) = -omega(i + 1, j + 1);
        Eigen::VectorXd sol;
        if (lu_) {
            sol = lu_->solve(rhs);
            stats_ = {"sparse-lu", 1, 0.0};
        } else {
            Eigen::BiCGSTAB<SpMat, Eigen::DiagonalPreconditioner<double>> it;
            it.setTolerance(tol * 1e-2);
            it.setMaxIterations(20000);
            it.compute(A_);
            sol = it.solve(rhs);
            stats_ = {"bicgstab-diag", static_cast<int>(it.iterations()), it.error()};
            if (it.info() != Eigen::Success) {
                throw SolverError("BiCGSTAB did not converge: " + std::to_string(it.iterations()) +
                                  " iterations, estimated error " + format_double(it.error()));
            }
        }
        const double rn = rhs.norm();
        stats_.relative_residual = rn > 0 ? (A_ * sol - rhs).norm() / rn : (A_ * sol).norm();
        if (!(stats_.relative_residual <= tol)) {
            throw SolverError("linear residual " + format_double(stats_.relative_residual) + " above " +
                              format_double(tol));
        }
        ScalarField psi(grid_, Parity::none, omega.parity_xi());
        for (std::size_t i = 0; i < ny_; ++i)
            for (std::size_t j = 0; j < nj_; ++j) psi(i + 1, j + 1) = sol(idx(i + 1, j + 1));
        return psi;
    }

    void export_coo(const std::string& path) const {
        std::ofstream os(path);
        if (!os) throw ConfigError("cannot write " + path);
        os << "row,col,value\n";
        // row-major listing for readability
        Eigen::SparseMatrix<double, Eigen::RowMajor, int> R(A_);
        for (int r = 0; r < R.outerSize(); ++r)
            for (decltype(R)::InnerIterator it(R, r); it; ++it)
                os << it.row() << ',' << it.col() << ',' << format_double(it.value()) << '\n';
    }

private:
    std::size_t idx(std::size_t i, std::size_t j) const { return (i - 1) * nj_ + (j - 1); }

    void assemble() {
        const auto& ay = grid_->x_axis();
        const auto& ax = grid_->xi_axis();
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(unknowns() * 12);
        auto add = [&](std::size_t row, std::size_t i, std::size_t j, double w) {
            if (i == 0 || j == 0 || i + 1 == grid_->nx() || j + 1 == grid_->nxi() || w == 0.0) return;
            trip.emplace_back(static_cast<int>(row), static_cast<int>(idx(i, j)), -w);
        };
        for (std::size_t i = 1; i + 1 < grid_->nx(); ++i) {
            for (std::size_t j = 1; j + 1 < grid_->nxi(); ++j) {
                const std::size_t row = idx(i, j);
                const double xi = grid_->xi(j);
                const double c1 = coeff::c1(xi), cy = coeff::c2(xi) - c1, c4 = coeff::c4(xi);
                const double cD = coeff::c3_tilde(xi) / xi, c5 = coeff::c5(xi);
                const Stencil& y1 = ay.d1[i];
                const Stencil& y2 = ay.d2[i];
                const Stencil& s1 = ax.d1[j];
                const Stencil& s2 = ax.d2[j];
                for (std::size_t a = 0; a < y2.size; ++a) add(row, y2.first + a, j, c1 * y2.w[a]);
                for (std::size_t a = 0; a < y1.size; ++a) add(row, y1.first + a, j, cy * y1.w[a]);
                for (std::size_t b = 0; b < s1.size; ++b) add(row, i, s1.first + b, cD * s1.w[b]);
                for (std::size_t b = 0; b < s2.size; ++b) add(row, i, s2.first + b, c5 * s2.w[b]);
                for (std::size_t a = 0; a < y1.size; ++a)
                    for (std::size_t b = 0; b < s1.size; ++b)
                        add(row, y1.first + a, s1.first + b, c4 * y1.w[a] * s1.w[b]);
            }
        }
        A_.resize(static_cast<int>(unknowns()), static_cast<int>(unknowns()));
        A_.setFromTriplets(trip.begin(), trip.end());
        A_.makeCompressed();
    }

    GridPtr grid_;
    std::size_t ny_ = 0, nj_ = 0;
    SpMat A_;
    std::unique_ptr<Eigen::SparseLU<SpMat>> lu_;
    SolveStats stats_;
};

// Weighted norms on the log strip: dμ_w = w(ξ)|x| dx dξ = w(ξ) x² dy dξ over x > 0, doubled for x < 0.
struct WeightSpec {
    std::string label = "w=1";
    std::vector<double> table_xi, table_w;  // optional piecewise-linear table

    double operator()(double xi) const {
        if (table_xi.empty()) return 1.0;
        if (xi <= table_xi.front()) return table_w.front();
        for (std::size_t k = 1; k < table_xi.size(); ++k) {
            if (xi <= table_xi[k]) {
                const double s = (xi - table_xi[k - 1]) / (table_xi[k] - table_xi[k - 1]);
                return table_w[k - 1] + s * (table_w[k] - table_w[k - 1]);
            }
        }
        return table_w.back();
    }
    void validate() const {
        if (table_xi.size() != table_w.size()) throw ConfigError("weight table columns differ in length");
        for (std::size_t k = 0; k < table_w.size(); ++k) {
            if (!(table_w[k] > 0)) throw ConfigError("weight must be positive on (-1,1)");
            if (k > 0 && !(table_xi[k] > table_xi[k - 1])) throw ConfigError("weight table xi must increase");
        }
    }
};

// Trapezoid weights along an axis of nodes s (nonuniform allowed).
inline std::vector<double> trapezoid_weights(const std::vector<double>& s) {
    std::vector<double> w(s.size(), 0.0);
    for (std::size_t k = 0; k + 1 < s.size(); ++k) {
        const double h = s[k + 1] - s[k];
        w[k] += 0.5 * h;
        w[k + 1] += 0.5 * h;
    }
    return w;
}

// ∫∫ f² dμ_w by tensor trapezoid. Linear-x grids integrate |x| dx over the stored range;
// log strips integrate x² dy and double it for the mirror half x < 0.
inline double weighted_l2_squared(const ScalarField& f, const WeightSpec& w = {}) {
    const auto& g = f.grid();
    const auto wx = trapezoid_weights(g.x_axis().s);
    const auto wxi = trapezoid_weights(g.xi_axis().s);
    double total = 0;
    for (std::size_t i = 0; i < g.nx(); ++i) {
        const double x = g.x(i);
        const double mx = g.mode() == GridMode::log_x ? 2 * x * x : std::abs(x);
        double row = 0;
        for (std::size_t j = 0; j < g.nxi(); ++j) row += wxi[j] * w(g.xi(j)) * f(i, j) * f(i, j);
        total += wx[i] * mx * row;
    }
    return total;
}

// Σ_{j+l<=m} ‖Z_x^j D_ξ^l f‖² with the adapted derivatives natural on the log strip.
inline double adapted_sobolev_squared(const ScalarField& f, int m, const WeightSpec& w = {}) {
    double s = 0;
    ScalarField fl = f;
    for (int l = 0; l <= m; ++l) {
        if (l > 0) fl = adapted_Dxi(fl);
        ScalarField fj = fl;
        for (int j = 0; j + l <= m; ++j) {
            if (j > 0) fj = adapted_Zx(fj);
            s += weighted_l2_squared(fj, w);
        }
    }
    return s;
}

struct EllipticReport {
    int m = 0;
    double ratio = 0;          // sup over probes of ‖ψ‖_{H^{m+2}} / ‖ω‖_{H^m}
    std::string worst_probe;
    std::string method;
    double max_relative_residual = 0;
};

template <class Probes>
EllipticReport measure_elliptic_constant(EllipticOperator& op, int m, const Probes& probes, const WeightSpec& w = {}) {
    EllipticReport rep;
    rep.m = m;
    for (const auto& pr : probes) {
        const ScalarField omega = pr.sample(op.grid());
        const ScalarField psi = op.solve(omega);
        const double r = std::sqrt(adapted_sobolev_squared(psi, m + 2, w) / adapted_sobolev_squared(omega, m, w));
        if (r > rep.ratio) {
            rep.ratio = r;
            rep.worst_probe = pr.name;
        }
        rep.method = op.last_stats().method;
        rep.max_relative_residual = std::max(rep.max_relative_residual, op.last_stats().relative_residual);
    }
    return rep;
}

} // namespace wedgelab
