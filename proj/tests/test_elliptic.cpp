#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "wedgelab/corpus.hpp"
#include "wedgelab/elliptic.hpp"

using namespace wedgelab;

namespace {

GridPtr strip(std::size_t ny, std::size_t cells, double y0 = -8, double y1 = 8) {
    return WedgeGrid::log_strip(y0, y1, ny, cells);
}

// Decays like x⁴ at the left strip end and like e^{-x²} at the right one.
template <class T>
T manufactured(const T& x, const T& xi) {
    const T x2 = x * x;
    return x2 * x2 * exp(-1.0 * x2) * ipow(1.0 - xi * xi, 2) * (1.0 + 0.5 * xi * xi);
}

ScalarField sample_manufactured(const GridPtr& g) {
    return ScalarField::sample(g, [](double x, double xi) { return manufactured(x, xi); }, Parity::even, Parity::even);
}

ScalarField sample_analytic_omega(const GridPtr& g) {
    return ScalarField::sample(
        g, [](double x, double xi) { return analytic_operator([](auto a, auto b) { return manufactured(a, b); }, x, xi); },
        Parity::even, Parity::even);
}

double max_interior_diff(const ScalarField& a, const ScalarField& b, std::size_t margin = 2) {
    return (a - b).max_abs_interior(margin);
}

} // namespace

TEST(EllipticCoefficients, HandValuesAtHalf) {
    EXPECT_NEAR(coeff::c1(0.5), -(5 * 0.25 + 3) / (3 * 1.25), 1e-15);
    EXPECT_NEAR(coeff::c2(0.5), -(19 * 0.25 + 21) / (3 * 1.25), 1e-15);
    EXPECT_NEAR(coeff::c3_tilde(0.5), -10.0 / 3.0 * 1.25, 1e-15);
    EXPECT_NEAR(coeff::c4(0.5), -2.0 / 3.0, 1e-15);
    EXPECT_NEAR(coeff::c5(0.5), -1.25 * 5.75 / 3.0, 1e-15);
}

TEST(EllipticCoefficients, C1AndC5NegativeOnClosedInterval) {
    for (int k = 0; k <= 200; ++k) {
        const double xi = -1 + 0.01 * k;
        EXPECT_LT(coeff::c1(xi), 0);
        EXPECT_LT(coeff::c5(xi), 0);
    }
}

TEST(ApplyOperator, ZeroMapsToZero) {
    const auto g = strip(33, 16);
    EXPECT_EQ(apply_operator(ScalarField::constant(g, 0.0)).max_abs(), 0.0);
}

TEST(ApplyOperator, AnalyticOperatorMatchesHandDerivative) {
    // ψ = (1−ξ²)e^{−x²} at (1, 0.5): ψ_x = −2e^{-1}·0.75, ψ_xx = 2e^{-1}·0.75, ψ_ξ = −e^{-1}, ψ_ξξ = −2e^{-1}, ψ_xξ = 2e^{-1}.
    const double e = std::exp(-1.0), xi = 0.5;
    const double expected = coeff::c1(xi) * 1.5 * e + coeff::c2(xi) * (-1.5 * e) + coeff::c4(xi) * 2 * e +
                            coeff::c3_tilde(xi) * (-e) / xi + coeff::c5(xi) * (-2 * e);
    const double got = analytic_operator([](auto x, auto s) { return (1.0 - s * s) * exp(-1.0 * x * x); }, 1.0, xi);
    EXPECT_NEAR(got, expected, 1e-14);
}

TEST(ApplyOperator, SecondOrderAgainstAnalyticOnLogStrip) {
    auto err = [](std::size_t ny, std::size_t cells) {
        const auto g = strip(ny, cells, -4, 3);
        const auto psi = ScalarField::sample(
            g, [](double x, double xi) { return (1 - xi * xi) * std::exp(-x * x); }, Parity::even, Parity::even);
        const auto ref = ScalarField::sample(g, [](double x, double xi) {
            return analytic_operator([](auto a, auto s) { return (1.0 - s * s) * exp(-1.0 * a * a); }, x, xi);
        });
        return max_interior_diff(apply_operator(psi), ref, 0);
    };
    const double e1 = err(57, 16), e2 = err(113, 32), e3 = err(225, 64);
    EXPECT_NEAR(std::log2(e1 / e2), 2.0, 0.3);
    EXPECT_NEAR(std::log2(e2 / e3), 2.0, 0.3);
}

TEST(ApplyOperator, SecondOrderOnLinearGrid) {
    auto err = [](std::size_t nx, std::size_t cells) {
        const auto g = WedgeGrid::linear(0.5, 2.0, nx, cells);
        const auto psi = ScalarField::sample(
            g, [](double x, double xi) { return (1 - xi * xi) * std::exp(-x * x); }, Parity::even, Parity::even);
        const auto ref = ScalarField::sample(g, [](double x, double xi) {
            return analytic_operator([](auto a, auto s) { return (1.0 - s * s) * exp(-1.0 * a * a); }, x, xi);
        });
        return max_interior_diff(apply_operator(psi), ref, 0);
    };
    const double e1 = err(25, 16), e2 = err(49, 32), e3 = err(97, 64);
    EXPECT_NEAR(std::log2(e1 / e2), 2.0, 0.3);
    EXPECT_NEAR(std::log2(e2 / e3), 2.0, 0.3);
}

TEST(ApplyOperator, EvenFieldStaysBoundedNearAxis) {
    double prev = 0;
    for (std::size_t cells : {16, 32, 64}) {
        const auto g = strip(65, cells, -4, 3);
        const auto omega = apply_operator(corpus()[1].sample(g));
        const std::size_t jc = g->nxi() / 2;  // first node above ξ = 0
        double m = 0;
        for (std::size_t i = 0; i < g->nx(); ++i) m = std::max(m, std::abs(omega(i, jc)));
        EXPECT_TRUE(std::isfinite(m));
        if (prev > 0) {
            EXPECT_NEAR(m / prev, 1.0, 0.05);
        }
        prev = m;
    }
}

TEST(ApplyOperator, OddFieldRefusedNearAxis) {
    const auto g = WedgeGrid::log_strip(-2, 2, 9, 8);
    // cell-centered nodes keep |ξ| ≥ h/2, so only a tiny eps guard trips on purpose
    const auto f = ScalarField::sample(g, [](double, double xi) { return xi; }, Parity::even, Parity::odd);
    EXPECT_THROW(adapted_Dxi(f, 0.2), ParityError);
}

TEST(ReconstructVG, ConstantGivesConstant) {
    const auto g = strip(17, 8);
    const auto vg = reconstruct_vg(ScalarField::constant(g, 2.5));
    EXPECT_NEAR((vg.v + -2.5).max_abs(), 0.0, 1e-14);
    EXPECT_NEAR((vg.g + -2.5).max_abs(), 0.0, 1e-14);
}

TEST(ReconstructVG, AnalyticFormulasSecondOrder) {
    auto err = [](std::size_t ny, std::size_t cells) {
        const auto g = strip(ny, cells, -4, 3);
        auto psi_fn = [](auto x, auto xi) { return ipow(1.0 - xi * xi, 2) * exp(-1.0 * x * x); };
        const auto psi = ScalarField::sample(g, [&](double x, double xi) { return psi_fn(x, xi); }, Parity::even,
                                             Parity::even);
        const auto vg = reconstruct_vg(psi);
        double e = 0;
        for (std::size_t i = 0; i < g->nx(); ++i) {
            for (std::size_t j = 0; j < g->nxi(); ++j) {
                const double x = g->x(i), xi = g->xi(j), q = 1 / (1 + xi * xi);
                const auto P = partials(psi_fn, x, xi);
                e = std::max(e, std::abs(vg.v(i, j) - (P.f + xi * xi * q * x * P.fx + xi * P.fy)));
                e = std::max(e, std::abs(vg.g(i, j) - (P.f + q * x * P.fx - xi * P.fy)));
            }
        }
        return e;
    };
    const double e1 = err(57, 16), e2 = err(113, 32), e3 = err(225, 64);
    EXPECT_NEAR(std::log2(e1 / e2), 2.0, 0.3);
    EXPECT_NEAR(std::log2(e2 / e3), 2.0, 0.3);
}

TEST(ReconstructVG, BoundaryDifferenceDropsTangentialTerm) {
    const auto g = strip(65, 32, -4, 3);
    const auto psi = corpus()[1].sample(g);  // vanishes at ξ = ±1
    const auto vg = reconstruct_vg(psi);
    const auto Xi = xi_dxi(psi);
    for (std::size_t i = 0; i < g->nx(); ++i) {
        for (std::size_t j : {std::size_t{0}, g->nxi() - 1}) {
            EXPECT_NEAR(vg.v(i, j) - vg.g(i, j), 2 * Xi(i, j), 1e-13);
        }
    }
}

TEST(OmegaConsistency, ZeroField) {
    const auto g = strip(17, 8);
    EXPECT_EQ(omega_consistency(ScalarField::constant(g, 0.0)), 0.0);
}

TEST(OmegaConsistency, CorpusConvergesAtOrderTwo) {
    for (const auto& pr : corpus()) {
        double prev = 0;
        for (std::size_t k : {8, 16, 32}) {
            const auto g = strip(32 * k + 1, 16 * k, -4, 3);
            const double d = omega_consistency(pr.sample(g));
            if (prev > 0) {
                EXPECT_NEAR(prev / d, 4.0, 0.8) << pr.name << " k=" << k;
            }
            prev = d;
        }
    }
}

TEST(EllipticOperator, RejectsNonStripGrid) {
    EXPECT_THROW(EllipticOperator(WedgeGrid::linear(0.1, 2, 9, 8)), ConfigError);
}

TEST(EllipticOperator, BandwidthMatchesNinePointFootprint) {
    const auto g = strip(21, 12);
    EllipticOperator op(g);
    EXPECT_EQ(op.bandwidth(), (g->nxi() - 2) + 1);
}

TEST(EllipticOperator, MatrixEqualsApplyOperatorInterior) {
    const auto g = strip(33, 16);
    EllipticOperator op(g);
    ScalarField psi = sample_manufactured(g);
    for (std::size_t i = 0; i < g->nx(); ++i)
        for (std::size_t j = 0; j < g->nxi(); ++j)
            if (g->is_x_boundary(i) || g->is_xi_boundary(j)) psi(i, j) = 0;
    Eigen::VectorXd u(op.unknowns());
    for (std::size_t i = 1; i + 1 < g->nx(); ++i)
        for (std::size_t j = 1; j + 1 < g->nxi(); ++j) u((i - 1) * (g->nxi() - 2) + (j - 1)) = psi(i, j);
    const Eigen::VectorXd Au = op.matrix() * u;
    const auto w = apply_operator(psi);
    double scale = w.max_abs(), e = 0;
    for (std::size_t i = 1; i + 1 < g->nx(); ++i)
        for (std::size_t j = 1; j + 1 < g->nxi(); ++j)
            e = std::max(e, std::abs(-Au((i - 1) * (g->nxi() - 2) + (j - 1)) - w(i, j)));
    EXPECT_LT(e, 1e-12 * scale);
}

TEST(EllipticSolve, ZeroRhsGivesZero) {
    const auto g = strip(33, 16);
    EllipticOperator op(g);
    EXPECT_EQ(op.solve(ScalarField::constant(g, 0.0)).max_abs(), 0.0);
}

TEST(EllipticSolve, RoundTripAndBoundaryTraces) {
    const auto g = strip(65, 32);
    EllipticOperator op(g);
    const auto omega = decaying_corpus()[0].sample(g);
    const auto psi = op.solve(omega);
    EXPECT_LE(op.last_stats().relative_residual, 1e-10);
    EXPECT_LE(max_interior_diff(apply_operator(psi), omega, 1), 1e-8 * omega.max_abs());
    for (std::size_t i = 0; i < g->nx(); ++i) {
        EXPECT_EQ(psi(i, 0), 0.0);
        EXPECT_EQ(psi(i, g->nxi() - 1), 0.0);
    }
    for (std::size_t j = 0; j < g->nxi(); ++j) {
        EXPECT_EQ(psi(0, j), 0.0);
        EXPECT_EQ(psi(g->nx() - 1, j), 0.0);
    }
}

TEST(EllipticSolve, ManufacturedSolutionOrderTwo) {
    std::vector<double> errs;
    for (std::size_t k : {1, 2, 4}) {
        const auto g = strip(64 * k + 1, 16 * k);
        EllipticOperator op(g);
        const auto psi = op.solve(sample_analytic_omega(g));
        errs.push_back(std::sqrt(weighted_l2_squared(psi - sample_manufactured(g))));
    }
    EXPECT_NEAR(std::log2(errs[0] / errs[1]), 2.0, 0.3);
    EXPECT_NEAR(std::log2(errs[1] / errs[2]), 2.0, 0.3);
}

TEST(EllipticSolve, Homogeneity) {
    const auto g = strip(33, 16);
    EllipticOperator op(g);
    const auto omega = decaying_corpus()[1].sample(g);
    const auto psi = op.solve(omega);
    for (double a : {-1.0, 2.0, 10.0}) {
        const auto pa = op.solve(omega * a);
        EXPECT_LE((pa - psi * a).max_abs(), 1e-10 * std::abs(a) * psi.max_abs());
    }
}

TEST(EllipticSolve, ParityPreservedInXi) {
    const auto g = strip(33, 16);
    EllipticOperator op(g);
    const auto psi = op.solve(decaying_corpus()[2].sample(g));
    EXPECT_LE(psi.parity_defect(), 1e-10 * psi.max_abs());
}

TEST(EllipticSolve, OneSignedDataOneSignedSolution) {
    const auto g = strip(65, 32);
    EllipticOperator op(g);
    for (const auto& pr : decaying_corpus()) {
        if (pr.beta < 0) continue;  // keep ω ≥ 0
        const auto psi = op.solve(pr.sample(g));
        double mn = 0, mx = 0;
        for (std::size_t i = 1; i + 1 < g->nx(); ++i)
            for (std::size_t j = 1; j + 1 < g->nxi(); ++j) {
                mn = std::min(mn, psi(i, j));
                mx = std::max(mx, psi(i, j));
            }
        // c1, c5 < 0 make Δ act like −∂², so ω ≥ 0 yields ψ ≥ 0
        EXPECT_GE(mn, -1e-12 * mx) << pr.name;
        EXPECT_GT(mx, 0.0) << pr.name;
    }
}

TEST(EllipticSolve, GridMismatchRejected) {
    EllipticOperator op(strip(17, 8));
    EXPECT_THROW(op.solve(ScalarField::constant(strip(17, 8), 1.0)), GridError);
}

TEST(EllipticSolve, IterativePathAgreesWithDirect) {
    const auto g = strip(33, 16);
    EllipticOperator direct(g);
    EllipticOperator iterative(g, 0);
    const auto omega = decaying_corpus()[0].sample(g);
    const auto a = direct.solve(omega);
    const auto b = iterative.solve(omega);
    EXPECT_EQ(iterative.last_stats().method, "bicgstab-diag");
    EXPECT_LE((a - b).max_abs(), 1e-8 * a.max_abs());
}

TEST(EllipticExport, CooHasAllNonzerosAt17Digits) {
    const auto g = strip(9, 6);
    EllipticOperator op(g);
    const std::string path = ::testing::TempDir() + "op.coo";
    op.export_coo(path);
    std::ifstream is(path);
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "row,col,value");
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(op.unknowns(), op.unknowns());
    long count = 0;
    while (std::getline(is, line)) {
        int r, c;
        double v;
        ASSERT_EQ(std::sscanf(line.c_str(), "%d,%d,%lf", &r, &c, &v), 3);
        M(r, c) = v;
        ++count;
    }
    EXPECT_EQ(count, op.matrix().nonZeros());
    EXPECT_EQ((M - Eigen::MatrixXd(op.matrix())).cwiseAbs().maxCoeff(), 0.0);
    std::remove(path.c_str());
}

TEST(EllipticConstant, PositiveFiniteAndScaleInvariant) {
    const auto g = strip(65, 32);
    EllipticOperator op(g);
    const std::vector<Profile> one{decaying_corpus()[0]};
    const auto r = measure_elliptic_constant(op, 0, one);
    EXPECT_GT(r.ratio, 0);
    EXPECT_TRUE(std::isfinite(r.ratio));
    Profile twice = one[0];
    twice.scale *= 2;
    const auto r2 = measure_elliptic_constant(op, 0, std::vector<Profile>{twice});
    EXPECT_NEAR(r2.ratio, r.ratio, 1e-9 * r.ratio);
}

TEST(EllipticConstant, StableUnderRefinement) {
    const auto probes = decaying_corpus();
    EllipticOperator coarse(strip(129, 32));
    EllipticOperator fine(strip(257, 64));
    const double a = measure_elliptic_constant(coarse, 0, probes).ratio;
    const double b = measure_elliptic_constant(fine, 0, probes).ratio;
    EXPECT_NEAR(b / a, 1.0, 0.1);
}

TEST(WeightedNorm, TrapezoidMeasureOnLogStrip) {
    // ∫∫ e^{-2x²}(1−ξ²)⁴ |x| dx dξ over x ∈ ℝ, ξ ∈ [−1,1] = (1/2)·(256/315)
    const auto g = strip(257, 256, -10, 3);
    const auto f = ScalarField::sample(
        g, [](double x, double xi) { return std::exp(-x * x) * std::pow(1 - xi * xi, 2); }, Parity::even,
        Parity::even);
    EXPECT_NEAR(weighted_l2_squared(f), 128.0 / 315.0, 2e-4);
}

TEST(WeightedNorm, WeightTableValidation) {
    WeightSpec w;
    w.table_xi = {-1, 0, 1};
    w.table_w = {1, 2, 1};
    EXPECT_NO_THROW(w.validate());
    EXPECT_DOUBLE_EQ(w(0.5), 1.5);
    w.table_w = {1, 0, 1};
    EXPECT_THROW(w.validate(), ConfigError);
}
