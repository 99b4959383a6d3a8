#include <cmath>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "wedgelab/calculus.hpp"

using namespace wedgelab;

namespace {

template <class F>
double max_err_interior(const ScalarField& num, F exact, std::size_t margin = 1) {
    const auto& g = num.grid();
    double e = 0.0;
    for (std::size_t i = margin; i + margin < g.nx(); ++i)
        for (std::size_t j = margin; j + margin < g.nxi(); ++j)
            e = std::max(e, std::abs(num(i, j) - exact(g.x(i), g.xi(j))));
    return e;
}

} // namespace

TEST(WedgeGrid, XiAxisIsCellCenteredWithBoundaries) {
    auto g = WedgeGrid::symmetric(2.0, 9, 8);
    ASSERT_EQ(g->nxi(), 10u);
    EXPECT_EQ(g->xi(0), -1.0);
    EXPECT_EQ(g->xi(9), 1.0);
    int boundary = 0;
    for (double xi : g->xi_coords()) {
        EXPECT_NE(xi, 0.0);
        if (std::abs(xi) == 1.0) ++boundary;
    }
    EXPECT_EQ(boundary, 2);
    EXPECT_DOUBLE_EQ(g->xi(1), -0.875);
    EXPECT_DOUBLE_EQ(g->h_xi(), 0.25);
    EXPECT_EQ(g->x(4), 0.0);
}

TEST(WedgeGrid, LogStripIsPositiveAndUniformInY) {
    auto g = WedgeGrid::log_strip(-4.0, 4.0, 33, 16);
    for (std::size_t i = 0; i < g->nx(); ++i) {
        EXPECT_GT(g->x(i), 0.0);
        EXPECT_NEAR(std::log(g->x(i)), -4.0 + 0.25 * static_cast<double>(i), 1e-13);
    }
}

TEST(WedgeGrid, RejectsTooFewNodes) {
    EXPECT_THROW(WedgeGrid::linear(0.0, 1.0, 4, 8), GridError);
    EXPECT_THROW(WedgeGrid::linear(0.0, 1.0, 9, 3), GridError);
    EXPECT_THROW(WedgeGrid::symmetric(1.0, 10, 8), GridError);
}

TEST(Stencil, FornbergReproducesClassicWeights) {
    const double nodes[] = {-1.0, 0.0, 1.0};
    auto w = fornberg_weights(0.0, nodes, 2);
    EXPECT_NEAR(w[0][1], -0.5, 1e-15);
    EXPECT_NEAR(w[2][1], 0.5, 1e-15);
    EXPECT_NEAR(w[0][2], 1.0, 1e-15);
    EXPECT_NEAR(w[1][2], -2.0, 1e-15);
}

TEST(DiffX, LinearAndQuadraticAreExact) {
    auto g = WedgeGrid::symmetric(3.0, 21, 8);
    auto fx = ScalarField::sample(g, [](double x, double) { return x; }, Parity::odd, Parity::even);
    auto d = diff_x(fx, 1);
    for (std::size_t i = 0; i < g->nx(); ++i)
        for (std::size_t j = 0; j < g->nxi(); ++j) EXPECT_NEAR(d(i, j), 1.0, 1e-13);
    EXPECT_EQ(d.parity_x(), Parity::even);
    auto fx2 = ScalarField::sample(g, [](double x, double) { return x * x; });
    auto d2 = diff_x(fx2, 2);
    for (std::size_t k = 0; k < d2.size(); ++k) EXPECT_NEAR(d2[k], 2.0, 1e-12);
}

TEST(DiffX, SineConvergesAtSecondOrder) {
    auto err = [](std::size_t n) {
        auto g = WedgeGrid::linear(0.0, 3.0, n, 8);
        auto f = ScalarField::sample(g, [](double x, double) { return std::sin(x); });
        return max_err_interior(diff_x(f, 1), [](double x, double) { return std::cos(x); });
    };
    const double ratio = err(41) / err(81);
    EXPECT_NEAR(ratio, 4.0, 0.8);
}

TEST(DiffX, LogModeUsesChainRule) {
    auto g = WedgeGrid::log_strip(-1.0, 1.0, 81, 8);
    auto f = ScalarField::sample(g, [](double x, double) { return x * x * x; });
    auto d1 = diff_x(f, 1);
    auto d2 = diff_x(f, 2);
    EXPECT_LT(max_err_interior(d1, [](double x, double) { return 3 * x * x; }), 0.03);
    EXPECT_LT(max_err_interior(d2, [](double x, double) { return 6 * x; }), 0.03);
}

TEST(DiffXi, PolynomialsAreExact) {
    auto g = WedgeGrid::symmetric(1.0, 9, 16);
    auto f = ScalarField::sample(g, [](double, double xi) { return xi; }, Parity::even, Parity::odd);
    auto d = diff_xi(f, 1);
    for (std::size_t k = 0; k < d.size(); ++k) EXPECT_NEAR(d[k], 1.0, 1e-13);
    auto f2 = ScalarField::sample(g, [](double, double xi) { return xi * xi; });
    auto dd = diff_xi(f2, 2);
    for (std::size_t k = 0; k < dd.size(); ++k) EXPECT_NEAR(dd[k], 2.0, 1e-11);
}

TEST(DiffXi, CosineConvergesAtSecondOrder) {
    constexpr double pi = std::numbers::pi;
    auto err = [&](std::size_t cells) {
        auto g = WedgeGrid::symmetric(1.0, 9, cells);
        auto f = ScalarField::sample(g, [&](double, double xi) { return std::cos(pi * xi / 2); });
        return max_err_interior(diff_xi(f, 1), [&](double, double xi) {
            return -(pi / 2) * std::sin(pi * xi / 2);
        }, 0);
    };
    const double order = std::log2(err(32) / err(64));
    EXPECT_GT(order, 1.8);
    EXPECT_LT(order, 2.3);
}

TEST(Adapted, DxiOfXiSquaredIsTwoEverywhere) {
    auto g = WedgeGrid::symmetric(1.0, 9, 64);
    auto f = ScalarField::sample(g, [](double, double xi) { return xi * xi; }, Parity::even, Parity::even);
    auto d = adapted_Dxi(f);
    for (std::size_t k = 0; k < d.size(); ++k) EXPECT_NEAR(d[k], 2.0, 1e-10);
}

TEST(Adapted, ZxOfCubic) {
    auto g = WedgeGrid::symmetric(2.0, 41, 8);
    auto f = ScalarField::sample(g, [](double x, double) { return x * x * x; });
    auto z = adapted_Zx(f);
    EXPECT_LT(max_err_interior(z, [](double x, double) { return 3 * x * x * x; }), 0.05);
    auto gl = WedgeGrid::log_strip(-1.0, 1.0, 161, 8);
    auto fl = ScalarField::sample(gl, [](double x, double) { return x * x * x; });
    EXPECT_LT(max_err_interior(adapted_Zx(fl), [](double x, double) { return 3 * x * x * x; }), 0.03);
}

TEST(Adapted, DxiOfGaussianProfileAtHalf) {
    auto at_half = [](std::size_t cells) {
        auto g = WedgeGrid::symmetric(2.0, 9, cells);
        auto f = ScalarField::sample(g, [](double x, double xi) {
            return std::exp(-x * x) * (1 - xi * xi) * (1 - xi * xi);
        }, Parity::even, Parity::even);
        auto d = adapted_Dxi(f);
        // cell centres never hit 0.5 exactly; compare at the nearest node with its own oracle
        double e = 0.0;
        for (std::size_t j = 0; j < g->nxi(); ++j) {
            const double xi = g->xi(j);
            if (std::abs(xi - 0.5) <= g->h_xi()) {
                const double x = g->x(4);
                e = std::max(e, std::abs(d(4, j) + 4 * (1 - xi * xi) * std::exp(-x * x)));
            }
        }
        return e;
    };
    EXPECT_NEAR(at_half(32) / at_half(64), 4.0, 0.8);
}

TEST(Adapted, DxiRefusesOddFieldNearZero) {
    auto g = WedgeGrid::symmetric(1.0, 9, 16);
    auto f = ScalarField::sample(g, [](double, double xi) { return xi; }, Parity::even, Parity::odd);
    EXPECT_THROW(adapted_Dxi(f, 0.1), ParityError);
    EXPECT_NO_THROW(adapted_Dxi(f, 1e-6));
    auto e = ScalarField::sample(g, [](double, double xi) { return xi * xi; }, Parity::even, Parity::even);
    EXPECT_NO_THROW(adapted_Dxi(e, 0.1));
}

TEST(Adapted, DxiBoundedUnderRefinementForEvenField) {
    double prev = 0.0;
    for (std::size_t cells : {16u, 32u, 64u, 128u}) {
        auto g = WedgeGrid::symmetric(1.0, 9, cells);
        auto f = ScalarField::sample(g, [](double, double xi) { return std::cos(3 * xi); }, Parity::even,
                                     Parity::even);
        const double m = adapted_Dxi(f).max_abs();
        EXPECT_LT(m, 9.5);
        if (prev > 0) {
            EXPECT_NEAR(m, prev, 0.1 * prev);
        }
        prev = m;
    }
}

TEST(Parity, OddDerivativeOfEvenFieldIsOdd) {
    for (std::size_t n : {41u, 81u}) {
        auto g = WedgeGrid::symmetric(3.0, n, 8);
        auto f = ScalarField::sample(g, [](double x, double xi) { return std::exp(-x * x) * (1 + xi * xi); },
                                     Parity::even, Parity::even);
        auto d = diff_x(f, 1);
        EXPECT_EQ(d.parity_x(), Parity::odd);
        EXPECT_LT(d.parity_defect(), 10 * g->h_x() * g->h_x());
    }
}

TEST(Parity, ArithmeticPropagatesFlags) {
    auto g = WedgeGrid::symmetric(1.0, 9, 8);
    auto e = ScalarField::constant(g, 2.0);
    auto o = ScalarField::sample(g, [](double x, double) { return x; }, Parity::odd, Parity::even);
    EXPECT_EQ((o * o).parity_x(), Parity::even);
    EXPECT_EQ((e * o).parity_x(), Parity::odd);
    EXPECT_EQ((e + o).parity_x(), Parity::none);
    EXPECT_EQ((o + 1.0).parity_x(), Parity::none);
}

TEST(Field, RejectsNonFiniteInput) {
    auto g = WedgeGrid::symmetric(1.0, 9, 8);
    auto f = ScalarField::constant(g, 1.0);
    f(3, 3) = std::nan("");
    EXPECT_THROW(diff_x(f), NonFiniteError);
}

TEST(Field, CsvHeaderAndPrecision) {
    auto g = WedgeGrid::symmetric(1.0, 5, 4);
    auto f = ScalarField::constant(g, 1.0 / 3.0);
    std::ostringstream os;
    f.write_csv(os);
    const std::string s = os.str();
    EXPECT_EQ(s.rfind("x,xi,value\n", 0), 0u);
    EXPECT_NE(s.find("0.33333333333333331"), std::string::npos);
    EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 1 + 5 * 6);
}
