#include <gtest/gtest.h>

#include <cmath>

#include "wedgelab/reduction.hpp"
#include "wedgelab/verify.hpp"

using namespace wedgelab;

namespace {

double order(double coarse, double fine) { return std::log2(coarse / fine); }

GridPtr polar(std::size_t n) { return WedgeGrid::linear(0.5, 2.0, n + 1, n / 2); }
GridPtr strip(std::size_t n) { return WedgeGrid::log_strip(-4, 3, n + 1, n / 2); }

} // namespace

TEST(QuotientPoint, StationaryExactSolutionHasZeroResidual) {
    // u = v = g = 0 and constant p solve the quotient system exactly
    CartesianBundle b;
    auto zero = [](double, double) { return 0.0; };
    b.u = b.v = b.g = b.ut = b.vt = b.gt = zero;
    b.p = [](double, double) { return 3.0; };
    const auto r = quotient_residual_point(b, 0.7, 0.4, 1e-3, Scalings{});
    for (double x : r.r) EXPECT_EQ(x, 0.0);
}

TEST(QuotientPoint, HandValueOfReactionTerms) {
    // constant fields: only reaction and time terms remain
    CartesianBundle b;
    b.u = [](double, double) { return 2.0; };
    b.v = [](double, double) { return 3.0; };
    b.g = [](double, double) { return 5.0; };
    b.p = [](double, double) { return 0.0; };
    b.ut = b.vt = b.gt = [](double, double) { return 1.0; };
    const auto r = quotient_residual_point(b, 1.0, 1.0, 1e-2, Scalings{1.0, 1.0});
    EXPECT_DOUBLE_EQ(r.r[0], 1.0 - 3.0);
    EXPECT_DOUBLE_EQ(r.r[1], 1.0 - 9.0 + 4.0);
    EXPECT_DOUBLE_EQ(r.r[2], 1.0 + 25.0);
    EXPECT_DOUBLE_EQ(r.r[3], 5.0 - 3.0);
}

TEST(BoussinesqQuotient, WeightedResidualsAgreeAtOrderTwo) {
    const auto b = smooth_bundle();
    double e[3];
    int k = 0;
    for (std::size_t n : {64, 128, 256}) e[k++] = boussinesq_quotient_defect(b, WedgeGrid::box(0.5, 1.5, n + 1, 0.5, 1.5, n + 1), 2);
    EXPECT_NEAR(order(e[0], e[1]), 2.0, 0.3);
    EXPECT_NEAR(order(e[1], e[2]), 2.0, 0.3);
}

TEST(BoussinesqQuotient, RequiresBoxGrid) {
    EXPECT_THROW(boussinesq_quotient_defect(smooth_bundle(), polar(32), 2), ConfigError);
}

TEST(QuotientPolar, DerivedTranscriptionConvergesForBothScalings) {
    const auto b = smooth_bundle();
    for (const Scalings sc : {Scalings{}, Scalings{1.0, 1.0}}) {
        double e[3];
        int k = 0;
        for (std::size_t n : {64, 128, 256}) e[k++] = quotient_polar_defect(b, polar(n), sc, Transcription::derived, 2);
        EXPECT_NEAR(order(e[0], e[1]), 2.0, 0.3);
        EXPECT_NEAR(order(e[1], e[2]), 2.0, 0.3);
    }
}

TEST(QuotientPolar, PrintedTranscriptionDoesNotConverge) {
    const auto b = smooth_bundle();
    const double c = quotient_polar_defect(b, polar(64), Scalings{}, Transcription::printed, 2);
    const double f = quotient_polar_defect(b, polar(256), Scalings{}, Transcription::printed, 2);
    EXPECT_GT(f, 0.5 * c);
    EXPECT_GT(f, 0.1);
}

TEST(StreamDivergence, DerivedFormIsDiscretelyExactForCorpus) {
    for (const auto& pr : corpus()) {
        const auto g = strip(64);
        const auto psi = pr.sample(g);
        EXPECT_LE(stream_divergence(psi).max_abs(), 1e-12 * std::max(1.0, psi.max_abs())) << pr.name;
    }
}

TEST(StreamDivergence, PrintedFormFails) {
    const auto g = strip(128);
    EXPECT_GT(stream_divergence(corpus()[0].sample(g), Transcription::printed).max_abs_interior(3), 0.1);
}

TEST(StreamDivergence, JetIdentityIsMachineZero) {
    auto psi = [](auto r, auto z) { return sin(r * z) + exp(-1.0 * r * r) * z * z * z; };
    for (double r : {0.1, 0.7, 1.9})
        for (double z : {-0.8, 0.2, 1.3}) EXPECT_NEAR(jet_divergence_identity(psi, r, z), 0.0, 1e-14);
}

namespace {

struct SplitSetup {
    PolarFields bg, rem;
};

SplitSetup split_setup(const GridPtr& g) {
    const auto b = smooth_bundle();
    SeedParams s;
    const auto bgf = sample_background(s, g, 0.4);
    PolarFields bg = sample_polar(b, g);
    bg.u = bgf.U;
    bg.v = bgf.V;
    bg.g = bgf.G;
    const auto rf = sample_polar(b, g);
    return {bg, PolarFields{rf.v * 0.2, rf.u * 0.5, rf.g * -0.3, rf.p * 2.0, rf.vt, rf.gt, rf.ut}};
}

} // namespace

TEST(RemainderSplit, CorrectedN1IsExact) {
    const auto su = split_setup(polar(64));
    EXPECT_LT(remainder_split_defect(su.bg, su.rem, Scalings{}, N1Form::corrected), 1e-13);
    EXPECT_LT(remainder_split_defect(su.bg, su.rem, Scalings{1.0, 1.0}, N1Form::corrected), 1e-13);
}

TEST(RemainderSplit, PrintedN1BreaksTheSplit) {
    const auto su = split_setup(polar(64));
    EXPECT_GT(remainder_split_defect(su.bg, su.rem, Scalings{}, N1Form::printed), 1e-6);
}

TEST(PressureRecovery, CorrectedL2GivesOrderTwoMixedPartials) {
    double e[3];
    int k = 0;
    for (std::size_t n : {64, 128, 256}) e[k++] = pressure_mixed_partial_defect(strip(n), PressureCheckSetup{}, L2Form::corrected, 3);
    EXPECT_NEAR(order(e[0], e[1]), 2.0, 0.3);
    EXPECT_NEAR(order(e[1], e[2]), 2.0, 0.3);
}

PressureCheckSetup second_setup() {
    PressureCheckSetup su;
    su.seeds.r_def = RDef::aniso_trig;
    su.seeds.shape = SeedShape::cubic_r3;
    su.t = 0.1;
    su.u_profile = "x2-wide-q2-b05";
    su.psi_profile = "x4-q2";
    su.ext = GExtension::zero_blend;
    return su;
}

TEST(PressureRecovery, SecondSetupConvergesAwayFromRidgeBoundary) {
    const auto su = second_setup();
    double e[3];
    int k = 0;
    for (std::size_t n : {64, 128, 256}) e[k++] = pressure_mixed_partial_defect(strip(n), su, L2Form::corrected, 3, 0.75);
    EXPECT_NEAR(order(e[0], e[1]), 2.0, 0.3);
    EXPECT_NEAR(order(e[1], e[2]), 2.0, 0.3);
}

TEST(PressureRecovery, SecondOrderVanishingPsiLeavesNodeWideLayerAtBoundary) {
    // the full-margin defect stalls and peaks next to ξ = ±1
    const auto su = second_setup();
    const double c = pressure_mixed_partial_defect(strip(64), su, L2Form::corrected, 3);
    const double f = pressure_mixed_partial_defect(strip(256), su, L2Form::corrected, 3);
    EXPECT_GT(f, 0.5 * c);
    const auto g = strip(256);
    const ScalarField d = pressure_mixed_partial_field(g, su, L2Form::corrected);
    double edge = 0, inner = 0;
    for (std::size_t i = 3; i + 3 < g->nx(); ++i)
        for (std::size_t j = 3; j + 3 < g->nxi(); ++j)
        {
            double& m = std::abs(g->xi(j)) > 0.9 ? edge : inner;
            m = std::max(m, std::abs(d(i, j)));
        }
    EXPECT_GT(edge, 10 * inner);
}

TEST(PressureRecovery, PrintedL2LeavesOrderOneDefect) {
    const double c = pressure_mixed_partial_defect(strip(64), PressureCheckSetup{}, L2Form::printed, 3);
    const double f = pressure_mixed_partial_defect(strip(256), PressureCheckSetup{}, L2Form::printed, 3);
    EXPECT_GT(f, 0.5 * c);
}

TEST(Compatibility, MatchesHandValueAtUnitRadius) {
    // at ξ0 = 1, x = 1: r = 1, V0 = A/8, xU0_x = −B/16, so λ∂_t U_ξ = AB/128
    for (auto [A, B] : {std::pair{6.0, 1.0}, std::pair{2.0, 0.5}}) {
        SeedParams s;
        s.A = A;
        s.B = B;
        s.r_def = RDef::aniso_poly;
        s.A1 = 0.25;
        s.m = 2;
        for (double xi0 : {1.0, -1.0}) {
            const auto r = compatibility_check(s, 1.0, xi0);
            EXPECT_NEAR(r.lhs, xi0 * A * B / 128, 1e-7);
            EXPECT_NEAR(r.rhs_reduced, xi0 * A * B / 128, 1e-9);
            EXPECT_TRUE(r.flat_ok);
            EXPECT_TRUE(r.match_ok);
            EXPECT_TRUE(r.nonzero);
            EXPECT_NEAR(r.closed_form_rate, 0.0, 1e-8);
        }
    }
}

TEST(Compatibility, FlatnessFailsForLinearPower) {
    // m = 1 leaves U_ξξ ≠ 0 on the ridge for the anisotropic seed
    SeedParams s;
    s.r_def = RDef::aniso_poly;
    s.A1 = 0.25;
    s.m = 1;
    EXPECT_FALSE(compatibility_check(s, 1.0, 1.0).flat_ok);
}

TEST(VerifySuite, DefaultRunPassesAndReportsDiscrepancies) {
    VerifyConfig cfg;
    const auto rep = run_verify(cfg);
    EXPECT_TRUE(rep.all_pass());
    EXPECT_GE(rep.discrepancies.size(), 5u);
    for (const auto& r : rep.rows) EXPECT_TRUE(r.pass) << r.check_name;
}

TEST(VerifySuite, BrokenN1FailsTheSplit) {
    VerifyConfig cfg;
    cfg.grid = 32;
    cfg.n1 = N1Form::printed;
    const auto rep = run_verify(cfg);
    ASSERT_FALSE(rep.all_pass());
    EXPECT_NE(std::find(rep.failed.begin(), rep.failed.end(), "remainder_split"), rep.failed.end());
}

TEST(VerifySuite, ConfigValidation) {
    VerifyConfig cfg;
    cfg.grid = 30;
    EXPECT_THROW(run_verify(cfg), ConfigError);
    cfg.grid = 64;
    cfg.omega_probe = "nope";
    EXPECT_THROW(run_verify(cfg), ConfigError);
}
