#include "test_util.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace propwing;

namespace {

AerofoilPolar from_text(const std::string& text) {
    std::istringstream in(text);
    return load_polar(in, "t", 3e5);
}

const char* four_rows = "alpha_deg,cl,cd\n-5,0.6,0.02\n0,1.0,0.015\n5,1.4,0.016\n10,1.7,0.02\n";

}  // namespace

TEST(LoadPolar, FourRowsIngested) {
    const auto p = from_text(four_rows);
    EXPECT_EQ(p.size(), 4u);
    EXPECT_DOUBLE_EQ(p.cl()[1], 1.0);
    EXPECT_DOUBLE_EQ(p.cd()[2], 0.016);
}

TEST(LoadPolar, ThreeRowsRejected) {
    EXPECT_THROW(from_text("alpha_deg,cl,cd\n-5,0.6,0.02\n0,1.0,0.015\n5,1.4,0.016\n"), ValidationError);
}

TEST(LoadPolar, DuplicateAngleRejectedWithLine) {
    try {
        from_text("alpha_deg,cl,cd\n-5,0.6,0.02\n0,1.0,0.015\n0,1.1,0.015\n5,1.4,0.016\n");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 4);
    }
}

TEST(LoadPolar, MalformedRowReportsLine) {
    try {
        from_text("# comment\nalpha_deg,cl,cd\n-5,0.6,0.02\n0,abc,0.015\n5,1.4,0.016\n10,1.7,0.02\n");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 4);
    }
}

TEST(LoadPolar, WrongHeaderRejected) {
    EXPECT_THROW(from_text("alpha,cl,cd\n-5,0.6,0.02\n0,1.0,0.015\n5,1.4,0.016\n10,1.7,0.02\n"), ParseError);
}

TEST(LoadPolar, RowsSortedByAngle) {
    const auto p = from_text("alpha_deg,cl,cd\n5,1.4,0.016\n-5,0.6,0.02\n10,1.7,0.02\n0,1.0,0.015\n");
    EXPECT_EQ(p.alpha_deg(), (std::vector<double>{-5, 0, 5, 10}));
    EXPECT_DOUBLE_EQ(p.cl()[0], 0.6);
}

TEST(LoadPolar, NonPositiveDragRejected) {
    EXPECT_THROW(from_text("alpha_deg,cl,cd\n-5,0.6,0.02\n0,1.0,0\n5,1.4,0.016\n10,1.7,0.02\n"), ValidationError);
}

TEST(FitBlf, ExactLineRecovered) {
    std::vector<double> a, cl, cd;
    for (double d = -6; d <= 14; d += 0.5) {
        a.push_back(d);
        cl.push_back(0.1097 * d + 0.6);
        cd.push_back(0.01 + 1e-4 * d * d);
    }
    const AerofoilPolar p("line", 3e5, a, cl, cd);
    const auto m = fit_blf(p, {-2.5, 10.0});
    EXPECT_LT(testutil::rel(m.a0, 0.1097 * units::rad_to_deg), 1e-10);
    EXPECT_NEAR(m.a0, 6.285, 0.001);
    EXPECT_LT(testutil::rel(m.alpha0, (-0.6 / 0.1097) * units::deg_to_rad), 1e-10);
    EXPECT_NEAR(m.alpha0 * units::rad_to_deg, -5.47, 0.01);
}

TEST(FitBlf, ConstantLiftIsFitError) {
    const AerofoilPolar p("flat", 3e5, {-4, -2, 0, 2, 4, 6}, {0.5, 0.5, 0.5, 0.5, 0.6, 0.8},
                          {0.02, 0.02, 0.02, 0.02, 0.015, 0.01});
    EXPECT_THROW(fit_blf(p, {-4, 2}), FitError);
}

TEST(FitBlf, TooFewSamplesIsFitError) {
    const auto p = from_text(four_rows);
    EXPECT_THROW(fit_blf(p, {-1.0, 4.0}), FitError);
}

TEST(FitBlf, WindowOutsideDataIsFitError) {
    const auto p = from_text(four_rows);
    EXPECT_THROW(fit_blf(p, {-8.0, 4.0}), FitError);
    EXPECT_THROW(fit_blf(p, {4.0, -4.0}), FitError);
}

TEST(FitBlf, BundledE423MatchesNormalEquations) {
    const auto p = load_polar_file(testutil::data("e423_re3e5.csv"), "e423", 3e5);
    const auto m = fit_blf(p, {-2.5, 10.0});
    std::vector<double> x, y;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p.alpha_deg()[i] >= -2.5 && p.alpha_deg()[i] <= 10.0) {
            x.push_back(p.alpha_deg()[i] * units::pi / 180.0);
            y.push_back(p.cl()[i]);
        }
    }
    const auto [slope, intercept] = testutil::normal_equations_line(x, y);
    EXPECT_LT(testutil::rel(m.a0, slope), 1e-10);
    EXPECT_LT(testutil::rel(m.alpha0, -intercept / slope), 1e-10);
}

TEST(ClOfAlpha, ThinAerofoilIdentity) {
    const auto p = from_text(four_rows).with_blf(LinearLiftModel{2.0 * units::pi, 0.0, {-5.0, 10.0}});
    EXPECT_NEAR(p.cl_of_alpha(0.1, LiftMode::blf), 0.6283185307179586, 1e-15);
}

TEST(ClOfAlpha, BlfModeWithoutFitThrows) {
    const auto p = from_text(four_rows);
    EXPECT_THROW(p.cl_of_alpha(0.1, LiftMode::blf), ValidationError);
}

TEST(ClOfAlpha, TabulatedNodeMidpointAndExtrapolation) {
    const auto p = from_text(four_rows);
    EXPECT_DOUBLE_EQ(p.cl_of_alpha(units::deg(5.0), LiftMode::tabulated), 1.4);
    EXPECT_NEAR(p.cl_of_alpha(units::deg(2.5), LiftMode::tabulated), 1.2, 1e-12);
    // Beyond the ends the end panels' slopes continue.
    EXPECT_NEAR(p.cl_of_alpha(units::deg(15.0), LiftMode::tabulated), 1.7 + 0.06 * 5.0, 1e-12);
    EXPECT_NEAR(p.cl_of_alpha(units::deg(-10.0), LiftMode::tabulated), 0.6 - 0.08 * 5.0, 1e-12);
}

TEST(CdOfCl, NodeAndMidpoint) {
    const auto p = from_text(four_rows);
    EXPECT_DOUBLE_EQ(p.cd_of_cl(1.0), 0.015);
    EXPECT_DOUBLE_EQ(p.cd_of_cl(1.4), 0.016);
    EXPECT_NEAR(p.cd_of_cl(1.2), 0.0155, 1e-15);
}

TEST(CdOfCl, QuadraticExtrapolationFromHandSlopes) {
    const auto p = from_text(four_rows);
    // Last three branch nodes (1.0, 0.015), (1.4, 0.016), (1.7, 0.02).
    const double s1 = (0.016 - 0.015) / 0.4;
    const double s2 = (0.02 - 0.016) / 0.3;
    const double k = std::abs((s2 - s1) / (1.7 - 1.0));
    EXPECT_NEAR(p.extrapolation_coefficient_high(), k, 1e-15);
    EXPECT_NEAR(p.cd_of_cl(1.9), 0.02 + k * 0.04, 1e-15);
}

TEST(CdOfCl, BranchExcludesPostStall) {
    const auto p = load_polar_file(testutil::data("e423_re3e5.csv"), "e423", 3e5);
    const auto [lo, hi] = p.drag_branch();
    EXPECT_EQ(p.alpha_deg()[lo], -6.0);
    EXPECT_EQ(p.alpha_deg()[hi], 13.0);  // cl peaks at 13 deg
}

TEST(PolarProperties, TabulatedLiftWithinBracket) {
    const auto p = load_polar_file(testutil::data("e423_re3e5.csv"), "e423", 3e5);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(p.alpha_deg().front(), p.alpha_deg().back());
    for (int trial = 0; trial < 2000; ++trial) {
        const double a = u(rng);
        const auto i = static_cast<std::size_t>(
            std::upper_bound(p.alpha_deg().begin(), p.alpha_deg().end(), a) - p.alpha_deg().begin() - 1);
        const std::size_t j = std::min(i + 1, p.size() - 1);
        const double cl = p.cl_of_alpha(a * units::deg_to_rad, LiftMode::tabulated);
        EXPECT_GE(cl, std::min(p.cl()[i], p.cl()[j]) - 1e-12);
        EXPECT_LE(cl, std::max(p.cl()[i], p.cl()[j]) + 1e-12);
    }
}

TEST(PolarProperties, DragContinuousAtBranchEnds) {
    const auto p = load_polar_file(testutil::data("e423_re3e5.csv"), "e423", 3e5);
    const auto [lo, hi] = p.drag_branch();
    for (std::size_t i : {lo, hi}) {
        const double c = p.cl()[i];
        EXPECT_LT(std::abs(p.cd_of_cl(std::nextafter(c, -10.0)) - p.cd_of_cl(std::nextafter(c, 10.0))), 1e-12);
        EXPECT_NEAR(p.cd_of_cl(c), p.cd()[i], 1e-15);
    }
}

TEST(PolarProperties, ExtrapolatedDragNotBelowEndValue) {
    const auto p = load_polar_file(testutil::data("e423_re3e5.csv"), "e423", 3e5);
    const auto [lo, hi] = p.drag_branch();
    for (double d = 0.0; d < 2.0; d += 0.01) {
        EXPECT_GE(p.cd_of_cl(p.cl()[lo] - d), p.cd()[lo]);
        EXPECT_GE(p.cd_of_cl(p.cl()[hi] + d), p.cd()[hi]);
    }
}

TEST(PolarProperties, ExactLineFitRandomised) {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> slope(0.05, 0.15), icpt(-0.5, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const double m = slope(rng), b = icpt(rng);
        std::vector<double> a, cl, cd;
        for (int d = -8; d <= 16; ++d) {
            a.push_back(d);
            cl.push_back(m * d + b);
            cd.push_back(0.02);
        }
        const auto fit = fit_blf(AerofoilPolar("r", 1e5, a, cl, cd), {-3.0, 9.0});
        EXPECT_LT(testutil::rel(fit.a0, m * units::rad_to_deg), 1e-10);
        EXPECT_LT(testutil::rel(fit.alpha0, -b / m * units::deg_to_rad), 1e-10);
    }
}
