#include "test_util.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace propwing;

namespace {

WingPlanform example_wing() {
    WingPlanform p;
    p.semi_span = 0.8;
    p.chord_ctrl = {0.397, 0.33, 0.27, 0.202};
    p.twist_ctrl = {0.0, 0.01, -0.02, -0.03};
    return p;
}

}  // namespace

TEST(Planform, ConstantControlsGiveConstantChord) {
    WingPlanform p = testutil::rectangle(0.8, 0.3);
    for (double t = 0.0; t <= 1.0; t += 0.05) EXPECT_NEAR(eval_chord(p, t), 0.3, 1e-15);
}

TEST(Planform, EndpointsEqualEndControls) {
    const auto p = example_wing();
    EXPECT_DOUBLE_EQ(eval_chord(p, 0.0), 0.397);
    EXPECT_DOUBLE_EQ(eval_chord(p, 1.0), 0.202);
    EXPECT_DOUBLE_EQ(eval_twist(p, 1.0), -0.03);
}

TEST(Planform, OutOfRangeCoordinateRejected) {
    const auto p = example_wing();
    EXPECT_THROW(eval_chord(p, 1.2), ValidationError);
    EXPECT_THROW(eval_twist(p, -0.1), ValidationError);
}

TEST(Planform, MatchesDeCasteljau) {
    const auto p = example_wing();
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        const double t = u(rng);
        EXPECT_NEAR(p.chord(t), testutil::de_casteljau(p.chord_ctrl, t), 1e-15);
        EXPECT_NEAR(p.twist(t), testutil::de_casteljau(p.twist_ctrl, t), 1e-15);
    }
}

TEST(Planform, AreaOfRectangle) {
    EXPECT_NEAR(wing_area(testutil::rectangle(0.8, 0.3)), 0.48, 1e-15);
}

TEST(Planform, AreaMatchesSimpson) {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> c(0.05, 0.6);
    for (int trial = 0; trial < 100; ++trial) {
        WingPlanform p;
        p.semi_span = 0.8;
        p.chord_ctrl = {c(rng), c(rng), c(rng), c(rng)};
        const double simpson = 2.0 * testutil::simpson([&](double y) { return p.chord(y / 0.8); }, 0.0, 0.8, 200);
        EXPECT_LT(testutil::rel(p.area(), simpson), 1e-12);
    }
}

TEST(Planform, MacMatchesSimpson) {
    const auto p = example_wing();
    const double s2 = testutil::simpson([&](double y) { return p.chord(y / 0.8) * p.chord(y / 0.8); }, 0.0, 0.8, 400);
    EXPECT_LT(testutil::rel(p.mac(), 2.0 * s2 / p.area()), 1e-12);
}

TEST(Planform, NonPositiveChordRejected) {
    WingPlanform p = testutil::rectangle(0.8, 0.3);
    p.chord_ctrl = {0.3, -0.5, -0.5, 0.1};
    EXPECT_THROW(p.validate(), ValidationError);
    p = testutil::rectangle(0.0, 0.3);
    EXPECT_THROW(p.validate(), ValidationError);
}

TEST(ControlWing, TrapezoidReproducedExactly) {
    ControlWingSpec s;
    s.span = 1.6;
    s.area = 0.479;
    s.root_chord = 0.3970611204316054;
    s.tip_chord = trapezoid_tip_chord(s.span, s.area, s.root_chord);
    s.washout = units::deg(-2.0);
    const auto p = control_wing(s);
    EXPECT_LT(testutil::rel(p.area(), 0.479), 1e-12);
    EXPECT_NEAR(p.aspect_ratio(), 1.6 * 1.6 / 0.479, 1e-12);
    for (double t = 0.0; t <= 1.0; t += 0.1) {
        EXPECT_NEAR(p.chord(t), s.root_chord + t * (s.tip_chord - s.root_chord), 1e-15);
        EXPECT_NEAR(p.twist(t), t * s.washout, 1e-15);
    }
}

TEST(ControlWing, InconsistentAreaRejected) {
    ControlWingSpec s;
    s.span = 1.6;
    s.area = 0.5;
    s.root_chord = 0.4;
    s.tip_chord = 0.2;
    EXPECT_THROW(control_wing(s), ValidationError);
}

TEST(PlanformExport, HeaderAndStationCount) {
    const auto text = export_planform(example_wing());
    EXPECT_NE(text.find("y_m,chord_m,twist_deg\n"), std::string::npos);
    std::istringstream in(text);
    const auto t = csv::read(in, {"y_m", "chord_m", "twist_deg"});
    EXPECT_EQ(t.rows.size(), 101u);
    EXPECT_DOUBLE_EQ(t.rows.front()[0], 0.0);
    EXPECT_DOUBLE_EQ(t.rows.back()[0], 0.8);
}

TEST(PlanformExport, RoundTripWithinTolerance) {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> c(0.1, 0.5), tw(-0.1, 0.1);
    for (int trial = 0; trial < 50; ++trial) {
        WingPlanform p;
        p.semi_span = 0.8;
        p.chord_ctrl = {c(rng), c(rng), c(rng), c(rng)};
        p.twist_ctrl = {tw(rng), tw(rng), tw(rng), tw(rng)};
        std::istringstream in(export_planform(p));
        const auto q = import_planform(in);
        for (int i = 0; i <= 200; ++i) {
            const double t = i / 200.0;
            EXPECT_NEAR(q.chord(t), p.chord(t), 1e-6);
            EXPECT_NEAR(q.twist(t), p.twist(t), 1e-6);
        }
        EXPECT_EQ(q.chord_ctrl[0], p.chord_ctrl[0]);
        EXPECT_EQ(q.chord_ctrl[3], p.chord_ctrl[3]);
    }
}

TEST(Svg, PlanformOutlineClosedAboutQuarterChord) {
    const auto p = example_wing();
    const auto s = svg::planform_outline(p, "w", "#000");
    EXPECT_EQ(s.x.front(), s.x.back());
    EXPECT_EQ(s.y.front(), s.y.back());
    EXPECT_NEAR(s.y.front(), 0.25 * 0.397, 1e-15);
    EXPECT_NEAR(s.y[101], -0.75 * 0.202, 1e-15);
}

TEST(Svg, RenderIsDeterministic) {
    svg::Plot plot{"t", "x", "y", {{"a", {0, 1, 2}, {0, 1, 4}}}, false};
    const auto a = svg::render(plot), b = svg::render(plot);
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.rfind("<svg", 0), 0u);
    EXPECT_NE(a.find("</svg>"), std::string::npos);
}
