#include "test_util.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

using namespace propwing;

namespace {

Config parse(const std::string& text) {
    std::istringstream in(text);
    return Config::parse(in, "t.cfg");
}

/// Shipped case at reduced resolution and budget.
CaseConfig quick_case(const std::string& file) {
    auto k = load_case(testutil::case_file(file));
    k.settings = {80, 16};
    k.spec.max_evaluations = 1500;
    k.spec.max_restarts = 1;
    k.sweep_alpha = alpha_range_deg(-2, 2, 2);
    return k;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST(Config, SectionsCommentsAndValues) {
    const auto c = parse("# top\n[a]\nx = 1.5 # trailing\n; note\ny = text\n[b]\nx = 2\n");
    EXPECT_EQ(c.num("a.x"), 1.5);
    EXPECT_EQ(c.str("a.y"), "text");
    EXPECT_EQ(c.num("b.x"), 2.0);
    EXPECT_EQ(c.num("b.z", 7.0), 7.0);
    EXPECT_FALSE(c.opt_num("b.z").has_value());
}

TEST(Config, DuplicateKeyReportsLine) {
    try {
        parse("[a]\nx = 1\n\nx = 2\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 4);
    }
}

TEST(Config, MalformedLinesRejected) {
    EXPECT_THROW(parse("[a\n"), ParseError);
    EXPECT_THROW(parse("[a]\njust words\n"), ParseError);
    EXPECT_THROW(parse("[a]\nx = abc\n").num("a.x"), ValidationError);
    EXPECT_THROW(parse("[a]\nx = 1.5\n").integer("a.x", 0), ValidationError);
    EXPECT_THROW(parse("").str("a.x"), ValidationError);
}

TEST(Config, UnusedKeysTracked) {
    const auto c = parse("[a]\nx = 1\ny = 2\n");
    (void)c.num("a.x");
    EXPECT_EQ(c.unused_keys(), std::vector<std::string>{"a.y"});
}

TEST(Cases, AllShippedConfigsParse) {
    for (int i = 1; i <= 8; ++i) {
        const auto k = load_case(testutil::case_file("w" + std::to_string(i) + ".cfg"));
        EXPECT_EQ(k.name, "W" + std::to_string(i));
        EXPECT_NO_THROW(k.validate());
        EXPECT_DOUBLE_EQ(k.prop_y_frac, 0.30);
        EXPECT_NEAR(k.control.area, 0.479, 1e-12);
    }
}

TEST(Cases, ShippedCaseDefinitions) {
    const auto w1 = load_case(testutil::case_file("w1.cfg"));
    EXPECT_EQ(w1.spec.cost, CostKind::induced_drag);
    EXPECT_EQ(w1.spec.cl.mode, ClConstraint::Mode::fixed);
    const auto w6 = load_case(testutil::case_file("w6.cfg"));
    EXPECT_EQ(w6.spec.cost, CostKind::endurance);
    EXPECT_DOUBLE_EQ(w6.spec.cl.frac, 0.5);
    const auto w8 = load_case(testutil::case_file("w8.cfg"));
    EXPECT_NEAR(w8.control.washout, units::deg(-2.0), 1e-15);
}

TEST(Cases, TypoKeyIsValidationError) {
    auto text = slurp(testutil::case_file("w2.cfg"));
    text.replace(text.find("cl_target = 0.7"), 15, "cl_target = 0.7\ncl_targt = 0.7");
    std::istringstream cfg(text);
    try {
        case_from_config(Config::parse(cfg, "w2"));
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("optimizer.cl_targt"), std::string::npos);
    }
}

TEST(Cases, AlphaAndTrimAreExclusive) {
    auto text = slurp(testutil::case_file("w2.cfg"));
    text.replace(text.find("trim_cl = 0.7"), 13, "trim_cl = 0.7\nalpha_geo_deg = 0");
    std::istringstream cfg(text);
    EXPECT_THROW(case_from_config(Config::parse(cfg, "w2")), ValidationError);
}

TEST(Cases, MissingPolarIsStageTaggedIoErrorWithoutOutputs) {
    auto k = quick_case("w2.cfg");
    k.polar_path = "/nonexistent/polar.csv";
    const auto out = testutil::scratch_dir("missing_polar");
    try {
        run_case(k, out.string());
        FAIL();
    } catch (const IoError& e) {
        EXPECT_EQ(std::string(e.what()).rfind("case W2 [config]: ", 0), 0u) << e.what();
        EXPECT_EQ(e.exit_code(), ExitCode::io);
    }
    EXPECT_TRUE(std::filesystem::is_empty(out));
}

TEST(Cases, SolverFailureTaggedWithStage) {
    auto k = quick_case("w2.cfg");
    k.settings = {10, 20};  // more modes than collocation points
    try {
        prepare_case(k);
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("case W2 [trim]: "), std::string::npos) << e.what();
    }
}

TEST(Cases, ProvenanceRecorded) {
    const auto env = testutil::avion_environment();
    ASSERT_EQ(env.provenance.size(), 2u);
    EXPECT_NE(env.provenance[0].find("e423_re3e5.csv"), std::string::npos);
    EXPECT_NE(env.provenance[1].find("avion_slipstream.csv"), std::string::npos);
}

TEST(Cases, BemSlipstreamSourceMatchesBundledProfile) {
    auto k = load_case(testutil::case_file("w2.cfg"));
    k.slip.slipstream_path.clear();
    k.slip.propeller_path = testutil::data("apc11x7.csv");
    k.slip.section_polar_path = testutil::data("prop_section_re1e5.csv");
    k.slip.rpm = 9000.0;
    const auto env = prepare_case(k);
    const auto bundled = load_slipstream_file(testutil::data("avion_slipstream.csv"));
    ASSERT_TRUE(env.slip.has_value());
    ASSERT_EQ(env.slip->y().size(), bundled.y().size());
    for (std::size_t i = 0; i < bundled.y().size(); ++i) {
        EXPECT_NEAR(env.slip->y()[i], bundled.y()[i], 1e-12);
        EXPECT_NEAR(env.slip->u_axial()[i], bundled.u_axial()[i], 1e-9);
        EXPECT_NEAR(env.slip->w_down()[i], bundled.w_down()[i], 1e-9);
    }
}

TEST(Cases, PolarSweepWithPropAboveWithout) {
    const auto env = testutil::avion_environment();
    const auto files = run_polar_sweep(env.control, env, {0.0}, {80, 16});
    std::istringstream a(files.with_prop), b(files.without_prop);
    const auto ta = csv::read(a, {"alpha_deg", "CL", "CDi", "Cf", "CD"});
    const auto tb = csv::read(b, {"alpha_deg", "CL", "CDi", "Cf", "CD"});
    EXPECT_GE(ta.rows[0][1], tb.rows[0][1]);
    EXPECT_EQ(files.with_prop, run_polar_sweep(env.control, env, {0.0}, {80, 16}).with_prop);
    EXPECT_THROW(run_polar_sweep(env.control, env, {}), ValidationError);
}

TEST(Cases, RunCaseWritesArtifactsAndRoundTrips) {
    const auto k = quick_case("w2.cfg");
    const auto out = testutil::scratch_dir("run_case");
    const auto r = run_case(k, out.string());
    const auto dir = out / k.output_dir;
    for (const char* f : {"planform_control.csv", "planform_opt.csv", "planform.svg", "twist.svg",
                          "circulation_control.csv", "circulation_opt.csv", "circulation.svg",
                          "polar_control_prop.csv", "polar_control_noprop.csv", "polar_opt_prop.csv",
                          "polar_opt_noprop.csv", "history.csv", "report.txt"}) {
        EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
    }
    EXPECT_EQ(r.artifacts.size(), 13u);

    // Re-solve the exported optimum.
    std::ifstream in(dir / "planform_opt.csv");
    const auto p = import_planform(in);
    const auto env = prepare_case(k);
    FlightCondition c = env.cond;
    c.alpha_geo = p.alpha_geo;
    const auto sol = solve(p, *env.polar, env.slip_ptr(), c, k.settings);
    EXPECT_LT(testutil::rel(sol.CL, r.optimized.CL), 1e-6);
    EXPECT_LT(testutil::rel(sol.CDi, r.optimized.CDi), 1e-6);
    EXPECT_LT(testutil::rel(sol.Cf, r.optimized.Cf), 1e-6);
    EXPECT_LT(testutil::rel(sol.CD, r.optimized.CD), 1e-6);

    const auto report = slurp(dir / "report.txt");
    EXPECT_NE(report.find("[computed]"), std::string::npos);
    EXPECT_NE(report.find("[reference]"), std::string::npos);
    EXPECT_NE(report.find("# data polar: e423_re3e5.csv"), std::string::npos);
    EXPECT_EQ(slurp(dir / "history.csv").rfind("iter,cost,cl,cdi,cf,cd,violation\n", 0), 0u);
}

TEST(Cases, ReportMatchesReturnedMetrics) {
    const auto k = quick_case("w1.cfg");
    const auto r = run_case(k, "");
    std::istringstream in(r.files.at("report.txt"));
    const auto cfg = Config::parse(in, "report");
    EXPECT_EQ(cfg.num("optimized.cd"), r.optimized.CD);
    EXPECT_EQ(cfg.num("control.cl"), r.control.CL);
    EXPECT_EQ(cfg.num("computed.d_cd_pct"), r.deltas.d_cd_pct);
    EXPECT_EQ(cfg.str("case.converged"), r.converged ? "true" : "false");
}

TEST(CtSweepCsv, HeaderAndRange) {
    auto sec = std::make_shared<const AerofoilPolar>(
        load_polar_file(testutil::data("prop_section_re1e5.csv"), "s", 1e5));
    const auto g = load_propeller_file(testutil::data("da4002.csv"), sec);
    const auto s = run_ct_sweep(g, 5000.0, 3.8, 17.15, 5);
    EXPECT_NE(s.csv.find("J,CT,V_mps\n"), std::string::npos);
    EXPECT_NEAR(s.j.front(), 0.2, 0.01);
    EXPECT_NEAR(s.j.back(), 0.9, 0.01);
    EXPECT_EQ(s.svg.rfind("<svg", 0), 0u);
}
