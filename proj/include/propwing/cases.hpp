#pragma once

// Case runner: control wing, environment, optimisation and artifact export
// driven by one configuration file per case.

#include "propwing/config.hpp"
#include "propwing/csv.hpp"
#include "propwing/errors.hpp"
#include "propwing/llt.hpp"
#include "propwing/optimizer.hpp"
#include "propwing/planform.hpp"
#include "propwing/polar.hpp"
#include "propwing/slipstream.hpp"
#include "propwing/svg.hpp"
#include "propwing/units.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace propwing {

/// Re-throws the active exception with `context` prepended, keeping the
/// exit-code family of the original error.
[[noreturn]] inline void rethrow_with_context(const std::string& context) {
    try {
        throw;
    } catch (const IoError& e) {
        throw IoError(context + e.what());
    } catch (const ValidationError& e) {
        throw ValidationError(context + e.what());
    } catch (const Error& e) {
        throw SolverError(context + e.what());
    }
}

/// Runs `f`, tagging any library error with the case name and stage.
template <class F>
auto staged(const std::string& case_name, const char* stage, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const Error&) {
        rethrow_with_context("case " + case_name + " [" + stage + "]: ");
    }
}

inline std::vector<double> parse_list(const std::string& text, const std::string& what) {
    std::vector<double> out;
    for (auto part : csv::split(text)) out.push_back(csv::parse_double_or_throw(part, what));
    return out;
}

struct SlipstreamSource {
    // Tabulated profile, used when set.
    std::string slipstream_path;
    // Otherwise generated by BEM from a propeller geometry.
    std::string propeller_path;
    std::string section_polar_path;
    double section_reynolds = 1e5;
    double rpm = 0.0;
    RotationSense rotation = RotationSense::up_inboard;
    double station_x = 1.0;  // diameters downstream
};

struct CaseConfig {
    std::string name = "custom";
    std::string description;
    ControlWingSpec control;
    std::optional<double> trim_cl;  // when set, alpha_geo trims the control wing to this CL
    FlightCondition cond;
    std::string polar_path;
    double polar_reynolds = 3e5;
    std::array<double, 2> blf_window_deg{-2.5, 10.0};
    SlipstreamSource slip;  // both paths empty: no propeller
    double prop_y_frac = 0.30;
    OptimisationSpec spec;
    LltSettings settings;
    std::vector<double> sweep_alpha;  // rad
    std::vector<std::pair<std::string, double>> reference;  // published values for comparison
    std::string output_dir;  // relative to the run's output root

    void validate() const {
        if (!(prop_y_frac > 0.0 && prop_y_frac < 1.0)) throw ValidationError("prop_y_frac must lie in (0, 1)");
        if (polar_path.empty()) throw ValidationError("no polar file configured");
        if (sweep_alpha.empty()) throw ValidationError("empty angle-of-attack sweep range");
        for (const auto& p : {polar_path, slip.slipstream_path, slip.propeller_path, slip.section_polar_path}) {
            if (!p.empty() && !std::filesystem::exists(p)) throw IoError("input file '" + p + "' does not exist");
        }
        if (slip.slipstream_path.empty() && !slip.propeller_path.empty()) {
            if (slip.section_polar_path.empty()) throw ValidationError("propeller needs a section polar");
            if (!(slip.rpm > 0.0)) throw ValidationError("propeller rpm must be positive");
        }
    }
};

inline CostKind parse_cost(const std::string& s) {
    if (s == "induced_drag") return CostKind::induced_drag;
    if (s == "total_drag") return CostKind::total_drag;
    if (s == "endurance") return CostKind::endurance;
    throw ValidationError("unknown cost '" + s + "' (induced_drag, total_drag, endurance)");
}

inline RotationSense parse_rotation(const std::string& s) {
    if (s == "up_inboard") return RotationSense::up_inboard;
    if (s == "up_outboard") return RotationSense::up_outboard;
    throw ValidationError("unknown rotation '" + s + "' (up_inboard, up_outboard)");
}

inline CaseConfig case_from_config(const Config& c) {
    CaseConfig k;
    k.name = c.str("case.name");
    k.description = c.str("case.description", "");
    k.output_dir = c.str("case.output", k.name);

    k.control.span = c.num("control.span_m");
    k.control.area = c.num("control.area_m2");
    k.control.root_chord = c.num("control.root_chord_m");
    k.control.tip_chord =
        c.num("control.tip_chord_m", trapezoid_tip_chord(k.control.span, k.control.area, k.control.root_chord));
    k.control.washout = units::deg(c.num("control.washout_deg", 0.0));
    k.control.sweep_le = units::deg(c.num("control.sweep_le_deg", 0.0));
    const bool has_alpha = c.has("control.alpha_geo_deg");
    k.trim_cl = c.opt_num("control.trim_cl");
    if (has_alpha == k.trim_cl.has_value()) {
        throw ValidationError(c.origin() + ": give exactly one of control.alpha_geo_deg and control.trim_cl");
    }
    if (has_alpha) k.control.alpha_geo = units::deg(c.num("control.alpha_geo_deg"));

    k.cond.v_inf = c.num("flight.v_inf_mps");
    k.cond.rho = c.num("flight.rho_kgm3");
    k.cond.reynolds_ref = c.num("flight.reynolds", 3e5);

    k.polar_path = c.path("environment.polar");
    k.polar_reynolds = c.num("environment.polar_reynolds", k.cond.reynolds_ref);
    if (c.has("environment.blf_window_deg")) {
        const auto w = parse_list(c.str("environment.blf_window_deg"), "environment.blf_window_deg");
        if (w.size() != 2) throw ValidationError("environment.blf_window_deg needs two values");
        k.blf_window_deg = {w[0], w[1]};
    }
    k.prop_y_frac = c.num("environment.prop_y_frac", 0.30);
    if (c.has("environment.slipstream")) k.slip.slipstream_path = c.path("environment.slipstream");
    if (c.has("environment.propeller")) {
        k.slip.propeller_path = c.path("environment.propeller");
        k.slip.section_polar_path = c.path("environment.prop_section_polar");
        k.slip.section_reynolds = c.num("environment.prop_section_reynolds", 1e5);
        k.slip.rpm = c.num("environment.prop_rpm");
        k.slip.rotation = parse_rotation(c.str("environment.rotation", "up_inboard"));
        k.slip.station_x = c.num("environment.station_x_diameters", 1.0);
    }

    auto& s = k.spec;
    s.cost = parse_cost(c.str("optimizer.cost"));
    const std::string mode = c.str("optimizer.cl_mode", "fixed");
    const double target = c.num("optimizer.cl_target");
    if (mode == "fixed") {
        s.cl = ClConstraint::fixed(target);
    } else if (mode == "band") {
        s.cl = ClConstraint::band(target, c.num("optimizer.cl_band_frac"));
    } else {
        throw ValidationError("unknown cl_mode '" + mode + "' (fixed, band)");
    }
    s.twist_bounds = {units::deg(c.num("optimizer.twist_min_deg", -8.0)),
                      units::deg(c.num("optimizer.twist_max_deg", 8.0))};
    s.chord_bounds = {c.num("optimizer.chord_min_m", 0.05), c.num("optimizer.chord_max_m", 0.6)};
    s.max_evaluations = c.integer("optimizer.max_evaluations", s.max_evaluations);
    s.max_outer_iters = c.integer("optimizer.max_outer_iters", s.max_outer_iters);
    s.max_restarts = c.integer("optimizer.max_restarts", s.max_restarts);
    s.tolerance = c.num("optimizer.tolerance", s.tolerance);
    s.step_tolerance = c.num("optimizer.step_tolerance", s.step_tolerance);
    s.initial_step = c.num("optimizer.initial_step", s.initial_step);

    k.settings.n_collocation = c.integer("llt.n_collocation", k.settings.n_collocation);
    k.settings.n_modes = c.integer("llt.n_modes", k.settings.n_modes);
    k.sweep_alpha = alpha_range_deg(c.num("sweep.alpha_min_deg", -6.0), c.num("sweep.alpha_max_deg", 10.0),
                                    c.num("sweep.alpha_step_deg", 1.0));

    for (const char* key : {"cl", "cdi", "cf", "cd", "alpha_geo_deg", "d_cl_pct", "d_cdi_pct", "d_cf_pct",
                            "d_cd_pct", "d_endurance_pct"}) {
        const std::string full = std::string("reference.") + key;
        if (c.has(full)) k.reference.emplace_back(key, c.num(full));
    }
    if (const auto unused = c.unused_keys(); !unused.empty()) {
        throw ValidationError(c.origin() + ": unknown key '" + unused.front() + "'");
    }
    return k;
}

inline CaseConfig load_case(const std::string& path) { return case_from_config(Config::load(path)); }

/// Loaded aerodynamic inputs shared by every stage of a case.
struct CaseEnvironment {
    std::shared_ptr<const AerofoilPolar> polar;
    std::optional<SlipstreamProfile> slip;
    WingPlanform control;
    FlightCondition cond;  // alpha_geo resolved
    std::vector<std::string> provenance;
    std::vector<std::string> warnings;

    const SlipstreamProfile* slip_ptr() const { return slip ? &*slip : nullptr; }
};

inline std::string file_name(const std::string& path) { return std::filesystem::path(path).filename().string(); }

/// Reads every input file and resolves the operating point. Performs no output.
inline CaseEnvironment prepare_case(const CaseConfig& k) {
    CaseEnvironment env;
    staged(k.name, "config", [&] { k.validate(); });
    env.polar = staged(k.name, "polar", [&] {
        auto p = load_polar_file(k.polar_path, file_name(k.polar_path), k.polar_reynolds);
        return std::make_shared<const AerofoilPolar>(p.with_blf(fit_blf(p, k.blf_window_deg)));
    });
    env.provenance.push_back("polar: " + file_name(k.polar_path) + ", Re " + csv::format(k.polar_reynolds) +
                             ", lift fit window [" + csv::format(k.blf_window_deg[0]) + ", " +
                             csv::format(k.blf_window_deg[1]) + "] deg");
    env.control = staged(k.name, "control wing", [&] { return control_wing(k.control); });
    const double semi_span = env.control.semi_span;

    env.slip = staged(k.name, "slipstream", [&]() -> std::optional<SlipstreamProfile> {
        if (!k.slip.slipstream_path.empty()) {
            env.provenance.push_back("slipstream: tabulated profile " + file_name(k.slip.slipstream_path));
            return load_slipstream_file(k.slip.slipstream_path);
        }
        if (k.slip.propeller_path.empty()) {
            env.provenance.push_back("slipstream: none (propeller off)");
            return std::nullopt;
        }
        auto sec = std::make_shared<const AerofoilPolar>(load_polar_file(
            k.slip.section_polar_path, file_name(k.slip.section_polar_path), k.slip.section_reynolds));
        const auto geom = load_propeller_file(k.slip.propeller_path, sec);
        const PropOperatingPoint op{k.cond.v_inf, k.slip.rpm / 60.0, k.cond.rho};
        const auto bem = run_bem(geom, op);
        for (const auto& w : bem.warnings) env.warnings.push_back("propeller: " + w);
        env.provenance.push_back("slipstream: blade-element momentum model of " + file_name(k.slip.propeller_path) +
                                 " at " + csv::format(k.slip.rpm) + " rpm, J " +
                                 csv::format(advance_ratio(op, geom)));
        return slipstream_from_bem(bem, geom, op, k.prop_y_frac * semi_span, k.slip.rotation, k.slip.station_x,
                                   semi_span);
    });

    env.cond = k.cond;
    env.cond.alpha_geo = staged(k.name, "trim", [&] {
        if (!k.trim_cl) return k.control.alpha_geo;
        LiftingLineSolver solver(env.control, *env.polar, env.slip_ptr(), k.cond.v_inf, k.settings);
        return solver.alpha_for_cl(*k.trim_cl);
    });
    env.control.alpha_geo = env.cond.alpha_geo;
    env.cond.validate();
    return env;
}

struct PolarSweepFiles {
    std::string with_prop, without_prop;
};

/// Wing polars with and without the slipstream over the same angles.
inline PolarSweepFiles run_polar_sweep(const WingPlanform& planform, const CaseEnvironment& env,
                                       const std::vector<double>& alphas, LltSettings settings = {}) {
    if (alphas.empty()) throw ValidationError("empty angle-of-attack range");
    PolarSweepFiles f;
    f.with_prop = format_polar_sweep(wing_polar_sweep(planform, *env.polar, env.slip_ptr(), env.cond, alphas, settings));
    f.without_prop = format_polar_sweep(wing_polar_sweep(planform, *env.polar, nullptr, env.cond, alphas, settings));
    return f;
}

struct CaseMetrics {
    double CL = 0, CDi = 0, Cf = 0, CD = 0, LD = 0, alpha_geo_deg = 0;
};

inline CaseMetrics metrics_of(const LLTSolution& s) {
    return {s.CL, s.CDi, s.Cf, s.CD, s.endurance, s.alpha_geo * units::rad_to_deg};
}

struct CaseReport {
    std::string name;
    CaseMetrics control, optimized;
    DeltaMetrics deltas;
    bool converged = false;
    int evaluations = 0;
    WingPlanform planform_opt;
    std::vector<std::string> warnings;
    std::map<std::string, std::string> files;  // artifact name -> content
    std::vector<std::string> artifacts;        // written paths, in order
};

namespace detail {

inline void put(std::ostringstream& out, const std::string& key, double v) {
    out << key << " = " << csv::format(v) << '\n';
}

inline std::string report_text(const CaseConfig& k, const CaseEnvironment& env, const CaseReport& r,
                               const OptimisationResult& opt) {
    std::ostringstream out;
    out << "# " << k.name << " optimisation report" << (k.description.empty() ? "" : ". " + k.description) << '\n';
    for (const auto& p : env.provenance) out << "# data " << p << '\n';
    out << "[case]\nname = " << k.name << '\n';
    out << "cost = " << to_string(k.spec.cost) << '\n';
    out << "cl_mode = " << (k.spec.cl.mode == ClConstraint::Mode::fixed ? "fixed" : "band") << '\n';
    put(out, "cl_lo", k.spec.cl.lo());
    put(out, "cl_hi", k.spec.cl.hi());
    out << "converged = " << (r.converged ? "true" : "false") << '\n';
    out << "evaluations = " << r.evaluations << '\n';
    out << "outer_iterations = " << opt.outer_iterations << '\n';
    put(out, "constraint_violation", opt.violation);
    for (const auto& [label, m] : {std::pair{"control", r.control}, std::pair{"optimized", r.optimized}}) {
        out << '[' << label << "]\n";
        put(out, "alpha_geo_deg", m.alpha_geo_deg);
        put(out, "cl", m.CL);
        put(out, "cdi", m.CDi);
        put(out, "cf", m.Cf);
        put(out, "cd", m.CD);
        put(out, "lift_to_drag", m.LD);
    }
    out << "[optimized.planform]\n";
    for (int i = 0; i < 4; ++i) put(out, "chord_ctrl_" + std::to_string(i) + "_m", r.planform_opt.chord_ctrl[i]);
    for (int i = 0; i < 4; ++i) {
        put(out, "twist_ctrl_" + std::to_string(i) + "_deg", r.planform_opt.twist_ctrl[i] * units::rad_to_deg);
    }
    put(out, "area_m2", r.planform_opt.area());
    out << "[computed]\n";
    const auto& d = r.deltas;
    put(out, "d_cl_counts", d.d_cl_counts);
    put(out, "d_cl_pct", d.d_cl_pct);
    put(out, "d_cdi_counts", d.d_cdi_counts);
    put(out, "d_cdi_pct", d.d_cdi_pct);
    put(out, "d_cf_counts", d.d_cf_counts);
    put(out, "d_cf_pct", d.d_cf_pct);
    put(out, "d_cd_counts", d.d_cd_counts);
    put(out, "d_cd_pct", d.d_cd_pct);
    put(out, "d_endurance_pct", d.d_endurance_pct);
    if (!k.reference.empty()) {
        out << "[reference]\n";
        for (const auto& [key, v] : k.reference) put(out, key, v);
    }
    if (!r.warnings.empty()) {
        out << "[warnings]\n";
        for (std::size_t i = 0; i < r.warnings.size(); ++i) out << "w" << i + 1 << " = " << r.warnings[i] << '\n';
    }
    out << "[artifacts]\n";
    int i = 0;
    for (const auto& [name, content] : r.files) {
        if (name != "report.txt") out << "a" << ++i << " = " << name << '\n';
    }
    return out.str();
}

inline std::string planform_svg(const std::string& name, const WingPlanform& control, const WingPlanform& opt) {
    svg::Plot p{"Planform " + name + " (quarter-chord line straight)", "y (m)", "x (m)", {}, true};
    p.series.push_back(svg::planform_outline(control, "control", "#7f7f7f", true));
    p.series.push_back(svg::planform_outline(opt, "optimized", "#d62728"));
    return svg::render(p);
}

inline std::string twist_svg(const std::string& name, const WingPlanform& control, const WingPlanform& opt) {
    svg::Plot p{"Twist " + name, "y (m)", "twist (deg)", {}, false};
    for (const auto& [w, label, color, dashed] :
         {std::tuple{&control, "control", "#7f7f7f", true}, std::tuple{&opt, "optimized", "#d62728", false}}) {
        const auto g = snapshot(*w);
        svg::Series s{label, g.y, {}, color, dashed};
        for (double t : g.twist) s.y.push_back(t * units::rad_to_deg);
        p.series.push_back(std::move(s));
    }
    return svg::render(p);
}

inline std::string circulation_svg(const std::string& name, const LLTSolution& control, const LLTSolution& opt) {
    svg::Plot p{"Circulation " + name, "y / s", "gamma / (V s)", {}, false};
    for (const auto& [sol, label, color, dashed] :
         {std::tuple{&control, "control", "#7f7f7f", true}, std::tuple{&opt, "optimized", "#d62728", false}}) {
        svg::Series s{label, {}, {}, color, dashed};
        for (std::size_t i = 0; i < sol->y.size(); ++i) {
            s.x.push_back(sol->y[i] / sol->semi_span);
            s.y.push_back(sol->gamma[i] / (sol->v_inf * sol->semi_span));
        }
        p.series.push_back(std::move(s));
    }
    return svg::render(p);
}

}  // namespace detail

/// Runs one case end to end. All inputs are read and all results computed
/// before anything is written; with `out_root` empty nothing is written.
inline CaseReport run_case(const CaseConfig& k, const std::string& out_root, std::ostream* log = nullptr) {
    const auto env = prepare_case(k);
    if (log) *log << "[" << k.name << "] alpha_geo = " << csv::format(env.cond.alpha_geo * units::rad_to_deg) << " deg\n";

    OptimisationSpec spec = k.spec;
    spec.fixed_area = k.control.area;
    spec.fixed_root_tip = {env.control.chord_ctrl[0], env.control.chord_ctrl[3]};
    const OptimisationEnv oenv{env.polar.get(), env.slip_ptr(), env.cond, k.settings};
    const auto opt = staged(k.name, "optimize", [&] { return optimize(env.control, spec, oenv); });
    if (log) {
        *log << "[" << k.name << "] " << opt.evaluations << " evaluations, "
             << (opt.converged ? "converged" : "NOT converged") << ", dCD " << csv::format_fixed(opt.deltas.d_cd_pct, 2)
             << "%, d(L/D) " << csv::format_fixed(opt.deltas.d_endurance_pct, 2) << "%\n";
    }

    CaseReport r;
    r.name = k.name;
    r.control = metrics_of(opt.sol_control);
    r.optimized = metrics_of(opt.sol_opt);
    r.deltas = opt.deltas;
    r.converged = opt.converged;
    r.evaluations = opt.evaluations;
    r.planform_opt = opt.planform_opt;
    r.planform_opt.alpha_geo = env.cond.alpha_geo;
    r.warnings = env.warnings;
    for (const auto& w : opt.sol_control.warnings) r.warnings.push_back("control: " + w);
    for (const auto& w : opt.sol_opt.warnings) r.warnings.push_back("optimized: " + w);

    const auto sweeps = staged(k.name, "polar sweep", [&] {
        return std::pair{run_polar_sweep(env.control, env, k.sweep_alpha, k.settings),
                         run_polar_sweep(r.planform_opt, env, k.sweep_alpha, k.settings)};
    });
    auto& f = r.files;
    f["planform_control.csv"] = export_planform(env.control);
    f["planform_opt.csv"] = export_planform(r.planform_opt);
    f["planform.svg"] = detail::planform_svg(k.name, env.control, r.planform_opt);
    f["twist.svg"] = detail::twist_svg(k.name, env.control, r.planform_opt);
    f["circulation_control.csv"] = format_spanwise(opt.sol_control);
    f["circulation_opt.csv"] = format_spanwise(opt.sol_opt);
    f["circulation.svg"] = detail::circulation_svg(k.name, opt.sol_control, opt.sol_opt);
    f["polar_control_prop.csv"] = sweeps.first.with_prop;
    f["polar_control_noprop.csv"] = sweeps.first.without_prop;
    f["polar_opt_prop.csv"] = sweeps.second.with_prop;
    f["polar_opt_noprop.csv"] = sweeps.second.without_prop;
    f["history.csv"] = format_history(opt.history);
    f["report.txt"] = detail::report_text(k, env, r, opt);

    if (!out_root.empty()) {
        staged(k.name, "write outputs", [&] {
            const auto dir = std::filesystem::path(out_root) / k.output_dir;
            std::error_code ec;
            std::filesystem::create_directories(dir, ec);
            if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
            for (const auto& [name, content] : f) {
                const auto path = (dir / name).string();
                csv::write_file(path, content);
                r.artifacts.push_back(path);
            }
        });
    }
    return r;
}

struct CtSweep {
    std::string csv, svg;
    std::vector<double> j, ct;
};

/// Thrust coefficient over evenly spaced free-stream speeds at fixed rpm.
inline CtSweep run_ct_sweep(const PropellerGeometry& geom, double rpm, double v_lo, double v_hi, int n_points,
                            double rho = 1.225) {
    if (!(rpm > 0.0)) throw ValidationError("propeller rpm must be positive");
    if (!(v_lo > 0.0) || !(v_hi >= v_lo) || n_points < 1 || (n_points == 1 && v_hi != v_lo)) {
        throw ValidationError("invalid speed range");
    }
    CtSweep s;
    std::ostringstream out;
    out << "# rpm=" << csv::format(rpm) << "\n# diameter_m=" << csv::format(geom.diameter) << "\nJ,CT,V_mps\n";
    for (int i = 0; i < n_points; ++i) {
        const double v = n_points == 1 ? v_lo : v_lo + (v_hi - v_lo) * i / (n_points - 1);
        const PropOperatingPoint op{v, rpm / 60.0, rho};
        const auto bem = run_bem(geom, op);
        s.j.push_back(advance_ratio(op, geom));
        s.ct.push_back(bem.ct(op, geom));
        out << csv::format_fixed(s.j.back(), 6) << ',' << csv::format(s.ct.back()) << ',' << csv::format(v) << '\n';
    }
    s.csv = out.str();
    svg::Plot p{"Thrust coefficient at " + csv::format(rpm) + " rpm", "J", "CT", {{"BEM", s.j, s.ct}}, false};
    s.svg = svg::render(p);
    return s;
}

}  // namespace propwing
