// propwing command-line tool.

#include "propwing.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <future>
#include <iostream>
#include <mutex>
#include <sstream>

#ifndef PROPWING_CASES_DIR
#define PROPWING_CASES_DIR "cases"
#endif

namespace fs = std::filesystem;
using namespace propwing;

namespace {

struct Globals {
    std::string out = "out";
    bool quiet = false;
};

std::mutex log_mutex;

void say(const Globals& g, const std::string& text) {
    if (g.quiet) return;
    std::lock_guard lock(log_mutex);
    std::cout << text;
}

void write_out(const Globals& g, const std::string& name, const std::string& content) {
    std::error_code ec;
    fs::create_directories(g.out, ec);
    if (ec) throw IoError("cannot create directory '" + g.out + "': " + ec.message());
    const auto path = (fs::path(g.out) / name).string();
    csv::write_file(path, content);
    say(g, "wrote " + path + "\n");
}

std::array<double, 2> parse_pair(const std::string& text, const char* what) {
    const auto v = parse_list(text, what);
    if (v.size() != 2) throw ValidationError(std::string(what) + " needs two comma-separated values");
    return {v[0], v[1]};
}

struct PropArgs {
    std::string geometry, section_polar;
    double section_re = 1e5;
    double rpm = 0.0;
    double rho = 1.225;

    void add(CLI::App* app) {
        app->add_option("--geometry", geometry, "propeller geometry CSV (r_m,chord_m,twist_deg)")->required();
        app->add_option("--section-polar", section_polar, "blade section polar CSV")->required();
        app->add_option("--section-re", section_re, "blade section Reynolds number (metadata)");
        app->add_option("--rpm", rpm, "rotational speed, rev/min")->required();
        app->add_option("--rho", rho, "air density, kg/m^3");
    }

    PropellerGeometry load() const {
        auto sec = std::make_shared<const AerofoilPolar>(load_polar_file(section_polar, file_name(section_polar), section_re));
        return load_propeller_file(geometry, sec);
    }
};

/// Runs the cases concurrently; results come back in input order.
int run_cases(const Globals& g, const std::vector<std::string>& paths) {
    std::vector<CaseConfig> configs;
    for (const auto& p : paths) configs.push_back(load_case(p));
    std::vector<std::future<CaseReport>> jobs;
    for (const auto& k : configs) {
        jobs.push_back(std::async(std::launch::async, [&g, &k] {
            std::ostringstream log;
            auto r = run_case(k, g.out, &log);
            say(g, log.str());
            return r;
        }));
    }
    int status = 0;
    int first_code = 0;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        try {
            const auto r = jobs[i].get();
            if (!r.converged) {
                say(g, "[" + r.name + "] optimizer did not converge\n");
                status = std::max(status, static_cast<int>(ExitCode::convergence));
            }
        } catch (const Error& e) {
            std::cerr << "error: " << e.what() << '\n';
            if (first_code == 0) first_code = static_cast<int>(e.exit_code());
        }
    }
    return first_code != 0 ? first_code : status;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Propeller-wing planform optimisation toolkit"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--out", g.out, "output directory")->capture_default_str();
    app.add_flag("--quiet", g.quiet, "suppress progress output");
    int status = 0;

    // polar fit
    auto* polar = app.add_subcommand("polar", "aerofoil polar utilities")->require_subcommand(1);
    auto* polar_fit = polar->add_subcommand("fit", "least-squares lift line over a window of the polar");
    std::string polar_file, window_text = "-2.5,10";
    double polar_re = 3e5;
    polar_fit->add_option("polar", polar_file, "polar CSV (alpha_deg,cl,cd)")->required();
    polar_fit->add_option("--window", window_text, "fit window lo,hi in degrees")->capture_default_str();
    polar_fit->add_option("--re", polar_re, "Reynolds number (metadata)");
    polar_fit->callback([&] {
        const auto p = load_polar_file(polar_file, file_name(polar_file), polar_re);
        const auto m = fit_blf(p, parse_pair(window_text, "--window"));
        std::cout << "a0_per_rad = " << csv::format(m.a0) << "\nalpha0_deg = "
                  << csv::format(m.alpha0 * units::rad_to_deg) << "\nwindow_deg = " << csv::format(m.fit_window_deg[0])
                  << ", " << csv::format(m.fit_window_deg[1]) << '\n';
    });

    // prop ct-sweep / prop slipstream
    auto* prop = app.add_subcommand("prop", "propeller model")->require_subcommand(1);
    auto* ct_sweep = prop->add_subcommand("ct-sweep", "thrust coefficient against advance ratio");
    PropArgs ct_args;
    ct_args.add(ct_sweep);
    double v_min = 3.8, v_max = 17.15;
    int points = 20;
    ct_sweep->add_option("--v-min", v_min, "lowest free-stream speed, m/s")->capture_default_str();
    ct_sweep->add_option("--v-max", v_max, "highest free-stream speed, m/s")->capture_default_str();
    ct_sweep->add_option("--points", points, "number of speeds")->capture_default_str();
    ct_sweep->callback([&] {
        const auto geom = ct_args.load();
        const auto s = run_ct_sweep(geom, ct_args.rpm, v_min, v_max, points, ct_args.rho);
        write_out(g, "ct_sweep.csv", s.csv);
        write_out(g, "ct_sweep.svg", s.svg);
    });

    auto* slip_cmd = prop->add_subcommand("slipstream", "spanwise slipstream profile from the BEM model");
    PropArgs slip_args;
    slip_args.add(slip_cmd);
    double slip_v = 15.0, semi_span = 0.8, prop_y = 0.24, station_x = 1.0;
    std::string rotation = "up_inboard", slip_name = "slipstream.csv";
    slip_cmd->add_option("--v-inf", slip_v, "free-stream speed, m/s")->capture_default_str();
    slip_cmd->add_option("--semi-span", semi_span, "wing semi-span, m")->capture_default_str();
    slip_cmd->add_option("--prop-y", prop_y, "propeller axis spanwise position, m")->capture_default_str();
    slip_cmd->add_option("--station-x", station_x, "downstream distance in diameters")->capture_default_str();
    slip_cmd->add_option("--rotation", rotation, "up_inboard or up_outboard")->capture_default_str();
    slip_cmd->add_option("--name", slip_name, "output file name inside --out")->capture_default_str();
    slip_cmd->callback([&] {
        const auto geom = slip_args.load();
        const PropOperatingPoint op{slip_v, slip_args.rpm / 60.0, slip_args.rho};
        const auto bem = run_bem(geom, op);
        for (const auto& w : bem.warnings) std::cerr << "warning: " << w << '\n';
        const auto profile =
            slipstream_from_bem(bem, geom, op, prop_y, parse_rotation(rotation), station_x, semi_span);
        std::ostringstream prov;
        prov << "generated by the blade-element momentum model: " << file_name(slip_args.geometry) << " with "
             << file_name(slip_args.section_polar) << ", " << csv::format(slip_args.rpm) << " rpm, V "
             << csv::format(slip_v) << " m/s, rho " << csv::format(slip_args.rho) << " kg/m^3, J "
             << csv::format_fixed(advance_ratio(op, geom), 4) << ", CT " << csv::format_fixed(bem.ct(op, geom), 5)
             << ", axis at y " << csv::format(prop_y) << " m, " << rotation;
        write_out(g, slip_name, save_slipstream(profile, prov.str()));
    });

    // llt solve / llt sweep
    auto* llt = app.add_subcommand("llt", "lifting-line analysis of a case's control wing")->require_subcommand(1);
    auto* llt_solve = llt->add_subcommand("solve", "spanwise solution at one operating point");
    std::string llt_case;
    std::optional<double> llt_alpha, llt_cl;
    bool no_prop = false;
    llt_solve->add_option("case", llt_case, "case configuration file")->required();
    auto* alpha_opt = llt_solve->add_option("--alpha", llt_alpha, "geometric angle of attack, deg");
    llt_solve->add_option("--cl", llt_cl, "trim to this wing lift coefficient")->excludes(alpha_opt);
    llt_solve->add_flag("--no-prop", no_prop, "ignore the slipstream");
    llt_solve->callback([&] {
        const auto k = load_case(llt_case);
        const auto env = prepare_case(k);
        const SlipstreamProfile* slip = no_prop ? nullptr : env.slip_ptr();
        LiftingLineSolver solver(env.control, *env.polar, slip, env.cond.v_inf, k.settings);
        double alpha = env.cond.alpha_geo;
        if (llt_alpha) alpha = units::deg(*llt_alpha);
        if (llt_cl) alpha = solver.alpha_for_cl(*llt_cl);
        const auto sol = solver.solve(alpha);
        std::cout << "alpha_geo_deg = " << csv::format(alpha * units::rad_to_deg) << "\nCL = " << csv::format(sol.CL)
                  << "\nCDi = " << csv::format(sol.CDi) << "\nCf = " << csv::format(sol.Cf)
                  << "\nCD = " << csv::format(sol.CD) << "\nL/D = " << csv::format(sol.endurance) << '\n';
        for (const auto& w : sol.warnings) std::cerr << "warning: " << w << '\n';
        write_out(g, "spanwise.csv", format_spanwise(sol));
    });

    auto* llt_sweep = llt->add_subcommand("sweep", "wing polar with and without the slipstream");
    double a_lo = -6.0, a_hi = 10.0, a_step = 1.0;
    llt_sweep->add_option("case", llt_case, "case configuration file")->required();
    llt_sweep->add_option("--alpha-min", a_lo, "deg")->capture_default_str();
    llt_sweep->add_option("--alpha-max", a_hi, "deg")->capture_default_str();
    llt_sweep->add_option("--alpha-step", a_step, "deg")->capture_default_str();
    llt_sweep->callback([&] {
        const auto k = load_case(llt_case);
        const auto env = prepare_case(k);
        const auto f = run_polar_sweep(env.control, env, alpha_range_deg(a_lo, a_hi, a_step), k.settings);
        write_out(g, "polar_prop.csv", f.with_prop);
        write_out(g, "polar_noprop.csv", f.without_prop);
    });

    // optimize
    auto* opt_cmd = app.add_subcommand("optimize", "optimise a case's control wing with optional overrides");
    std::string opt_case, cost_override, mode_override;
    std::optional<double> target_override, band_override;
    opt_cmd->add_option("case", opt_case, "case configuration file")->required();
    opt_cmd->add_option("--cost", cost_override, "induced_drag, total_drag or endurance");
    opt_cmd->add_option("--cl-mode", mode_override, "fixed or band");
    opt_cmd->add_option("--cl-target", target_override, "target (fixed) or band centre");
    opt_cmd->add_option("--band", band_override, "band half-width as a fraction of the centre");
    opt_cmd->callback([&] {
        auto k = load_case(opt_case);
        if (!cost_override.empty()) k.spec.cost = parse_cost(cost_override);
        const double target = target_override.value_or(k.spec.cl.target);
        const std::string mode =
            !mode_override.empty() ? mode_override : (k.spec.cl.mode == ClConstraint::Mode::fixed ? "fixed" : "band");
        if (mode == "fixed") {
            k.spec.cl = ClConstraint::fixed(target);
        } else if (mode == "band") {
            k.spec.cl = ClConstraint::band(target, band_override.value_or(k.spec.cl.frac));
        } else {
            throw ValidationError("unknown --cl-mode '" + mode + "'");
        }
        const auto env = prepare_case(k);
        OptimisationSpec spec = k.spec;
        spec.fixed_area = k.control.area;
        spec.fixed_root_tip = {env.control.chord_ctrl[0], env.control.chord_ctrl[3]};
        const auto r = optimize(env.control, spec, {env.polar.get(), env.slip_ptr(), env.cond, k.settings});
        const auto& d = r.deltas;
        std::cout << "converged = " << (r.converged ? "true" : "false") << "\nevaluations = " << r.evaluations
                  << "\nCL = " << csv::format(r.sol_opt.CL) << "\nCD = " << csv::format(r.sol_opt.CD)
                  << "\nd_cdi_pct = " << csv::format(d.d_cdi_pct) << "\nd_cf_pct = " << csv::format(d.d_cf_pct)
                  << "\nd_cd_pct = " << csv::format(d.d_cd_pct) << "\nd_cl_pct = " << csv::format(d.d_cl_pct)
                  << "\nd_endurance_pct = " << csv::format(d.d_endurance_pct) << '\n';
        auto planform = r.planform_opt;
        planform.alpha_geo = env.cond.alpha_geo;
        write_out(g, "planform_opt.csv", export_planform(planform));
        write_out(g, "history.csv", format_history(r.history));
        if (!r.converged) status = static_cast<int>(ExitCode::convergence);
    });

    // case run / case run-all
    auto* case_cmd = app.add_subcommand("case", "shipped and custom optimisation cases")->require_subcommand(1);
    auto* case_run = case_cmd->add_subcommand("run", "run one or more case files");
    std::vector<std::string> case_files;
    case_run->add_option("cases", case_files, "case configuration files")->required();
    case_run->callback([&] { status = run_cases(g, case_files); });

    auto* run_all = case_cmd->add_subcommand("run-all", "run every *.cfg in a directory");
    std::string cases_dir = PROPWING_CASES_DIR;
    run_all->add_option("--cases", cases_dir, "directory holding the case files")->capture_default_str();
    run_all->callback([&] {
        if (!fs::is_directory(cases_dir)) throw IoError("case directory '" + cases_dir + "' not found");
        std::vector<std::string> files;
        for (const auto& e : fs::directory_iterator(cases_dir)) {
            if (e.is_regular_file() && e.path().extension() == ".cfg") files.push_back(e.path().string());
        }
        std::sort(files.begin(), files.end());
        if (files.empty()) throw ValidationError("no .cfg files in '" + cases_dir + "'");
        status = run_cases(g, files);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(ExitCode::validation);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(e.exit_code());
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::io);
    }
    return status;
}
