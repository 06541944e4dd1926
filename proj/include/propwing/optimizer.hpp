#pragma once

// Planform optimization: minimizes induced drag, total drag or the negative
// endurance factor over the interior chord controls and all four twist
// controls. Constraints (wing area, CL target or band, box bounds) are
// handled by an augmented Lagrangian outer loop wrapped around a
// deterministic compass pattern search. Each candidate is first projected
// onto the box, the area equality (interior chord controls shifted equally)
// and the CL set (uniform twist offset, exact because CL is affine in
// incidence); whatever the projection cannot remove is penalized.

#include "propwing/errors.hpp"
#include "propwing/llt.hpp"
#include "propwing/planform.hpp"
#include "propwing/polar.hpp"
#include "propwing/slipstream.hpp"
#include "propwing/units.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace propwing {

enum class CostKind { induced_drag, total_drag, endurance };

inline const char* to_string(CostKind c) {
    switch (c) {
        case CostKind::induced_drag: return "induced_drag";
        case CostKind::total_drag: return "total_drag";
        case CostKind::endurance: return "endurance";
    }
    return "?";
}

struct ClConstraint {
    enum class Mode { fixed, band };
    Mode mode = Mode::fixed;
    double target = 0.7;  // fixed target, or band centre
    double frac = 0.0;    // band half-width as a fraction of the centre

    static ClConstraint fixed(double target) { return {Mode::fixed, target, 0.0}; }
    static ClConstraint band(double center, double frac) { return {Mode::band, center, frac}; }

    double lo() const { return mode == Mode::fixed ? target : target * (1.0 - frac); }
    double hi() const { return mode == Mode::fixed ? target : target * (1.0 + frac); }
};

struct OptimisationSpec {
    CostKind cost = CostKind::total_drag;
    ClConstraint cl = ClConstraint::fixed(0.7);
    std::array<double, 2> twist_bounds{units::deg(-8.0), units::deg(8.0)};  // rad
    std::array<double, 2> chord_bounds{0.05, 0.6};                          // m
    double fixed_area = 0.0;                                                // m^2
    std::array<double, 2> fixed_root_tip{0.0, 0.0};                         // m
    int max_outer_iters = 20;
    double tolerance = 1e-6;       // constraint violation
    double step_tolerance = 1e-4;  // final mesh size, scaled units
    int max_evaluations = 40000;
    double initial_step = 1.0;     // scaled units: 1 cm of chord, 1 deg of twist
    int max_restarts = 8;          // pattern-search restarts with rotated poll bases

    void validate() const {
        if (cl.mode == ClConstraint::Mode::band && !(cl.frac >= 0.0 && cl.frac <= 1.0)) {
            throw ValidationError("CL band fraction must lie in [0, 1]");
        }
        if (!(cl.target > 0.0)) throw ValidationError("CL target must be positive");
        if (!(twist_bounds[0] < twist_bounds[1]) || !(chord_bounds[0] < chord_bounds[1])) {
            throw ValidationError("bounds must be ordered lo < hi");
        }
        if (!(chord_bounds[0] > 0.0)) throw ValidationError("lower chord bound must be positive");
        if (!(fixed_area > 0.0)) throw ValidationError("fixed area must be positive");
        if (max_outer_iters < 1 || max_evaluations < 1) throw ValidationError("iteration limits must be positive");
        if (!(tolerance > 0.0) || !(step_tolerance > 0.0) || !(initial_step > step_tolerance)) {
            throw ValidationError("invalid tolerance or step");
        }
    }
};

struct OptimisationEnv {
    const AerofoilPolar* polar = nullptr;
    const SlipstreamProfile* slip = nullptr;
    FlightCondition cond;
    LltSettings settings;
};

/// Positive values are improvements: drag reductions and lift/endurance gains.
struct DeltaMetrics {
    double d_cdi_counts = 0, d_cdi_pct = 0;
    double d_cf_counts = 0, d_cf_pct = 0;
    double d_cd_counts = 0, d_cd_pct = 0;
    double d_cl_counts = 0, d_cl_pct = 0;
    double d_endurance_pct = 0;
};

inline DeltaMetrics delta_metrics(const LLTSolution& control, const LLTSolution& opt) {
    auto pct = [](double diff, double ref) { return ref != 0.0 ? 100.0 * diff / ref : 0.0; };
    DeltaMetrics d;
    d.d_cdi_counts = 1e4 * (control.CDi - opt.CDi);
    d.d_cdi_pct = pct(control.CDi - opt.CDi, control.CDi);
    d.d_cf_counts = 1e4 * (control.Cf - opt.Cf);
    d.d_cf_pct = pct(control.Cf - opt.Cf, control.Cf);
    d.d_cd_counts = 1e4 * (control.CD - opt.CD);
    d.d_cd_pct = pct(control.CD - opt.CD, control.CD);
    d.d_cl_counts = 1e4 * (opt.CL - control.CL);
    d.d_cl_pct = pct(opt.CL - control.CL, control.CL);
    d.d_endurance_pct = pct(opt.endurance - control.endurance, control.endurance);
    return d;
}

struct BatteryParams {
    double e_star = 0.0;      // J/kg
    double eta_total = 0.0;   // battery-to-propulsive efficiency
    double m_battery = 0.0;   // kg
    double m_total = 0.0;     // kg
};

/// R = E* eta (1/g) (L/D) (m_battery / m_total)
inline double endurance_range(double lift_to_drag, const BatteryParams& b) {
    if (!(b.m_battery > 0.0) || !(b.m_total > 0.0) || b.m_battery > b.m_total) {
        throw ValidationError("battery mass must be positive and not exceed total mass");
    }
    if (!(b.eta_total > 0.0 && b.eta_total <= 1.0)) throw ValidationError("efficiency must lie in (0, 1]");
    return b.e_star * b.eta_total / units::standard_gravity * lift_to_drag * (b.m_battery / b.m_total);
}

inline double endurance_range(const LLTSolution& sol, const BatteryParams& b) {
    return endurance_range(sol.endurance, b);
}

struct HistoryRecord {
    int iter = 0;
    int outer = 0;
    double cost = 0, cl = 0, cdi = 0, cf = 0, cd = 0, violation = 0;
    double merit = 0;  // augmented objective under the outer iteration's multipliers
};

struct OptimisationResult {
    WingPlanform planform_opt;
    LLTSolution sol_opt;
    LLTSolution sol_control;
    DeltaMetrics deltas;
    std::vector<HistoryRecord> history;
    bool converged = false;
    int evaluations = 0;
    int outer_iterations = 0;
    double violation = 0.0;
};

inline double cost_of(CostKind kind, const LLTSolution& sol) {
    switch (kind) {
        case CostKind::induced_drag: return sol.CDi;
        case CostKind::total_drag: return sol.CD;
        case CostKind::endurance: return -sol.endurance;
    }
    return 0.0;
}

inline std::string format_history(const std::vector<HistoryRecord>& h) {
    std::ostringstream out;
    out << "iter,cost,cl,cdi,cf,cd,violation\n";
    for (const auto& r : h) {
        out << r.iter << ',' << csv::format(r.cost) << ',' << csv::format(r.cl) << ',' << csv::format(r.cdi) << ','
            << csv::format(r.cf) << ',' << csv::format(r.cd) << ',' << csv::format(r.violation) << '\n';
    }
    return out.str();
}

namespace detail {

constexpr double chord_scale = 0.01;              // m per scaled unit
constexpr double twist_scale = units::deg_to_rad;  // rad per scaled unit

class PlanformSearch {
public:
    static constexpr int n_vars = 6;
    using Vec = std::array<double, n_vars>;  // c1, c2 (m), t0..t3 (rad)

    struct Eval {
        Vec x{};
        WingPlanform planform;
        LLTSolution sol;
        double cost = 0.0;
        std::array<double, 3> h{};  // area (relative), CL equality, CL band excess
        double violation = 0.0;
        bool rejected = false;  // projection left the box; never accepted
    };

    PlanformSearch(const WingPlanform& control, const OptimisationSpec& spec, const OptimisationEnv& env)
        : control_(control), spec_(spec), env_(env) {}

    static Vec pack(const WingPlanform& p) {
        return {p.chord_ctrl[1], p.chord_ctrl[2], p.twist_ctrl[0], p.twist_ctrl[1], p.twist_ctrl[2], p.twist_ctrl[3]};
    }

    WingPlanform unpack(const Vec& x) const {
        WingPlanform p = control_;
        p.chord_ctrl[1] = x[0];
        p.chord_ctrl[2] = x[1];
        for (int k = 0; k < 4; ++k) p.twist_ctrl[static_cast<std::size_t>(k)] = x[static_cast<std::size_t>(k) + 2];
        return p;
    }

    static double scale(int i) { return i < 2 ? chord_scale : twist_scale; }

    Eval evaluate(Vec x) {
        ++evaluations_;
        const auto clamp_box = [&](Vec& v) {
            for (int i = 0; i < n_vars; ++i) {
                const auto& bnd = i < 2 ? spec_.chord_bounds : spec_.twist_bounds;
                v[static_cast<std::size_t>(i)] = std::clamp(v[static_cast<std::size_t>(i)], bnd[0], bnd[1]);
            }
        };
        clamp_box(x);
        // Area: the mean of the chord controls is fixed by the area.
        const double mean_target = spec_.fixed_area / (2.0 * control_.semi_span);
        const double d = (4.0 * mean_target - (control_.chord_ctrl[0] + x[0] + x[1] + control_.chord_ctrl[3])) / 2.0;
        x[0] += d;
        x[1] += d;
        const auto reject = [&] {
            Eval r;
            r.x = x;
            r.rejected = true;
            r.cost = r.violation = std::numeric_limits<double>::infinity();
            return r;
        };
        {
            Vec boxed = x;
            clamp_box(boxed);
            if (boxed != x) return reject();
        }

        Eval e;
        try {
            WingPlanform p = unpack(x);
            if (!p.chord_positive()) throw ValidationError("candidate chord not positive");
            LiftingLineSolver solver(p, *env_.polar, env_.slip, env_.cond.v_inf, env_.settings);
            const double alpha = env_.cond.alpha_geo;
            double cl = solver.cl_zero() + solver.cl_slope() * alpha;
            double want = cl;
            if (spec_.cl.mode == ClConstraint::Mode::fixed) {
                want = spec_.cl.target;
            } else {
                want = std::clamp(cl, spec_.cl.lo(), spec_.cl.hi());
            }
            if (want != cl) {
                const double shift = solver.alpha_for_cl(want) - alpha;
                Vec shifted = x;
                for (int i = 2; i < n_vars; ++i) shifted[static_cast<std::size_t>(i)] += shift;
                Vec clamped = shifted;
                clamp_box(clamped);
                if (clamped != shifted) return reject();
                x = shifted;
                p = unpack(x);
                // Same as re-solving with the shifted twist at the original incidence.
                e.sol = solver.solve(alpha + shift);
                e.sol.alpha_geo = alpha;
                for (auto& tw : e.sol.twist) tw += shift;
            } else {
                e.sol = solver.solve(alpha);
            }
            e.planform = p;
        } catch (const Error& err) {
            std::ostringstream msg;
            msg << "lifting-line failure at candidate chord=(" << csv::format(x[0]) << ", " << csv::format(x[1])
                << ") m twist=(" << csv::format(x[2] * units::rad_to_deg) << ", "
                << csv::format(x[3] * units::rad_to_deg) << ", " << csv::format(x[4] * units::rad_to_deg) << ", "
                << csv::format(x[5] * units::rad_to_deg) << ") deg: " << err.what();
            throw SolverError(msg.str());
        }
        e.x = x;
        e.cost = cost_of(spec_.cost, e.sol);
        e.h[0] = (e.planform.area() - spec_.fixed_area) / spec_.fixed_area;
        if (spec_.cl.mode == ClConstraint::Mode::fixed) {
            e.h[1] = e.sol.CL - spec_.cl.target;
            e.h[2] = 0.0;
        } else {
            e.h[1] = 0.0;
            e.h[2] = std::max({0.0, spec_.cl.lo() - e.sol.CL, e.sol.CL - spec_.cl.hi()});
        }
        e.violation = std::max({std::abs(e.h[0]), std::abs(e.h[1]), e.h[2]});
        return e;
    }

    double merit(const Eval& e) const {
        if (e.rejected) return std::numeric_limits<double>::infinity();
        double m = e.cost;
        for (std::size_t i = 0; i < 3; ++i) m += lambda_[i] * e.h[i] + 0.5 * penalty_ * e.h[i] * e.h[i];
        return m;
    }

    OptimisationResult run() {
        OptimisationResult result;
        Eval current = evaluate(pack(control_));
        const Eval control_eval = current;
        result.sol_control = control_eval.sol;
        Eval best_feasible = current;
        bool have_feasible = current.violation < spec_.tolerance;
        int iter = 0;
        bool converged = false;
        bool budget_exhausted = false;

        for (int outer = 1; outer <= spec_.max_outer_iters && !budget_exhausted; ++outer) {
            result.outer_iterations = outer;
            double m_cur = merit(current);
            result.history.push_back(record(iter, outer, current, m_cur));
            int idle_restarts = 0;
            for (int restart = 0; restart <= spec_.max_restarts && !budget_exhausted; ++restart) {
                const double m_start = m_cur;
                const auto basis = poll_basis(restart);
                double step = spec_.initial_step;
                while (step >= spec_.step_tolerance) {
                    if (evaluations_ >= spec_.max_evaluations) {
                        budget_exhausted = true;
                        break;
                    }
                    // Complete poll; candidates are ranked by merit with ties
                    // resolved in favour of the lower index. Acceptance needs a
                    // decrease of at least forcing(step).
                    const double forcing = 1e-9 * step * step;
                    int best = -1;
                    double best_m = m_cur - forcing;
                    Eval best_eval;
                    for (int dir = 0; dir < 2 * n_vars; ++dir) {
                        const auto& d = basis[static_cast<std::size_t>(dir / 2)];
                        const double sign = (dir % 2 == 0) ? 1.0 : -1.0;
                        Vec trial = current.x;
                        for (int i = 0; i < n_vars; ++i) {
                            trial[static_cast<std::size_t>(i)] += sign * step * d[static_cast<std::size_t>(i)] * scale(i);
                        }
                        Eval e = evaluate(trial);
                        if (e.x == current.x) continue;
                        const double m = merit(e);
                        if (m < best_m - 1e-12 * std::max(1.0, std::abs(best_m))) {
                            best = dir;
                            best_m = m;
                            best_eval = std::move(e);
                        }
                    }
                    if (best >= 0) {
                        current = std::move(best_eval);
                        m_cur = best_m;
                        ++iter;
                        result.history.push_back(record(iter, outer, current, m_cur));
                        if (current.violation < spec_.tolerance &&
                            (!have_feasible || current.cost < best_feasible.cost)) {
                            best_feasible = current;
                            have_feasible = true;
                        }
                        step = std::min(2.0 * step, spec_.initial_step);
                    } else {
                        step *= 0.5;
                    }
                }
                const bool improved = m_cur < m_start - 1e-12 * std::max(1.0, std::abs(m_start));
                idle_restarts = improved ? 0 : idle_restarts + 1;
                if (idle_restarts >= 2) break;
            }
            if (current.violation < spec_.tolerance) {
                if (!budget_exhausted) converged = true;
                break;
            }
            // Multiplier and penalty update.
            for (std::size_t i = 0; i < 3; ++i) lambda_[i] += penalty_ * current.h[i];
            if (current.violation > 0.25 * last_violation_) penalty_ *= 10.0;
            last_violation_ = current.violation;
        }

        Eval chosen = have_feasible ? best_feasible : current;
        // The control wing is always a candidate.
        if (control_eval.violation < spec_.tolerance && !(chosen.cost <= control_eval.cost)) chosen = control_eval;
        result.planform_opt = chosen.planform;
        result.sol_opt = chosen.sol;
        result.violation = chosen.violation;
        result.converged = converged && chosen.violation < spec_.tolerance;
        result.evaluations = evaluations_;
        result.deltas = delta_metrics(result.sol_control, result.sol_opt);
        return result;
    }

private:
    // Restart 0 polls the coordinate directions; later restarts use the
    // Householder reflection of a Halton point, a fixed orthonormal basis per
    // restart index.
    static std::array<Vec, n_vars> poll_basis(int restart) {
        std::array<Vec, n_vars> basis{};
        if (restart == 0) {
            for (int i = 0; i < n_vars; ++i) basis[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1.0;
            return basis;
        }
        static constexpr std::array<int, n_vars> primes{2, 3, 5, 7, 11, 13};
        Vec v{};
        double norm2 = 0.0;
        for (int i = 0; i < n_vars; ++i) {
            double f = 1.0, h = 0.0;
            for (int k = restart; k > 0; k /= primes[static_cast<std::size_t>(i)]) {
                f /= primes[static_cast<std::size_t>(i)];
                h += f * (k % primes[static_cast<std::size_t>(i)]);
            }
            v[static_cast<std::size_t>(i)] = 2.0 * h - 1.0;
            norm2 += v[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(i)];
        }
        for (int r = 0; r < n_vars; ++r) {
            for (int c = 0; c < n_vars; ++c) {
                basis[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] =
                    (r == c ? 1.0 : 0.0) - 2.0 * v[static_cast<std::size_t>(r)] * v[static_cast<std::size_t>(c)] / norm2;
            }
        }
        return basis;
    }

    static HistoryRecord record(int iter, int outer, const Eval& e, double merit) {
        return {iter, outer, e.cost, e.sol.CL, e.sol.CDi, e.sol.Cf, e.sol.CD, e.violation, merit};
    }

    WingPlanform control_;
    OptimisationSpec spec_;
    OptimisationEnv env_;
    int evaluations_ = 0;
    std::array<double, 3> lambda_{};
    double penalty_ = 1e3;
    double last_violation_ = std::numeric_limits<double>::infinity();
};

}  // namespace detail

/// Checks that the control wing satisfies the geometric and lift constraints.
inline void check_control_feasible(const WingPlanform& control, const OptimisationSpec& spec, double control_cl) {
    if (std::abs(control.area() - spec.fixed_area) > 1e-6 * spec.fixed_area) {
        throw ValidationError("control wing area does not match the fixed area");
    }
    if (std::abs(control.chord_ctrl[0] - spec.fixed_root_tip[0]) > 1e-12 ||
        std::abs(control.chord_ctrl[3] - spec.fixed_root_tip[1]) > 1e-12) {
        throw ValidationError("control wing root/tip chords do not match the fixed values");
    }
    for (double c : {control.chord_ctrl[1], control.chord_ctrl[2]}) {
        if (c < spec.chord_bounds[0] || c > spec.chord_bounds[1]) {
            throw ValidationError("control wing chord control outside bounds");
        }
    }
    for (double t : control.twist_ctrl) {
        if (t < spec.twist_bounds[0] || t > spec.twist_bounds[1]) {
            throw ValidationError("control wing twist control outside bounds");
        }
    }
    const double tol = 1e-6;
    if (control_cl < spec.cl.lo() - tol || control_cl > spec.cl.hi() + tol) {
        throw ValidationError("control wing CL " + csv::format(control_cl) + " violates the lift constraint");
    }
}

inline OptimisationResult optimize(const WingPlanform& control, const OptimisationSpec& spec,
                                   const OptimisationEnv& env) {
    spec.validate();
    if (!env.polar) throw ValidationError("optimizer environment has no polar");
    env.cond.validate();
    const auto control_sol = solve(control, *env.polar, env.slip, env.cond, env.settings);
    check_control_feasible(control, spec, control_sol.CL);
    detail::PlanformSearch search(control, spec, env);
    return search.run();
}

}  // namespace propwing
