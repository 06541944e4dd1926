#pragma once

// Lifting-line solver with propeller slipstream. The wing and the slipstream
// are mirror-symmetric about the root, so the circulation is expanded in odd
// sine modes only:
//
//   Gamma(theta) = 2 b V_inf sum_j A_j sin(n_j theta),  n_j = 2j + 1,
//   y = s cos(theta),  theta in (0, pi/2]  (tip at 0, root at pi/2).
//
// The slipstream enters through the local speed V(y) in the circulation
// balance and in the profile drag, and through the incidence change
// alpha_prop(y), each station using the profile mean over its strip. The
// trailing-vortex kernel is the classical one.

#include "propwing/csv.hpp"
#include "propwing/errors.hpp"
#include "propwing/planform.hpp"
#include "propwing/polar.hpp"
#include "propwing/slipstream.hpp"
#include "propwing/units.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace propwing {

struct FlightCondition {
    double v_inf = 15.0;        // m/s
    double rho = 1.225;         // kg/m^3
    double alpha_geo = 0.0;     // rad
    double reynolds_ref = 0.0;  // metadata

    void validate() const {
        if (!(v_inf > 0.0)) throw ValidationError("free-stream speed must be positive");
        if (!(rho > 0.0)) throw ValidationError("density must be positive");
        if (!std::isfinite(alpha_geo)) throw ValidationError("angle of attack must be finite");
    }
};

struct LltSettings {
    int n_collocation = 320;
    int n_modes = 48;
};

struct LLTSolution {
    // Spanwise arrays run from the root (index 0) to the tip (last index).
    // All entries but the tip are collocation stations.
    std::vector<double> theta;           // rad
    std::vector<double> y;               // m
    std::vector<double> chord;           // m
    std::vector<double> twist;           // rad
    std::vector<double> local_speed;     // V(y), m/s
    std::vector<double> gamma;           // m^2/s
    std::vector<double> alpha_eff;       // rad
    std::vector<double> alpha_downwash;  // rad
    std::vector<double> alpha_prop;      // rad
    std::vector<double> cl_span;
    std::vector<double> cd_span;
    std::vector<double> a_n;             // odd-mode coefficients A_1, A_3, ...

    double v_inf = 0.0;
    double semi_span = 0.0;
    double area = 0.0;
    double alpha_geo = 0.0;

    double CL = 0.0, CDi = 0.0, Cf = 0.0, CD = 0.0, endurance = 0.0;
    double residual = 0.0;  // max-norm collocation residual, rad
    std::vector<std::string> warnings;

    double aspect_ratio() const { return 4.0 * semi_span * semi_span / area; }
};

/// Trapezoidal rule in y over the stations of a solution (root to tip),
/// doubled for the mirror half.
inline double span_integral(const LLTSolution& sol, const std::vector<double>& f) {
    double s = 0.0;
    for (std::size_t i = 1; i < sol.y.size(); ++i) s += 0.5 * (sol.y[i] - sol.y[i - 1]) * (f[i] + f[i - 1]);
    return 2.0 * s;
}

/// Cf = D_P / (q S), D_P = rho * integral 0.5 V^2 cd c dy over the full span.
inline double profile_drag(const LLTSolution& sol) {
    std::vector<double> f(sol.y.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        f[i] = sol.local_speed[i] * sol.local_speed[i] * sol.cd_span[i] * sol.chord[i];
    }
    return span_integral(sol, f) / (sol.v_inf * sol.v_inf * sol.area);
}

/// Recomputes section drag with `polar` before integrating.
inline double profile_drag(LLTSolution sol, const AerofoilPolar& polar) {
    for (std::size_t i = 0; i < sol.cd_span.size(); ++i) sol.cd_span[i] = polar.cd_of_cl(sol.cl_span[i]);
    return profile_drag(sol);
}

/// Di = rho * integral Gamma w_i dy with the wing's own downwash; for the
/// odd sine series this is exactly pi AR sum n A_n^2.
inline double induced_drag(const LLTSolution& sol) {
    double s = 0.0;
    for (std::size_t j = 0; j < sol.a_n.size(); ++j) {
        const double n = 2.0 * static_cast<double>(j) + 1.0;
        s += n * sol.a_n[j] * sol.a_n[j];
    }
    return units::pi * sol.aspect_ratio() * s;
}

/// CL from the Kutta-Joukowski load rho V(y) Gamma(y). The free-stream part
/// uses the closed-form integral of the sine series, the slipstream excess
/// uses the trapezoidal rule.
inline double lift_coefficient(const LLTSolution& sol) {
    const double base = units::pi * sol.aspect_ratio() * (sol.a_n.empty() ? 0.0 : sol.a_n[0]);
    std::vector<double> f(sol.y.size());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = (sol.local_speed[i] - sol.v_inf) * sol.gamma[i];
    return base + span_integral(sol, f) / (0.5 * sol.v_inf * sol.v_inf * sol.area);
}

/// Untwisted wing with chord c0 sqrt(1 - (y/s)^2); the reference case for
/// elliptic loading.
struct EllipticWing {
    double semi_span = 0.0;
    double root_chord = 0.0;
    double twist_const = 0.0;  // rad

    double chord(double t) const { return root_chord * std::sqrt(std::max(0.0, 1.0 - t * t)); }
    double twist(double) const { return twist_const; }
    double span() const { return 2.0 * semi_span; }
    double area() const { return units::pi * semi_span * root_chord / 2.0; }
    double aspect_ratio() const { return span() * span() / area(); }
    void validate() const {
        if (!(semi_span > 0.0) || !(root_chord > 0.0)) throw ValidationError("elliptic wing needs positive size");
    }
};

/// Solver bound to one geometry, polar, slipstream and speed. The system is
/// linear in the Fourier coefficients and affine in the geometric angle of
/// attack, so one factorization serves every angle.
///
/// `Wing` provides semi_span, span(), area(), chord(t), twist(t) and
/// validate(), with t = |y| / semi_span.
template <class Wing>
class BasicLiftingLineSolver {
public:
    BasicLiftingLineSolver(const Wing& planform, const AerofoilPolar& polar, const SlipstreamProfile* slip,
                      double v_inf, LltSettings settings = {})
        : planform_(planform), polar_(&polar), v_inf_(v_inf), settings_(settings) {
        planform_.validate();
        if (!(v_inf_ > 0.0)) throw ValidationError("free-stream speed must be positive");
        if (settings_.n_modes < 1 || settings_.n_collocation < 1) {
            throw ValidationError("collocation and mode counts must be positive");
        }
        if (settings_.n_modes > settings_.n_collocation) {
            throw ValidationError("number of modes exceeds number of collocation points");
        }
        if (slip && (slip->y_min() < -planform_.semi_span - 1e-12 || slip->y_max() > planform_.semi_span + 1e-12)) {
            throw ValidationError("slipstream extent exceeds the wing span");
        }
        blf_ = polar.blf_or_throw();
        build(slip);
    }

    const Wing& planform() const { return planform_; }
    const LltSettings& settings() const { return settings_; }

    /// CL(alpha) = cl_zero + cl_slope * alpha exactly.
    double cl_zero() const { return cl_zero_; }
    double cl_slope() const { return cl_slope_; }

    double alpha_for_cl(double target) const { return (target - cl_zero_) / cl_slope_; }

    LLTSolution solve(double alpha_geo) const {
        const int ncol = settings_.n_collocation;
        const int nm = settings_.n_modes;
        const Eigen::VectorXd a = coeff_base_ + alpha_geo * coeff_unit_;
        const Eigen::VectorXd rhs = rhs_base_ + Eigen::VectorXd::Constant(ncol, alpha_geo);
        const double residual = (matrix_ * a - rhs).lpNorm<Eigen::Infinity>();

        LLTSolution sol;
        sol.v_inf = v_inf_;
        sol.semi_span = planform_.semi_span;
        sol.area = planform_.area();
        sol.alpha_geo = alpha_geo;
        sol.residual = residual;
        sol.a_n.assign(a.data(), a.data() + nm);
        const double b = planform_.span();
        const std::size_t npts = static_cast<std::size_t>(ncol) + 1;
        sol.theta.resize(npts);
        sol.y.resize(npts);
        sol.chord.resize(npts);
        sol.twist.resize(npts);
        sol.local_speed.resize(npts);
        sol.gamma.resize(npts);
        sol.alpha_eff.resize(npts);
        sol.alpha_downwash.resize(npts);
        sol.alpha_prop.resize(npts);
        sol.cl_span.resize(npts);
        sol.cd_span.resize(npts);
        // Station i = 0 is the root (k = ncol), i = ncol is the tip (theta = 0).
        for (std::size_t i = 0; i < npts; ++i) {
            const std::size_t k = npts - 1 - i;
            const double th = theta_[k];
            double g = 0.0, ai = 0.0;
            for (int j = 0; j < nm; ++j) {
                const double n = 2.0 * j + 1.0;
                if (k == 0) {
                    ai += n * n * a[j];  // sin(n th)/sin(th) -> n at the tip
                } else {
                    const double snt = std::sin(n * th);
                    g += a[j] * snt;
                    ai += n * a[j] * snt / std::sin(th);
                }
            }
            g *= 2.0 * b * v_inf_;
            sol.theta[i] = th;
            sol.y[i] = y_[k];
            sol.chord[i] = chord_[k];
            sol.twist[i] = twist_[k];
            sol.local_speed[i] = speed_[k];
            sol.gamma[i] = g;
            sol.alpha_downwash[i] = ai;
            sol.alpha_prop[i] = alpha_prop_[k];
            sol.alpha_eff[i] = alpha_geo + twist_[k] - ai - alpha_prop_[k];
            sol.cl_span[i] = chord_[k] > 0.0 ? 2.0 * g / (speed_[k] * chord_[k]) : 0.0;
            sol.cd_span[i] = polar_->cd_of_cl(sol.cl_span[i]);
        }
        sol.CL = lift_coefficient(sol);
        sol.CDi = induced_drag(sol);
        sol.Cf = profile_drag(sol);
        sol.CD = sol.CDi + sol.Cf;
        sol.endurance = sol.CL / sol.CD;

        const double stall_edge = blf_.fit_window_deg[0] * units::deg_to_rad;
        int below = 0;
        for (std::size_t i = 0; i + 1 < npts; ++i) below += sol.alpha_eff[i] < stall_edge ? 1 : 0;
        if (below > 0) {
            sol.warnings.push_back(std::to_string(below) + " stations have effective incidence below " +
                                   csv::format(blf_.fit_window_deg[0]) +
                                   " deg where the linear lift model departs from the section data");
        }
        return sol;
    }

private:
    void build(const SlipstreamProfile* slip) {
        const int ncol = settings_.n_collocation;
        const int nm = settings_.n_modes;
        const double s = planform_.semi_span;
        const double b = planform_.span();
        const std::size_t npts = static_cast<std::size_t>(ncol) + 1;
        theta_.resize(npts);
        y_.resize(npts);
        chord_.resize(npts);
        twist_.resize(npts);
        speed_.resize(npts);
        alpha_prop_.resize(npts);
        for (std::size_t k = 0; k < npts; ++k) {
            const double th = (k == npts - 1) ? units::pi / 2.0
                                              : static_cast<double>(k) * units::pi / (2.0 * ncol);
            theta_[k] = th;
            y_[k] = (k == npts - 1) ? 0.0 : s * std::cos(th);
            if (k == 0) y_[k] = s;
            const double t = std::min(y_[k] / s, 1.0);
            chord_[k] = planform_.chord(t);
            twist_[k] = planform_.twist(t);
        }
        // Each station takes the slipstream mean over its own strip, so jet
        // edges narrower than the station spacing are neither missed nor
        // over-weighted.
        for (std::size_t k = 0; k < npts; ++k) {
            SlipstreamSample ss;
            if (slip) {
                const double hi = k == 0 ? s : 0.5 * (y_[k - 1] + y_[k]);
                const double lo = k == npts - 1 ? 0.0 : 0.5 * (y_[k] + y_[k + 1]);
                ss = slip->average(lo, hi);
            }
            const double ux = v_inf_ + ss.u;
            speed_[k] = std::hypot(ux, ss.w);
            alpha_prop_[k] = std::atan2(ss.w, ux);
        }
        matrix_.resize(ncol, nm);
        rhs_base_.resize(ncol);
        for (int r = 0; r < ncol; ++r) {
            const std::size_t k = static_cast<std::size_t>(r) + 1;
            const double th = theta_[k];
            const double mu = 4.0 * b * v_inf_ / (blf_.a0 * chord_[k] * speed_[k]);
            const double sth = std::sin(th);
            for (int j = 0; j < nm; ++j) {
                const double n = 2.0 * j + 1.0;
                const double snt = std::sin(n * th);
                matrix_(r, j) = snt * (mu + n / sth);
            }
            rhs_base_(r) = twist_[k] - alpha_prop_[k] - blf_.alpha0;
        }
        const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(matrix_);
        if (qr.rank() < nm) throw SolverError("collocation matrix is rank deficient");
        coeff_base_ = qr.solve(rhs_base_);
        coeff_unit_ = qr.solve(Eigen::VectorXd::Ones(ncol));

        // CL is affine in alpha: evaluate at two angles.
        cl_zero_ = solve_cl_only(coeff_base_);
        cl_slope_ = solve_cl_only(coeff_base_ + coeff_unit_) - cl_zero_;
        if (!(std::abs(cl_slope_) > 0.0)) throw SolverError("wing lift does not respond to incidence");
    }

    double solve_cl_only(const Eigen::VectorXd& a) const {
        LLTSolution sol;
        sol.v_inf = v_inf_;
        sol.semi_span = planform_.semi_span;
        sol.area = planform_.area();
        sol.a_n.assign(a.data(), a.data() + a.size());
        const double b = planform_.span();
        const std::size_t npts = theta_.size();
        sol.y.resize(npts);
        sol.gamma.resize(npts);
        sol.local_speed.resize(npts);
        for (std::size_t i = 0; i < npts; ++i) {
            const std::size_t k = npts - 1 - i;
            double g = 0.0;
            if (k != 0) {
                for (Eigen::Index j = 0; j < a.size(); ++j) g += a[j] * std::sin((2.0 * j + 1.0) * theta_[k]);
            }
            sol.y[i] = y_[k];
            sol.gamma[i] = 2.0 * b * v_inf_ * g;
            sol.local_speed[i] = speed_[k];
        }
        return lift_coefficient(sol);
    }

    Wing planform_;
    const AerofoilPolar* polar_;
    LinearLiftModel blf_;
    double v_inf_;
    LltSettings settings_;
    // Station data indexed by k = 0 (tip) .. ncol (root).
    std::vector<double> theta_, y_, chord_, twist_, speed_, alpha_prop_;
    Eigen::MatrixXd matrix_;
    Eigen::VectorXd rhs_base_, coeff_base_, coeff_unit_;
    double cl_zero_ = 0.0, cl_slope_ = 0.0;
};

using LiftingLineSolver = BasicLiftingLineSolver<WingPlanform>;

/// One-shot solve at `cond.alpha_geo`.
template <class Wing>
LLTSolution solve(const Wing& planform, const AerofoilPolar& polar, const SlipstreamProfile* slip,
                  const FlightCondition& cond, LltSettings settings = {}) {
    cond.validate();
    BasicLiftingLineSolver<Wing> solver(planform, polar, slip, cond.v_inf, settings);
    return solver.solve(cond.alpha_geo);
}

struct PolarSweepRow {
    double alpha = 0.0;  // rad
    double CL = 0.0, CDi = 0.0, Cf = 0.0, CD = 0.0;
};

template <class Wing>
std::vector<PolarSweepRow> wing_polar_sweep(const Wing& planform, const AerofoilPolar& polar,
                                            const SlipstreamProfile* slip, const FlightCondition& cond,
                                            const std::vector<double>& alphas, LltSettings settings = {}) {
    if (alphas.empty()) throw ValidationError("empty angle-of-attack range");
    cond.validate();
    BasicLiftingLineSolver<Wing> solver(planform, polar, slip, cond.v_inf, settings);
    std::vector<PolarSweepRow> out;
    for (double a : alphas) {
        try {
            const auto sol = solver.solve(a);
            out.push_back({a, sol.CL, sol.CDi, sol.Cf, sol.CD});
        } catch (const Error& e) {
            throw SolverError("sweep failed at alpha = " + csv::format(a * units::rad_to_deg) + " deg: " + e.what());
        }
    }
    return out;
}

/// Evenly spaced angles (degrees in, radians out) including both ends.
inline std::vector<double> alpha_range_deg(double lo, double hi, double step) {
    if (!(step > 0.0) || !(hi >= lo)) throw ValidationError("invalid angle-of-attack range");
    std::vector<double> out;
    const int n = static_cast<int>(std::floor((hi - lo) / step + 1e-9));
    for (int i = 0; i <= n; ++i) out.push_back((lo + i * step) * units::deg_to_rad);
    return out;
}

inline std::string format_polar_sweep(const std::vector<PolarSweepRow>& rows) {
    std::ostringstream out;
    out << "alpha_deg,CL,CDi,Cf,CD\n";
    for (const auto& r : rows) {
        out << csv::format_fixed(r.alpha * units::rad_to_deg, 4) << ',' << csv::format(r.CL) << ','
            << csv::format(r.CDi) << ',' << csv::format(r.Cf) << ',' << csv::format(r.CD) << '\n';
    }
    return out.str();
}

/// Spanwise export; includes the normalized circulation Gamma / (V_inf s).
inline std::string format_spanwise(const LLTSolution& sol) {
    std::ostringstream out;
    out << "# CL=" << csv::format(sol.CL) << "\n# CDi=" << csv::format(sol.CDi) << "\n# Cf=" << csv::format(sol.Cf)
        << "\n# CD=" << csv::format(sol.CD) << "\n# alpha_geo_deg=" << csv::format(sol.alpha_geo * units::rad_to_deg)
        << "\n";
    out << "# gamma_norm = gamma / (V_inf * semi_span)\n";
    out << "y_m,chord_m,twist_deg,alpha_eff_deg,cl,cd,gamma_m2ps,gamma_norm\n";
    for (std::size_t i = 0; i < sol.y.size(); ++i) {
        out << csv::format(sol.y[i]) << ',' << csv::format(sol.chord[i]) << ','
            << csv::format(sol.twist[i] * units::rad_to_deg) << ','
            << csv::format(sol.alpha_eff[i] * units::rad_to_deg) << ',' << csv::format(sol.cl_span[i]) << ','
            << csv::format(sol.cd_span[i]) << ',' << csv::format(sol.gamma[i]) << ','
            << csv::format(sol.gamma[i] / (sol.v_inf * sol.semi_span)) << '\n';
    }
    return out.str();
}

}  // namespace propwing
