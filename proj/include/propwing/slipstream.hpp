#pragma once

// Propeller slipstream at the wing quarter-chord plane. Profiles come either
// from tabulated measurements or from a blade-element-momentum (BEM) model of
// the propeller; the BEM solution also yields thrust/torque coefficients.

#include "propwing/csv.hpp"
#include "propwing/errors.hpp"
#include "propwing/polar.hpp"
#include "propwing/units.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <istream>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace propwing {

struct SlipstreamSample {
    double u = 0.0;  // axial increment, m/s
    double w = 0.0;  // downwash, m/s, positive down
};

/// Spanwise velocity increments; identically zero outside [y.front(), y.back()].
class SlipstreamProfile {
public:
    SlipstreamProfile(std::vector<double> y, std::vector<double> u_axial, std::vector<double> w_down,
                      double station_x = 1.0)
        : y_(std::move(y)), u_(std::move(u_axial)), w_(std::move(w_down)), station_x_(station_x) {
        if (y_.size() < 2) throw ValidationError("slipstream profile needs at least 2 stations");
        if (u_.size() != y_.size() || w_.size() != y_.size()) {
            throw ValidationError("slipstream profile: column lengths differ");
        }
        for (std::size_t i = 0; i < y_.size(); ++i) {
            if (!std::isfinite(y_[i]) || !std::isfinite(u_[i]) || !std::isfinite(w_[i])) {
                throw ValidationError("slipstream profile: non-finite value");
            }
            if (i > 0 && !(y_[i] > y_[i - 1])) {
                throw ValidationError("slipstream profile: y stations must be strictly increasing");
            }
        }
        if (!(station_x_ >= 0.0)) throw ValidationError("slipstream profile: station_x must be non-negative");
    }

    const std::vector<double>& y() const { return y_; }
    const std::vector<double>& u_axial() const { return u_; }
    const std::vector<double>& w_down() const { return w_; }
    double station_x() const { return station_x_; }
    double y_min() const { return y_.front(); }
    double y_max() const { return y_.back(); }

    SlipstreamSample sample(double y) const {
        if (y < y_.front() || y > y_.back()) return {};
        std::size_t i =
            static_cast<std::size_t>(std::upper_bound(y_.begin(), y_.end(), y) - y_.begin());
        if (i >= y_.size()) return {u_.back(), w_.back()};
        --i;
        const double t = (y - y_[i]) / (y_[i + 1] - y_[i]);
        return {u_[i] + t * (u_[i + 1] - u_[i]), w_[i] + t * (w_[i + 1] - w_[i])};
    }

    /// Exact mean of the piecewise-linear profile over [a, b], zero outside
    /// the stations. Falls back to `sample(a)` for an empty interval.
    SlipstreamSample average(double a, double b) const {
        if (!(b > a)) return sample(a);
        std::vector<double> pts{a};
        for (double yi : y_) {
            if (yi > a && yi < b) pts.push_back(yi);
        }
        pts.push_back(b);
        SlipstreamSample sum;
        for (std::size_t i = 1; i < pts.size(); ++i) {
            const double p = pts[i - 1], q = pts[i];
            const double mid = 0.5 * (p + q);
            if (mid < y_.front() || mid > y_.back()) continue;
            const auto sp = sample(std::max(p, y_.front())), sq = sample(std::min(q, y_.back()));
            const double h = std::min(q, y_.back()) - std::max(p, y_.front());
            sum.u += 0.5 * h * (sp.u + sq.u);
            sum.w += 0.5 * h * (sp.w + sq.w);
        }
        return {sum.u / (b - a), sum.w / (b - a)};
    }

private:
    std::vector<double> y_, u_, w_;
    double station_x_;
};

inline SlipstreamSample sample_slipstream(const SlipstreamProfile& profile, double y) { return profile.sample(y); }

inline SlipstreamProfile load_slipstream(std::istream& in) {
    const auto table = csv::read(in, {"y_m", "u_axial_mps", "w_down_mps"});
    if (table.rows.size() < 2) throw ValidationError("slipstream file needs at least 2 stations");
    std::vector<double> y, u, w;
    for (const auto& r : table.rows) {
        y.push_back(r[0]);
        u.push_back(r[1]);
        w.push_back(r[2]);
    }
    double station_x = 1.0;
    if (auto it = table.meta.find("station_x_diameters"); it != table.meta.end()) {
        station_x = csv::parse_double_or_throw(it->second, "station_x_diameters");
    }
    return SlipstreamProfile(std::move(y), std::move(u), std::move(w), station_x);
}

inline SlipstreamProfile load_slipstream_file(const std::string& path) {
    auto in = csv::open_input(path);
    return load_slipstream(in);
}

inline std::string save_slipstream(const SlipstreamProfile& p, const std::string& provenance = {}) {
    std::ostringstream out;
    if (!provenance.empty()) out << "# " << provenance << "\n";
    out << "# station_x_diameters=" << csv::format(p.station_x()) << "\n";
    out << "y_m,u_axial_mps,w_down_mps\n";
    for (std::size_t i = 0; i < p.y().size(); ++i) {
        out << csv::format(p.y()[i]) << ',' << csv::format(p.u_axial()[i]) << ',' << csv::format(p.w_down()[i])
            << '\n';
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Propeller model

struct PropOperatingPoint {
    double v_inf = 0.0;  // m/s
    double n_rps = 0.0;  // rev/s
    double rho = 1.225;  // kg/m^3

    void validate() const {
        if (!(n_rps > 0.0)) throw ValidationError("propeller speed must be positive");
        if (!(rho > 0.0)) throw ValidationError("density must be positive");
        if (!(v_inf >= 0.0)) throw ValidationError("free-stream speed must be non-negative");
    }
};

struct PropellerGeometry {
    double diameter = 0.0;
    double hub_radius = 0.0;
    int n_blades = 2;
    std::vector<double> r;      // m
    std::vector<double> chord;  // m
    std::vector<double> twist;  // rad, blade pitch angle relative to the rotor plane
    std::shared_ptr<const AerofoilPolar> section_polar;

    double radius() const { return 0.5 * diameter; }

    void validate() const {
        if (!(diameter > 0.0)) throw ValidationError("propeller diameter must be positive");
        if (!(hub_radius >= 0.0 && hub_radius < radius())) {
            throw ValidationError("hub radius must lie in [0, D/2)");
        }
        if (n_blades < 1) throw ValidationError("propeller needs at least one blade");
        if (r.empty() || chord.size() != r.size() || twist.size() != r.size()) {
            throw ValidationError("propeller geometry: column lengths differ or are empty");
        }
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (!(r[i] > hub_radius) || r[i] > radius() * (1.0 + 1e-12)) {
                throw ValidationError("radial station " + csv::format(r[i]) + " outside (hub, D/2]");
            }
            if (i > 0 && !(r[i] > r[i - 1])) throw ValidationError("radial stations must be strictly increasing");
            if (!(chord[i] > 0.0)) throw ValidationError("blade chord must be positive");
        }
        if (!section_polar) throw ValidationError("propeller geometry has no section polar");
    }
};

/// Reads `r_m,chord_m,twist_deg` with `# diameter_m=`, `# hub_radius_m=` and
/// `# n_blades=` metadata lines.
inline PropellerGeometry load_propeller(std::istream& in, std::shared_ptr<const AerofoilPolar> polar) {
    const auto table = csv::read(in, {"r_m", "chord_m", "twist_deg"});
    auto meta = [&](const char* key) {
        const auto it = table.meta.find(key);
        if (it == table.meta.end()) throw ValidationError(std::string("propeller file missing '# ") + key + "='");
        return csv::parse_double_or_throw(it->second, key);
    };
    PropellerGeometry g;
    g.diameter = meta("diameter_m");
    g.hub_radius = meta("hub_radius_m");
    g.n_blades = static_cast<int>(std::lround(meta("n_blades")));
    for (const auto& row : table.rows) {
        g.r.push_back(row[0]);
        g.chord.push_back(row[1]);
        g.twist.push_back(row[2] * units::deg_to_rad);
    }
    g.section_polar = std::move(polar);
    g.validate();
    return g;
}

inline PropellerGeometry load_propeller_file(const std::string& path, std::shared_ptr<const AerofoilPolar> polar) {
    auto in = csv::open_input(path);
    return load_propeller(in, std::move(polar));
}

/// J = V / (n D)
inline double advance_ratio(const PropOperatingPoint& op, const PropellerGeometry& geom) {
    return op.v_inf / (op.n_rps * geom.diameter);
}

/// CT = T / (rho n^2 D^4)
inline double thrust_coefficient(double thrust, const PropOperatingPoint& op, const PropellerGeometry& geom) {
    const double d2 = geom.diameter * geom.diameter;
    return thrust / (op.rho * op.n_rps * op.n_rps * d2 * d2);
}

inline double tip_mach(const PropOperatingPoint& op, const PropellerGeometry& geom) {
    const double tip_speed = units::pi * op.n_rps * geom.diameter;
    return std::hypot(tip_speed, op.v_inf) / units::speed_of_sound;
}

struct BemSettings {
    double relaxation = 0.3;
    double tolerance = 1e-8;
    int max_iterations = 500;
};

struct BemSolution {
    double thrust = 0.0;  // N
    double torque = 0.0;  // N m
    std::vector<double> r;
    std::vector<double> a_axial;       // axial induction: disc axial speed V (1 + a)
    std::vector<double> a_tangential;  // swirl induction: blade-relative speed omega r (1 - a')
    std::vector<double> tip_loss;      // Prandtl factor F
    std::vector<double> alpha;         // section angle of attack, rad
    std::vector<double> dthrust_dr;    // N/m
    double residual = 0.0;
    int iterations = 0;
    std::vector<std::string> warnings;

    double ct(const PropOperatingPoint& op, const PropellerGeometry& g) const {
        return thrust_coefficient(thrust, op, g);
    }
    double cp(const PropOperatingPoint& op, const PropellerGeometry& g) const {
        const double d = g.diameter;
        return 2.0 * units::pi * op.n_rps * torque / (op.rho * op.n_rps * op.n_rps * op.n_rps * d * d * d * d * d);
    }
};

namespace detail {

inline double trapezoid(const std::vector<double>& x, const std::vector<double>& f) {
    double s = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (x[i] - x[i - 1]) * (f[i] + f[i - 1]);
    return s;
}

}  // namespace detail

/// Classical blade-element-momentum solution with Prandtl tip loss. Induction
/// factors are found by relaxed fixed-point iteration at every station.
inline BemSolution run_bem(const PropellerGeometry& geom, const PropOperatingPoint& op,
                           const BemSettings& settings = {}) {
    geom.validate();
    op.validate();
    if (geom.r.size() < 8) throw ValidationError("BEM needs at least 8 radial stations");
    if (!(op.v_inf > 0.0)) {
        throw ValidationError("BEM induction-factor formulation requires a positive free-stream speed");
    }
    const auto& polar = *geom.section_polar;
    const double omega = 2.0 * units::pi * op.n_rps;
    const double R = geom.radius();
    const double B = static_cast<double>(geom.n_blades);
    const std::size_t n = geom.r.size();

    BemSolution sol;
    sol.r = geom.r;
    sol.a_axial.assign(n, 0.0);
    sol.a_tangential.assign(n, 0.0);
    sol.tip_loss.assign(n, 1.0);
    sol.alpha.assign(n, 0.0);
    sol.dthrust_dr.assign(n, 0.0);
    std::vector<double> dq(n, 0.0);

    if (tip_mach(op, geom) > 0.6) {
        sol.warnings.push_back("tip Mach number " + csv::format_fixed(tip_mach(op, geom), 3) +
                               " exceeds 0.6; incompressible model is inaccurate");
    }

    for (std::size_t i = 0; i < n; ++i) {
        const double r = geom.r[i];
        const double sigma = B * geom.chord[i] / (2.0 * units::pi * r);
        double a = 0.0, ap = 0.0, F = 1.0, phi = 0.0, res = 0.0;
        int it = 0;
        const bool at_tip = (R - r) <= 1e-12 * R;
        const auto tip_loss = [&](double ph) {
            const double f = 0.5 * B * (R - r) / (r * std::abs(std::sin(ph)));
            return 2.0 / units::pi * std::acos(std::clamp(std::exp(-f), 0.0, 1.0));
        };
        if (!at_tip) {
            // Post-stall sections can turn the fixed point into a limit cycle;
            // those stations are retried with stronger under-relaxation.
            for (double relax = settings.relaxation; relax >= 0.01 * settings.relaxation; relax *= 0.2) {
                a = 0.0;
                ap = 0.0;
                const int max_it = relax == settings.relaxation
                                       ? settings.max_iterations
                                       : static_cast<int>(settings.max_iterations * settings.relaxation / relax);
                for (it = 1; it <= max_it; ++it) {
                    const double va = op.v_inf * (1.0 + a);
                    const double vt = omega * r * (1.0 - ap);
                    phi = std::atan2(va, vt);
                    const double sphi = std::sin(phi), cphi = std::cos(phi);
                    F = tip_loss(phi);
                    const double alpha = geom.twist[i] - phi;
                    const double cl = polar.cl_of_alpha(alpha, LiftMode::tabulated);
                    const double cd = polar.cd_of_cl(cl);
                    const double cn = cl * cphi - cd * sphi;
                    const double ct = cl * sphi + cd * cphi;
                    // Momentum balance per annulus, tip loss scaling the blade loads:
                    //   a / (1 + a) = F sigma cn / (4 sin^2 phi)
                    //   a' / (1 - a') = F sigma ct / (4 sin phi cos phi)
                    const double k_ax = F * sigma * cn / (4.0 * sphi * sphi);
                    const double k_tg = F * sigma * ct / (4.0 * sphi * cphi);
                    // k_ax >= 1 has no momentum solution; capping it lets an
                    // early overshoot in phi recover instead of diverging.
                    const double k_cap = std::min(k_ax, 0.9);
                    const double a_new = k_cap / (1.0 - k_cap);
                    const double ap_new = k_tg / (1.0 + k_tg);
                    res = std::max(std::abs(a_new - a), std::abs(ap_new - ap));
                    if (!std::isfinite(res)) {
                        res = std::numeric_limits<double>::infinity();
                        break;
                    }
                    a += relax * (a_new - a);
                    ap += relax * (ap_new - ap);
                    if (res < settings.tolerance) break;
                }
                if (res < settings.tolerance) break;
            }
            if (!(res < settings.tolerance)) {
                throw ConvergenceError("BEM did not converge at r = " + csv::format(r) + " m", res);
            }
            if (a < -0.5 || a >= 1.0 || ap < -0.5 || ap >= 1.0) {
                throw ConvergenceError("BEM induction factor left the physical range at r = " + csv::format(r) +
                                           " m",
                                       a);
            }
            // Recompute the section state at the converged factors.
            const double va = op.v_inf * (1.0 + a);
            const double vt = omega * r * (1.0 - ap);
            phi = std::atan2(va, vt);
            const double alpha = geom.twist[i] - phi;
            const double cl = polar.cl_of_alpha(alpha, LiftMode::tabulated);
            const double cd = polar.cd_of_cl(cl);
            const double w2 = va * va + vt * vt;
            F = tip_loss(phi);
            const double q = 0.5 * op.rho * w2 * B * geom.chord[i] * F;
            sol.dthrust_dr[i] = q * (cl * std::cos(phi) - cd * std::sin(phi));
            dq[i] = q * (cl * std::sin(phi) + cd * std::cos(phi)) * r;
            sol.alpha[i] = alpha;
        } else {
            // Bound circulation vanishes at the tip: no load, no induction.
            F = 0.0;
        }
        sol.a_axial[i] = a;
        sol.a_tangential[i] = ap;
        sol.tip_loss[i] = F;
        sol.residual = std::max(sol.residual, res);
        sol.iterations = std::max(sol.iterations, it);
    }
    sol.thrust = detail::trapezoid(geom.r, sol.dthrust_dr);
    sol.torque = detail::trapezoid(geom.r, dq);
    return sol;
}

enum class RotationSense { up_inboard, up_outboard };

/// Multiplier from disc induction to the local slipstream increment at
/// `station_x` diameters downstream (1 at the disc, 2 in the far wake).
inline double development_factor(double station_x) { return station_x >= 1.0 ? 2.0 : 1.0 + station_x; }

/// Maps the BEM disc induction onto the wing plane through the propeller axis.
/// Station coordinates are symmetric about `prop_y_center`.
inline SlipstreamProfile slipstream_from_bem(const BemSolution& bem, const PropellerGeometry& geom,
                                             const PropOperatingPoint& op, double prop_y_center,
                                             RotationSense sense, double station_x, double semi_span) {
    const double R = geom.radius();
    if (prop_y_center - R < -semi_span || prop_y_center + R > semi_span) {
        throw ValidationError("propeller disc projection lies outside the wing span");
    }
    if (!(station_x >= 0.0)) throw ValidationError("station_x must be non-negative");
    const double f_dev = development_factor(station_x);
    const double omega = 2.0 * units::pi * op.n_rps;

    // Annulus-averaged increments, radius ascending from the axis.
    std::vector<double> rr, ua, vt;
    rr.push_back(0.0);
    ua.push_back(0.0);
    vt.push_back(0.0);
    if (geom.hub_radius > 0.0) {
        rr.push_back(geom.hub_radius);
        ua.push_back(0.0);
        vt.push_back(0.0);
    }
    for (std::size_t i = 0; i < bem.r.size(); ++i) {
        rr.push_back(bem.r[i]);
        ua.push_back(f_dev * bem.a_axial[i] * op.v_inf);
        vt.push_back(f_dev * bem.a_tangential[i] * omega * bem.r[i]);
    }
    if (rr.back() < R) {
        rr.push_back(R);
        ua.push_back(0.0);
        vt.push_back(0.0);
    }
    // Side sign for swirl: with up_inboard, the inboard side (y < center on a
    // positive-y propeller) sees upwash, i.e. negative w_down.
    const double inboard_sign = (sense == RotationSense::up_inboard ? -1.0 : 1.0) * (prop_y_center >= 0.0 ? 1.0 : -1.0);

    std::vector<double> y, u, w;
    for (std::size_t k = rr.size(); k-- > 1;) {
        y.push_back(prop_y_center - rr[k]);
        u.push_back(ua[k]);
        w.push_back(inboard_sign * vt[k]);
    }
    y.push_back(prop_y_center);
    u.push_back(ua[0]);
    w.push_back(0.0);
    for (std::size_t k = 1; k < rr.size(); ++k) {
        y.push_back(prop_y_center + rr[k]);
        u.push_back(ua[k]);
        w.push_back(-inboard_sign * vt[k]);
    }
    return SlipstreamProfile(std::move(y), std::move(u), std::move(w), station_x);
}

}  // namespace propwing
