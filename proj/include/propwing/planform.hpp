#pragma once

// Symmetric wing geometry: one cubic Bezier per semi-span for chord and for
// twist, over the normalized coordinate t = |y| / semi_span (0 root, 1 tip).

#include "propwing/csv.hpp"
#include "propwing/errors.hpp"
#include "propwing/units.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

namespace propwing {

using BezierControls = std::array<double, 4>;

/// B(t) = sum_k C(3,k) t^k (1-t)^(3-k) ctrl[k]
inline double bezier(const BezierControls& ctrl, double t) {
    const double s = 1.0 - t;
    return s * s * s * ctrl[0] + 3.0 * s * s * t * ctrl[1] + 3.0 * s * t * t * ctrl[2] + t * t * t * ctrl[3];
}

/// Control polygon of the straight line from `a` to `b` (exact degree elevation).
constexpr BezierControls elevate_line(double a, double b) {
    return {a, a + (b - a) / 3.0, a + 2.0 * (b - a) / 3.0, b};
}

namespace detail {

// 64-point Gauss-Legendre rule on [0, 1].
inline const std::vector<std::pair<double, double>>& gauss64() {
    static const std::vector<std::pair<double, double>> rule = [] {
        constexpr int n = 64;
        std::vector<std::pair<double, double>> out;
        for (int i = 1; i <= n; ++i) {
            double x = std::cos(units::pi * (i - 0.25) / (n + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= n; ++k) {
                    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16) break;
            }
            const double w = 2.0 / ((1.0 - x * x) * dp * dp);
            out.emplace_back(0.5 * (x + 1.0), 0.5 * w);
        }
        return out;
    }();
    return rule;
}

}  // namespace detail

struct WingPlanform {
    double semi_span = 0.0;          // m
    BezierControls chord_ctrl{};     // m
    BezierControls twist_ctrl{};     // rad
    double sweep_le = 0.0;           // rad, carried as metadata only
    double alpha_geo = 0.0;          // rad

    double chord(double t) const { return bezier(chord_ctrl, t); }
    double twist(double t) const { return bezier(twist_ctrl, t); }
    double chord_at_y(double y) const { return chord(std::min(std::abs(y) / semi_span, 1.0)); }
    double twist_at_y(double y) const { return twist(std::min(std::abs(y) / semi_span, 1.0)); }

    double span() const { return 2.0 * semi_span; }

    /// Exact: the mean of a cubic Bezier over [0,1] is the mean of its controls.
    double area() const {
        return 2.0 * semi_span * (chord_ctrl[0] + chord_ctrl[1] + chord_ctrl[2] + chord_ctrl[3]) / 4.0;
    }
    double aspect_ratio() const { return span() * span() / area(); }

    /// Mean aerodynamic chord (2/S) * integral_0^s c^2 dy.
    double mac() const {
        double s = 0.0;
        for (const auto& [t, w] : detail::gauss64()) s += w * chord(t) * chord(t);
        return 2.0 * semi_span * s / area();
    }

    /// Positive chord everywhere: control-hull bound, else 64 samples.
    bool chord_positive() const {
        if (*std::min_element(chord_ctrl.begin(), chord_ctrl.end()) > 0.0) return true;
        for (int i = 0; i <= 63; ++i) {
            if (!(chord(i / 63.0) > 0.0)) return false;
        }
        return true;
    }

    void validate() const {
        if (!(semi_span > 0.0)) throw ValidationError("semi-span must be positive");
        for (double v : chord_ctrl) {
            if (!std::isfinite(v)) throw ValidationError("chord control is not finite");
        }
        for (double v : twist_ctrl) {
            if (!std::isfinite(v)) throw ValidationError("twist control is not finite");
        }
        if (!chord_positive()) throw ValidationError("chord distribution is not positive along the span");
    }
};

inline void check_unit_interval(double t) {
    if (!(t >= 0.0 && t <= 1.0)) throw ValidationError("normalized span coordinate " + csv::format(t) + " outside [0, 1]");
}

inline double eval_chord(const WingPlanform& p, double t) {
    check_unit_interval(t);
    return p.chord(t);
}

inline double eval_twist(const WingPlanform& p, double t) {
    check_unit_interval(t);
    return p.twist(t);
}

inline double wing_area(const WingPlanform& p) { return p.area(); }

struct ControlWingSpec {
    double span = 0.0;        // full span, m
    double area = 0.0;        // m^2
    double root_chord = 0.0;  // m
    double tip_chord = 0.0;   // m
    double washout = 0.0;     // rad, tip twist relative to root (linear)
    double alpha_geo = 0.0;   // rad
    double sweep_le = 0.0;    // rad
};

/// Trapezoidal wing with linear washout, both distributions reproduced
/// exactly by degree-elevated control polygons.
inline WingPlanform control_wing(const ControlWingSpec& spec) {
    if (!(spec.span > 0.0) || !(spec.area > 0.0)) throw ValidationError("control wing needs positive span and area");
    if (!(spec.root_chord > 0.0) || !(spec.tip_chord > 0.0)) {
        throw ValidationError("control wing needs positive root and tip chords");
    }
    const double trapezoid_area = 0.5 * spec.span * (spec.root_chord + spec.tip_chord);
    if (std::abs(trapezoid_area - spec.area) > 1e-6 * spec.area) {
        throw ValidationError("area " + csv::format(spec.area) + " m^2 is inconsistent with root/tip chords (" +
                              csv::format(trapezoid_area) + " m^2 for a trapezoid)");
    }
    WingPlanform p;
    p.semi_span = 0.5 * spec.span;
    p.chord_ctrl = elevate_line(spec.root_chord, spec.tip_chord);
    p.twist_ctrl = elevate_line(0.0, spec.washout);
    p.sweep_le = spec.sweep_le;
    p.alpha_geo = spec.alpha_geo;
    p.validate();
    return p;
}

/// Tip chord that closes the trapezoid area for a given root chord.
inline double trapezoid_tip_chord(double span, double area, double root_chord) {
    return 2.0 * area / span - root_chord;
}

struct GeometrySnapshot {
    std::vector<double> y, chord, twist;
    double area = 0.0, aspect_ratio = 0.0, mac = 0.0;
};

inline GeometrySnapshot snapshot(const WingPlanform& p, int stations = 101) {
    GeometrySnapshot g;
    for (int i = 0; i < stations; ++i) {
        const double t = static_cast<double>(i) / (stations - 1);
        g.y.push_back(t * p.semi_span);
        g.chord.push_back(p.chord(t));
        g.twist.push_back(p.twist(t));
    }
    g.area = p.area();
    g.aspect_ratio = p.aspect_ratio();
    g.mac = p.mac();
    return g;
}

/// Planform export: `y_m,chord_m,twist_deg` at 101 semi-span stations.
inline std::string export_planform(const WingPlanform& p) {
    const auto g = snapshot(p);
    std::ostringstream out;
    out << "# area_m2=" << csv::format(g.area) << "\n";
    out << "# AR=" << csv::format(g.aspect_ratio) << "\n";
    out << "# mac_m=" << csv::format(g.mac) << "\n";
    out << "# alpha_geo_deg=" << csv::format(p.alpha_geo * units::rad_to_deg) << "\n";
    out << "y_m,chord_m,twist_deg\n";
    for (std::size_t i = 0; i < g.y.size(); ++i) {
        out << csv::format(g.y[i]) << ',' << csv::format(g.chord[i]) << ','
            << csv::format(g.twist[i] * units::rad_to_deg) << '\n';
    }
    return out.str();
}

/// Rebuilds a planform from an exported table by least-squares fitting the
/// cubic Bezier controls to the sampled stations.
inline WingPlanform import_planform(std::istream& in) {
    const auto table = csv::read(in, {"y_m", "chord_m", "twist_deg"});
    if (table.rows.size() < 4) throw ValidationError("planform table needs at least 4 stations");
    const double s = table.rows.back()[0];
    if (!(s > 0.0)) throw ValidationError("planform table must end at the tip (y > 0)");
    const auto m = static_cast<Eigen::Index>(table.rows.size());
    Eigen::MatrixXd basis(m, 4);
    Eigen::MatrixXd rhs(m, 2);
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto& row = table.rows[static_cast<std::size_t>(i)];
        const double t = row[0] / s;
        const double u = 1.0 - t;
        basis(i, 0) = u * u * u;
        basis(i, 1) = 3.0 * u * u * t;
        basis(i, 2) = 3.0 * u * t * t;
        basis(i, 3) = t * t * t;
        rhs(i, 0) = row[1];
        rhs(i, 1) = row[2] * units::deg_to_rad;
    }
    const Eigen::MatrixXd ctrl = basis.colPivHouseholderQr().solve(rhs);
    WingPlanform p;
    p.semi_span = s;
    for (int k = 0; k < 4; ++k) {
        p.chord_ctrl[static_cast<std::size_t>(k)] = ctrl(k, 0);
        p.twist_ctrl[static_cast<std::size_t>(k)] = ctrl(k, 1);
    }
    // Endpoint values are sampled exactly; keep them bit-identical.
    p.chord_ctrl[0] = table.rows.front()[1];
    p.chord_ctrl[3] = table.rows.back()[1];
    if (auto it = table.meta.find("alpha_geo_deg"); it != table.meta.end()) {
        p.alpha_geo = csv::parse_double_or_throw(it->second, "alpha_geo_deg") * units::deg_to_rad;
    }
    p.validate();
    return p;
}

}  // namespace propwing
