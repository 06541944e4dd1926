#pragma once

// Shared fixtures and independent reference implementations for the tests.

#include "propwing.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace testutil {

inline std::string data(const std::string& name) { return std::string(PROPWING_DATA_DIR) + "/" + name; }
inline std::string case_file(const std::string& name) { return std::string(PROPWING_CASES_DIR) + "/" + name; }

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& tag) {
    const auto dir = std::filesystem::temp_directory_path() / ("propwing_test_" + tag);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

/// Thin-aerofoil section: cl = 2 pi alpha over +-12 deg, constant drag.
inline propwing::AerofoilPolar thin_aerofoil(double cd = 0.01, double alpha0_deg = 0.0) {
    std::vector<double> a, cl, cdv;
    for (int d = -12; d <= 12; ++d) {
        a.push_back(d);
        cl.push_back(2.0 * propwing::units::pi * (d - alpha0_deg) * propwing::units::deg_to_rad);
        cdv.push_back(cd);
    }
    propwing::AerofoilPolar p("thin", 1e6, a, cl, cdv);
    return p.with_blf(propwing::fit_blf(p, {-10.0, 10.0}));
}

inline propwing::WingPlanform rectangle(double semi_span, double chord, double twist = 0.0) {
    propwing::WingPlanform p;
    p.semi_span = semi_span;
    p.chord_ctrl = {chord, chord, chord, chord};
    p.twist_ctrl = {twist, twist, twist, twist};
    return p;
}

/// de Casteljau evaluation of a cubic control polygon.
inline double de_casteljau(std::array<double, 4> c, double t) {
    for (int level = 3; level > 0; --level) {
        for (int i = 0; i < level; ++i) c[i] = (1.0 - t) * c[i] + t * c[i + 1];
    }
    return c[0];
}

/// Composite Simpson rule on [a, b] with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 2000) {
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

/// Least-squares line through (x, y) from the raw normal equations
/// [n sx; sx sxx] [b; m] = [sy; sxy], solved by Cramer's rule.
inline std::pair<double, double> normal_equations_line(const std::vector<double>& x, const std::vector<double>& y) {
    double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        n += 1;
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double det = n * sxx - sx * sx;
    const double slope = (n * sxy - sx * sy) / det;
    const double intercept = (sy * sxx - sx * sxy) / det;
    return {slope, intercept};
}

struct MonoplaneResult {
    double CL = 0.0, CDi = 0.0;
};

/// Glauert's monoplane equation with the full sine series (odd and even
/// modes) on a square collocation system over (0, pi):
///   sum_n A_n sin(n th) (mu + n / sin th) = alpha_eff_geo(th),
///   mu = 4 b / (a0 c).
inline MonoplaneResult glauert_monoplane(const std::function<double(double)>& chord_of_y,
                                         const std::function<double(double)>& twist_of_y, double semi_span,
                                         double a0, double alpha0, double alpha, int n_modes = 200) {
    const double b = 2.0 * semi_span;
    Eigen::MatrixXd m(n_modes, n_modes);
    Eigen::VectorXd rhs(n_modes);
    for (int k = 0; k < n_modes; ++k) {
        const double th = (k + 1) * propwing::units::pi / (n_modes + 1);
        const double y = -semi_span * std::cos(th);
        const double mu = 4.0 * b / (a0 * chord_of_y(y));
        for (int j = 0; j < n_modes; ++j) {
            const double n = j + 1.0;
            m(k, j) = std::sin(n * th) * (mu + n / std::sin(th));
        }
        rhs(k) = alpha + twist_of_y(y) - alpha0;
    }
    const Eigen::VectorXd a = m.partialPivLu().solve(rhs);
    double area = 0.0;
    {
        const auto f = [&](double y) { return chord_of_y(y); };
        area = simpson(f, -semi_span, semi_span, 4000);
    }
    const double ar = b * b / area;
    MonoplaneResult r;
    r.CL = propwing::units::pi * ar * a(0);
    double s = 0.0;
    for (int j = 0; j < n_modes; ++j) s += (j + 1.0) * a(j) * a(j);
    r.CDi = propwing::units::pi * ar * s;
    return r;
}

/// The shipped W0 environment (polar, slipstream, trimmed control wing).
inline propwing::CaseEnvironment avion_environment(const std::string& cfg = "w2.cfg") {
    return propwing::prepare_case(propwing::load_case(case_file(cfg)));
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace testutil
