#pragma once

// Aerofoil section data at a single Reynolds number: tabulated lift and drag,
// a best-linear-fit lift model, and the interpolation rules used by the wing
// and propeller solvers. Angles are radians internally and degrees in files.

#include "propwing/csv.hpp"
#include "propwing/errors.hpp"
#include "propwing/units.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <istream>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace propwing {

/// Linear lift law cl = a0 * (alpha - alpha0).
struct LinearLiftModel {
    double a0 = 0.0;                          // per radian
    double alpha0 = 0.0;                      // radians
    std::array<double, 2> fit_window_deg{};   // [lo, hi]

    double cl(double alpha) const { return a0 * (alpha - alpha0); }
};

enum class LiftMode { tabulated, blf };

class AerofoilPolar {
public:
    AerofoilPolar(std::string name, double reynolds, std::vector<double> alpha_deg, std::vector<double> cl,
                  std::vector<double> cd, std::optional<LinearLiftModel> blf = std::nullopt)
        : name_(std::move(name)),
          reynolds_(reynolds),
          alpha_deg_(std::move(alpha_deg)),
          cl_(std::move(cl)),
          cd_(std::move(cd)),
          blf_(blf) {
        validate();
        build_drag_branch();
    }

    const std::string& name() const { return name_; }
    double reynolds() const { return reynolds_; }
    const std::vector<double>& alpha_deg() const { return alpha_deg_; }
    const std::vector<double>& cl() const { return cl_; }
    const std::vector<double>& cd() const { return cd_; }
    std::size_t size() const { return alpha_deg_.size(); }

    const std::optional<LinearLiftModel>& blf() const { return blf_; }
    const LinearLiftModel& blf_or_throw() const {
        if (!blf_) throw ValidationError("polar '" + name_ + "' has no fitted linear lift model");
        return *blf_;
    }

    AerofoilPolar with_blf(const LinearLiftModel& model) const {
        const double lo = alpha_deg_.front(), hi = alpha_deg_.back();
        if (model.fit_window_deg[0] < lo || model.fit_window_deg[1] > hi) {
            throw ValidationError("fit window outside polar data range");
        }
        AerofoilPolar out = *this;
        out.blf_ = model;
        return out;
    }

    /// Section lift at `alpha` (radians). Tabulated mode interpolates linearly
    /// and extends the end panels' slopes beyond the data.
    double cl_of_alpha(double alpha, LiftMode mode) const {
        if (mode == LiftMode::blf) return blf_or_throw().cl(alpha);
        const double a = alpha * units::rad_to_deg;
        const std::size_t n = alpha_deg_.size();
        std::size_t i;
        if (a <= alpha_deg_.front()) {
            i = 0;
        } else if (a >= alpha_deg_.back()) {
            i = n - 2;
        } else {
            i = static_cast<std::size_t>(std::upper_bound(alpha_deg_.begin(), alpha_deg_.end(), a) -
                                         alpha_deg_.begin()) -
                1;
        }
        const double t = (a - alpha_deg_[i]) / (alpha_deg_[i + 1] - alpha_deg_[i]);
        return cl_[i] + t * (cl_[i + 1] - cl_[i]);
    }

    /// Profile drag for a section lift coefficient, interpolated along the
    /// monotone-lift branch containing the drag bucket. Outside that branch
    /// drag grows quadratically from the end value.
    double cd_of_cl(double cl_query) const {
        const auto& bc = branch_cl_;
        const auto& bd = branch_cd_;
        if (cl_query <= bc.front()) {
            const double d = cl_query - bc.front();
            return bd.front() + k_low_ * d * d;
        }
        if (cl_query >= bc.back()) {
            const double d = cl_query - bc.back();
            return bd.back() + k_high_ * d * d;
        }
        const std::size_t i =
            static_cast<std::size_t>(std::upper_bound(bc.begin(), bc.end(), cl_query) - bc.begin()) - 1;
        const double t = (cl_query - bc[i]) / (bc[i + 1] - bc[i]);
        return bd[i] + t * (bd[i + 1] - bd[i]);
    }

    /// Index range [first, last] of the drag-lookup branch in the table.
    std::pair<std::size_t, std::size_t> drag_branch() const { return branch_; }
    double extrapolation_coefficient_low() const { return k_low_; }
    double extrapolation_coefficient_high() const { return k_high_; }

private:
    void validate() const {
        const std::size_t n = alpha_deg_.size();
        if (n < 2) throw ValidationError("polar '" + name_ + "' needs at least 2 rows");
        if (cl_.size() != n || cd_.size() != n) throw ValidationError("polar '" + name_ + "': column lengths differ");
        for (std::size_t i = 0; i < n; ++i) {
            if (!std::isfinite(alpha_deg_[i]) || !std::isfinite(cl_[i]) || !std::isfinite(cd_[i])) {
                throw ValidationError("polar '" + name_ + "': non-finite value");
            }
            if (!(cd_[i] > 0.0)) throw ValidationError("polar '" + name_ + "': cd must be positive");
            if (i > 0 && !(alpha_deg_[i] > alpha_deg_[i - 1])) {
                throw ValidationError("polar '" + name_ + "': alpha must be strictly increasing");
            }
        }
        if (!(reynolds_ > 0.0)) throw ValidationError("polar '" + name_ + "': Reynolds number must be positive");
    }

    // Quadratic coefficient of the parabola through three nodes (second
    // divided difference), in magnitude.
    static double curvature(double x0, double x1, double x2, double y0, double y1, double y2) {
        const double s01 = (y1 - y0) / (x1 - x0);
        const double s12 = (y2 - y1) / (x2 - x1);
        return std::abs((s12 - s01) / (x2 - x0));
    }

    void build_drag_branch() {
        const std::size_t n = cd_.size();
        const std::size_t bucket =
            static_cast<std::size_t>(std::min_element(cd_.begin(), cd_.end()) - cd_.begin());
        std::size_t lo = bucket, hi = bucket;
        while (lo > 0 && cl_[lo - 1] < cl_[lo]) --lo;
        while (hi + 1 < n && cl_[hi + 1] > cl_[hi]) ++hi;
        if (hi == lo) throw ValidationError("polar '" + name_ + "': no monotone lift branch around the drag bucket");
        branch_ = {lo, hi};
        branch_cl_.assign(cl_.begin() + static_cast<std::ptrdiff_t>(lo), cl_.begin() + static_cast<std::ptrdiff_t>(hi) + 1);
        branch_cd_.assign(cd_.begin() + static_cast<std::ptrdiff_t>(lo), cd_.begin() + static_cast<std::ptrdiff_t>(hi) + 1);
        const auto& c = branch_cl_;
        const auto& d = branch_cd_;
        const std::size_t m = c.size();
        if (m >= 3) {
            k_low_ = curvature(c[0], c[1], c[2], d[0], d[1], d[2]);
            k_high_ = curvature(c[m - 3], c[m - 2], c[m - 1], d[m - 3], d[m - 2], d[m - 1]);
        } else {
            k_low_ = k_high_ = 0.0;
        }
    }

    std::string name_;
    double reynolds_;
    std::vector<double> alpha_deg_, cl_, cd_;
    std::optional<LinearLiftModel> blf_;
    std::pair<std::size_t, std::size_t> branch_{0, 0};
    std::vector<double> branch_cl_, branch_cd_;
    double k_low_ = 0.0, k_high_ = 0.0;
};

/// Parses the `alpha_deg,cl,cd` table. Rows are sorted by angle; duplicates
/// and tables with fewer than four rows are rejected.
inline AerofoilPolar load_polar(std::istream& in, std::string name, double reynolds) {
    const auto table = csv::read(in, {"alpha_deg", "cl", "cd"});
    if (table.rows.size() < 4) {
        throw ValidationError("polar '" + name + "' has " + std::to_string(table.rows.size()) +
                              " rows; at least 4 required");
    }
    std::vector<std::size_t> order(table.rows.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return table.rows[a][0] < table.rows[b][0]; });
    std::vector<double> alpha, cl, cd;
    for (std::size_t k = 0; k < order.size(); ++k) {
        const auto& r = table.rows[order[k]];
        if (k > 0 && r[0] == alpha.back()) {
            throw ParseError("duplicate angle of attack " + csv::format(r[0]), table.row_lines[order[k]]);
        }
        alpha.push_back(r[0]);
        cl.push_back(r[1]);
        cd.push_back(r[2]);
    }
    return AerofoilPolar(std::move(name), reynolds, std::move(alpha), std::move(cl), std::move(cd));
}

inline AerofoilPolar load_polar_file(const std::string& path, std::string name, double reynolds) {
    auto in = csv::open_input(path);
    return load_polar(in, std::move(name), reynolds);
}

/// Least-squares line through the (alpha, cl) samples inside `window_deg`.
inline LinearLiftModel fit_blf(const AerofoilPolar& polar, std::array<double, 2> window_deg) {
    const auto& a = polar.alpha_deg();
    if (!(window_deg[0] < window_deg[1])) throw FitError("fit window must satisfy lo < hi");
    if (window_deg[0] < a.front() || window_deg[1] > a.back()) {
        throw FitError("fit window [" + csv::format(window_deg[0]) + ", " + csv::format(window_deg[1]) +
                       "] deg lies outside the polar data range");
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] < window_deg[0] || a[i] > window_deg[1]) continue;
        sx += a[i];
        sy += polar.cl()[i];
        ++n;
    }
    if (n < 3) throw FitError("fewer than 3 samples inside the fit window");
    const double mx = sx / static_cast<double>(n), my = sy / static_cast<double>(n);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] < window_deg[0] || a[i] > window_deg[1]) continue;
        const double dx = a[i] - mx;
        sxx += dx * dx;
        sxy += dx * (polar.cl()[i] - my);
    }
    const double slope_deg = sxy / sxx;
    if (!(slope_deg > 0.0) || !std::isfinite(slope_deg)) {
        throw FitError("fitted lift-curve slope is not positive");
    }
    const double intercept = my - slope_deg * mx;
    LinearLiftModel m;
    m.a0 = slope_deg * units::rad_to_deg;
    m.alpha0 = (-intercept / slope_deg) * units::deg_to_rad;
    m.fit_window_deg = window_deg;
    return m;
}

}  // namespace propwing
