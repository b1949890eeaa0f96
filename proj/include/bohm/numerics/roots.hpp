#pragma once

/**
 * @file roots.hpp
 * @brief Bracketed root refinement (Brent) and grid scanning for root counts.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "bohm/errors.hpp"

namespace bohm::numerics {

inline constexpr double kRootTolerance = 1e-10;

/**
 * Brent's method on [lo, hi]. Requires g(lo) * g(hi) <= 0.
 * Stops when the bracket is narrower than `tol` or g vanishes exactly.
 */
template <class G>
double find_root_bracketed(G&& g, double lo, double hi, double tol = kRootTolerance) {
    double a = lo, b = hi;
    double fa = g(a), fb = g(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa > 0.0) == (fb > 0.0)) throw NoSignChange("find_root_bracketed: no sign change in bracket");

    if (std::abs(fa) < std::abs(fb)) {
        std::swap(a, b);
        std::swap(fa, fb);
    }
    double c = a, fc = fa, d = b - a;
    bool bisected = true;
    for (int iter = 0; iter < 200; ++iter) {
        if (std::abs(b - a) < tol) break;
        double s;
        if (fa != fc && fb != fc) {
            s = a * fb * fc / ((fa - fb) * (fa - fc)) + b * fa * fc / ((fb - fa) * (fb - fc)) +
                c * fa * fb / ((fc - fa) * (fc - fb));
        } else {
            s = b - fb * (b - a) / (fb - fa);
        }
        const double lo_s = (3 * a + b) / 4;
        const bool outside = !((s > std::min(lo_s, b)) && (s < std::max(lo_s, b)));
        if (outside || (bisected && std::abs(s - b) >= std::abs(b - c) / 2) ||
            (!bisected && std::abs(s - b) >= std::abs(c - d) / 2) || (bisected && std::abs(b - c) < tol) ||
            (!bisected && std::abs(c - d) < tol)) {
            s = (a + b) / 2;
            bisected = true;
        } else {
            bisected = false;
        }
        const double fs = g(s);
        if (fs == 0.0) return s;
        d = c;
        c = b;
        fc = fb;
        if ((fa > 0.0) != (fs > 0.0)) {
            b = s;
            fb = fs;
        } else {
            a = s;
            fa = fs;
        }
        if (std::abs(fa) < std::abs(fb)) {
            std::swap(a, b);
            std::swap(fa, fb);
        }
    }
    return b;
}

struct RootScanReport {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t grid_points = 0;
    std::vector<double> roots;  ///< ascending
    bool is_monotone_on_interval = true;

    [[nodiscard]] std::size_t count() const noexcept { return roots.size(); }
};

/**
 * Samples g on `grid` uniformly spaced points of [lo, hi] and refines every
 * sign change to a root. A grid value that is exactly zero counts as a root.
 * Tangential roots without a sign change are not detected.
 *
 * The monotonicity flag is true when the forward differences of the samples
 * never change sign.
 */
template <class G>
RootScanReport count_roots_scan(G&& g, double lo, double hi, std::size_t grid, double tol = kRootTolerance) {
    if (grid < 2) throw std::invalid_argument("count_roots_scan: grid must be >= 2");
    if (!(hi > lo)) throw std::invalid_argument("count_roots_scan: need lo < hi");

    RootScanReport rep;
    rep.lo = lo;
    rep.hi = hi;
    rep.grid_points = grid;

    const double dx = (hi - lo) / static_cast<double>(grid - 1);
    auto xs = [&](std::size_t i) { return i + 1 == grid ? hi : lo + dx * static_cast<double>(i); };

    double x_prev = xs(0);
    double g_prev = g(x_prev);
    if (g_prev == 0.0) rep.roots.push_back(x_prev);
    int diff_sign = 0;
    for (std::size_t i = 1; i < grid; ++i) {
        const double x = xs(i);
        const double gx = g(x);
        const double diff = gx - g_prev;
        if (diff != 0.0) {
            const int s = diff > 0.0 ? 1 : -1;
            if (diff_sign != 0 && s != diff_sign) rep.is_monotone_on_interval = false;
            diff_sign = s;
        }
        if (gx == 0.0) {
            rep.roots.push_back(x);
        } else if (g_prev != 0.0 && ((g_prev > 0.0) != (gx > 0.0))) {
            rep.roots.push_back(find_root_bracketed(g, x_prev, x, tol));
        }
        x_prev = x;
        g_prev = gx;
    }
    return rep;
}

}  // namespace bohm::numerics
