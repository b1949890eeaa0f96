#pragma once

/**
 * @file quadrature.hpp
 * @brief Composite Gauss-Legendre quadrature and a tabulated CDF built on it.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace bohm::numerics {

namespace detail {
// 5-point Gauss-Legendre nodes/weights on [-1, 1]; exact for degree <= 9.
inline constexpr std::array<double, 5> kGlNodes{-0.9061798459386640, -0.5384693101056831, 0.0,
                                                0.5384693101056831, 0.9061798459386640};
inline constexpr std::array<double, 5> kGlWeights{0.2369268850561891, 0.4786286704993665,
                                                  0.5688888888888889, 0.4786286704993665,
                                                  0.2369268850561891};
}  // namespace detail

template <class F>
double gauss_legendre5(F&& f, double a, double b) {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double acc = 0.0;
    for (std::size_t i = 0; i < 5; ++i) acc += detail::kGlWeights[i] * f(mid + half * detail::kGlNodes[i]);
    return half * acc;
}

template <class F>
double integrate_composite(F&& f, double a, double b, std::size_t cells) {
    if (cells == 0) throw std::invalid_argument("integrate_composite: cells must be >= 1");
    const double h = (b - a) / static_cast<double>(cells);
    double acc = 0.0;
    for (std::size_t i = 0; i < cells; ++i) {
        const double x0 = a + h * static_cast<double>(i);
        const double x1 = i + 1 == cells ? b : x0 + h;
        acc += gauss_legendre5(f, x0, x1);
    }
    return acc;
}

/**
 * CDF of a non-negative density on [lo, hi], normalized to 1.
 *
 * The cumulative integral is tabulated at cell edges; a query adds a
 * Gauss-Legendre integral over the partial cell, so accuracy is that of the
 * quadrature rule, not of interpolation.
 */
template <class Density>
class TabulatedCdf {
public:
    TabulatedCdf(Density density, double lo, double hi, std::size_t cells)
        : density_(std::move(density)), lo_(lo), hi_(hi), cells_(cells) {
        if (!(hi > lo) || cells == 0) throw std::invalid_argument("TabulatedCdf: bad interval");
        width_ = (hi - lo) / static_cast<double>(cells);
        cumulative_.resize(cells + 1, 0.0);
        for (std::size_t i = 0; i < cells; ++i) {
            const double x0 = edge(i);
            cumulative_[i + 1] = cumulative_[i] + gauss_legendre5(density_, x0, edge(i + 1));
        }
        total_ = cumulative_.back();
        if (!(total_ > 0.0)) throw std::invalid_argument("TabulatedCdf: density integrates to zero");
    }

    [[nodiscard]] double total() const noexcept { return total_; }
    [[nodiscard]] double lo() const noexcept { return lo_; }
    [[nodiscard]] double hi() const noexcept { return hi_; }

    double operator()(double x) const {
        if (x <= lo_) return 0.0;
        if (x >= hi_) return 1.0;
        auto cell = static_cast<std::size_t>((x - lo_) / width_);
        cell = std::min(cell, cells_ - 1);
        const double x0 = edge(cell);
        const double partial = x > x0 ? gauss_legendre5(density_, x0, x) : 0.0;
        return std::clamp((cumulative_[cell] + partial) / total_, 0.0, 1.0);
    }

private:
    [[nodiscard]] double edge(std::size_t i) const noexcept {
        return i == cells_ ? hi_ : lo_ + width_ * static_cast<double>(i);
    }

    Density density_;
    double lo_;
    double hi_;
    std::size_t cells_;
    double width_ = 0.0;
    double total_ = 0.0;
    std::vector<double> cumulative_;
};

}  // namespace bohm::numerics
