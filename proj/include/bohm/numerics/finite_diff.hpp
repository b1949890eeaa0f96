#pragma once

/**
 * @file finite_diff.hpp
 * @brief Central-difference gradients used as oracles for analytic
 *        phase gradients.
 *
 * Component i is (f(x + h e_i) - f(x - h e_i)) / (2h), error O(h^2).
 * The default per-component step is max(1e-6, 1e-8 |x_i|), which balances
 * truncation against round-off for O(1) phases in double precision.
 */

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace bohm::numerics {

inline double default_fd_step(double xi) noexcept {
    return std::max(1e-6, 1e-8 * std::abs(xi));
}

/// Central-difference gradient with a fixed step h for every component.
/// Exceptions thrown by f at a stencil point propagate unchanged.
template <std::size_t N, class F>
std::array<double, N> finite_diff_gradient(F&& f, const std::array<double, N>& x, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("finite_diff_gradient: h must be > 0");
    std::array<double, N> grad{};
    for (std::size_t i = 0; i < N; ++i) {
        auto xp = x;
        auto xm = x;
        xp[i] += h;
        xm[i] -= h;
        grad[i] = (f(xp) - f(xm)) / (2.0 * h);
    }
    return grad;
}

/// Central-difference gradient with the default per-component step.
template <std::size_t N, class F>
std::array<double, N> finite_diff_gradient(F&& f, const std::array<double, N>& x) {
    std::array<double, N> grad{};
    for (std::size_t i = 0; i < N; ++i) {
        const double h = default_fd_step(x[i]);
        auto xp = x;
        auto xm = x;
        xp[i] += h;
        xm[i] -= h;
        grad[i] = (f(xp) - f(xm)) / (xp[i] - xm[i]);
    }
    return grad;
}

/// Scalar derivative, same stencil.
template <class F>
double finite_diff_derivative(F&& f, double x, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("finite_diff_derivative: h must be > 0");
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

}  // namespace bohm::numerics
