#pragma once

/**
 * @file ode.hpp
 * @brief Explicit Runge-Kutta integration of autonomous-or-not vector ODEs
 *        y' = f(y, t) with output at caller-requested times.
 *
 * Two methods:
 *   - classical RK4 with a fixed step,
 *   - Dormand-Prince 5(4) with embedded error control (FSAL).
 *
 * Both methods clip the step so every requested sample time is hit exactly;
 * there is no interpolation between steps. Integration runs forwards or
 * backwards in time depending on where the samples lie relative to t0.
 *
 * A DomainError thrown by the right-hand side (a node of the wavefunction,
 * a slit point) ends the integration; the trajectory keeps every sample
 * reached so far and records why it stopped.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "bohm/errors.hpp"

namespace bohm::numerics {

enum class Method { rk4_fixed, rk45_adaptive };

inline std::string_view to_string(Method m) noexcept {
    return m == Method::rk4_fixed ? "rk4" : "rk45";
}

struct IntegratorConfig {
    Method method = Method::rk45_adaptive;
    double step = 1e-3;  ///< rk4 only
    double rel_tol = 1e-9;
    double abs_tol = 1e-11;
    std::size_t max_steps = 1'000'000;

    void validate() const {
        if (!(step > 0.0)) throw std::invalid_argument("step must be > 0");
        if (!(rel_tol > 0.0)) throw std::invalid_argument("rel_tol must be > 0");
        if (!(abs_tol > 0.0)) throw std::invalid_argument("abs_tol must be > 0");
        if (max_steps < 1) throw std::invalid_argument("max_steps must be >= 1");
    }

    bool operator==(const IntegratorConfig&) const = default;
};

enum class Termination { completed, max_steps_exceeded, domain_error, step_size_underflow };

inline std::string_view to_string(Termination t) noexcept {
    switch (t) {
        case Termination::completed: return "completed";
        case Termination::max_steps_exceeded: return "max_steps_exceeded";
        case Termination::domain_error: return "domain_error";
        case Termination::step_size_underflow: return "step_size_underflow";
    }
    return "unknown";
}

/// Time-ordered samples of a solution with the velocity at each sample.
template <std::size_t N>
struct Trajectory {
    using Point = std::array<double, N>;

    std::vector<double> times;
    std::vector<Point> positions;
    std::vector<Point> velocities;
    Termination termination = Termination::completed;
    std::string message;
    std::size_t steps_taken = 0;

    [[nodiscard]] std::size_t size() const noexcept { return times.size(); }
    [[nodiscard]] bool empty() const noexcept { return times.empty(); }
    [[nodiscard]] bool truncated() const noexcept { return termination != Termination::completed; }

    void push(double t, const Point& y, const Point& v) {
        times.push_back(t);
        positions.push_back(y);
        velocities.push_back(v);
    }
};

namespace detail {

template <std::size_t N>
using Vec = std::array<double, N>;

template <std::size_t N>
Vec<N> axpy(const Vec<N>& y, double h, std::initializer_list<std::pair<double, const Vec<N>*>> terms) {
    Vec<N> out = y;
    for (std::size_t i = 0; i < N; ++i) {
        double acc = 0.0;
        for (const auto& [c, k] : terms) acc += c * (*k)[i];
        out[i] += h * acc;
    }
    return out;
}

template <std::size_t N>
double error_norm(const Vec<N>& err, const Vec<N>& y0, const Vec<N>& y1, const IntegratorConfig& cfg) {
    double acc = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        const double r = err[i] / sc;
        acc += r * r;
    }
    return std::sqrt(acc / static_cast<double>(N));
}

inline bool step_too_small(double h, double t) {
    return std::abs(h) < 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t));
}

// Hairer, Norsett & Wanner initial step heuristic.
template <std::size_t N, class Rhs>
double initial_step(Rhs& rhs, const Vec<N>& y0, const Vec<N>& f0, double t0, double dir,
                    const IntegratorConfig& cfg) {
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const double sc = cfg.abs_tol + cfg.rel_tol * std::abs(y0[i]);
        d0 += (y0[i] / sc) * (y0[i] / sc);
        d1 += (f0[i] / sc) * (f0[i] / sc);
    }
    d0 = std::sqrt(d0 / N);
    d1 = std::sqrt(d1 / N);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    Vec<N> y1 = y0;
    for (std::size_t i = 0; i < N; ++i) y1[i] += dir * h0 * f0[i];
    const Vec<N> f1 = rhs(y1, t0 + dir * h0);
    double d2 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const double sc = cfg.abs_tol + cfg.rel_tol * std::abs(y0[i]);
        const double r = (f1[i] - f0[i]) / sc;
        d2 += r * r;
    }
    d2 = std::sqrt(d2 / N) / h0;
    const double dm = std::max(d1, d2);
    const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 1.0 / 5.0);
    return std::min(100.0 * h0, h1);
}

}  // namespace detail

/**
 * Integrates y' = rhs(y, t) from (y0, t0) and records the state at t0 and at
 * every entry of `sample_times`. Samples must be monotone and all on the same
 * side of t0; their direction sets the direction of integration.
 */
template <std::size_t N, class Rhs>
Trajectory<N> integrate_ode(Rhs&& rhs, const std::array<double, N>& y0, double t0,
                            std::span<const double> sample_times, const IntegratorConfig& cfg) {
    using V = std::array<double, N>;
    cfg.validate();

    double dir = 0.0;
    for (double ts : sample_times) {
        if (ts != t0) {
            dir = ts > t0 ? 1.0 : -1.0;
            break;
        }
    }
    double prev = t0;
    for (double ts : sample_times) {
        if (dir * (ts - prev) < 0.0)
            throw std::invalid_argument("integrate_ode: sample times must be monotone away from t0");
        prev = ts;
    }

    Trajectory<N> traj;
    V y = y0;
    double t = t0;
    V f{};
    try {
        f = rhs(y, t);
    } catch (const DomainError& e) {
        traj.termination = Termination::domain_error;
        traj.message = e.what();
        return traj;
    }
    traj.push(t, y, f);
    if (dir == 0.0) return traj;

    std::size_t attempts = 0;
    double h = 0.0;

    try {
        if (cfg.method == Method::rk45_adaptive) h = detail::initial_step<N>(rhs, y, f, t, dir, cfg);

        for (double target : sample_times) {
            if (target == t0 && t == t0) continue;
            while (t != target) {
                if (++attempts > cfg.max_steps) {
                    traj.termination = Termination::max_steps_exceeded;
                    traj.message = "exceeded max_steps=" + std::to_string(cfg.max_steps);
                    traj.steps_taken = attempts - 1;
                    return traj;
                }
                const double remaining = target - t;

                if (cfg.method == Method::rk4_fixed) {
                    const bool last = std::abs(remaining) <= cfg.step * (1.0 + 1e-12);
                    const double hs = last ? remaining : dir * cfg.step;
                    const V k1 = f;
                    const V k2 = rhs(detail::axpy<N>(y, hs, {{0.5, &k1}}), t + 0.5 * hs);
                    const V k3 = rhs(detail::axpy<N>(y, hs, {{0.5, &k2}}), t + 0.5 * hs);
                    const V k4 = rhs(detail::axpy<N>(y, hs, {{1.0, &k3}}), t + hs);
                    y = detail::axpy<N>(y, hs, {{1.0 / 6, &k1}, {1.0 / 3, &k2}, {1.0 / 3, &k3}, {1.0 / 6, &k4}});
                    t = last ? target : t + hs;
                    f = rhs(y, t);
                    continue;
                }

                // Dormand-Prince 5(4)
                double habs = std::abs(h);
                bool clipped = false;
                if (habs >= std::abs(remaining)) {
                    habs = std::abs(remaining);
                    clipped = true;
                }
                const double hs = dir * habs;
                if (detail::step_too_small(hs, t) && !clipped) {
                    traj.termination = Termination::step_size_underflow;
                    traj.message = "step size underflow at t=" + std::to_string(t);
                    traj.steps_taken = attempts;
                    return traj;
                }
                const V& k1 = f;
                const V k2 = rhs(detail::axpy<N>(y, hs, {{1.0 / 5, &k1}}), t + hs / 5);
                const V k3 = rhs(detail::axpy<N>(y, hs, {{3.0 / 40, &k1}, {9.0 / 40, &k2}}), t + 3 * hs / 10);
                const V k4 = rhs(detail::axpy<N>(y, hs, {{44.0 / 45, &k1}, {-56.0 / 15, &k2}, {32.0 / 9, &k3}}),
                                 t + 4 * hs / 5);
                const V k5 = rhs(detail::axpy<N>(y, hs,
                                                 {{19372.0 / 6561, &k1},
                                                  {-25360.0 / 2187, &k2},
                                                  {64448.0 / 6561, &k3},
                                                  {-212.0 / 729, &k4}}),
                                 t + 8 * hs / 9);
                const V k6 = rhs(detail::axpy<N>(y, hs,
                                                 {{9017.0 / 3168, &k1},
                                                  {-355.0 / 33, &k2},
                                                  {46732.0 / 5247, &k3},
                                                  {49.0 / 176, &k4},
                                                  {-5103.0 / 18656, &k5}}),
                                 t + hs);
                const V y5 = detail::axpy<N>(y, hs,
                                             {{35.0 / 384, &k1},
                                              {500.0 / 1113, &k3},
                                              {125.0 / 192, &k4},
                                              {-2187.0 / 6784, &k5},
                                              {11.0 / 84, &k6}});
                const double t_new = clipped ? target : t + hs;
                const V k7 = rhs(y5, t_new);
                V err{};
                for (std::size_t i = 0; i < N; ++i) {
                    err[i] = hs * (71.0 / 57600 * k1[i] - 71.0 / 16695 * k3[i] + 71.0 / 1920 * k4[i] -
                                   17253.0 / 339200 * k5[i] + 22.0 / 525 * k6[i] - 1.0 / 40 * k7[i]);
                }
                const double en = detail::error_norm<N>(err, y, y5, cfg);
                const double factor =
                    en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
                if (en <= 1.0) {
                    y = y5;
                    t = t_new;
                    f = k7;
                    // A step shortened to land on a sample keeps the previous proposal.
                    if (!clipped) h = dir * habs * factor;
                    ++traj.steps_taken;
                } else {
                    h = dir * habs * std::max(0.2, factor);
                }
            }
            traj.push(t, y, f);
        }
    } catch (const DomainError& e) {
        traj.termination = Termination::domain_error;
        traj.message = e.what();
    }
    return traj;
}

/// Integrates from t0 to t_end and records only the two endpoints.
template <std::size_t N, class Rhs>
Trajectory<N> integrate_ode(Rhs&& rhs, const std::array<double, N>& y0, double t0, double t_end,
                            const IntegratorConfig& cfg) {
    const std::array<double, 1> samples{t_end};
    return integrate_ode<N>(std::forward<Rhs>(rhs), y0, t0, std::span<const double>(samples), cfg);
}

/// Uniformly spaced sample times t0 + i (t_end - t0) / (count - 1), i = 1..count-1.
inline std::vector<double> linspace_samples(double t0, double t_end, std::size_t count) {
    std::vector<double> out;
    if (count < 2) {
        out.push_back(t_end);
        return out;
    }
    for (std::size_t i = 1; i < count; ++i) {
        out.push_back(i + 1 == count ? t_end
                                     : t0 + (t_end - t0) * static_cast<double>(i) / static_cast<double>(count - 1));
    }
    return out;
}

}  // namespace bohm::numerics
