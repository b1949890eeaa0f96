#pragma once

/**
 * @file planewave_pair.hpp
 * @brief Entangled two-particle plane-wave superposition in one dimension.
 *
 *   psi(x1, x2, t) = [a e^{i theta} + b e^{-i theta}] e^{-iEt/hbar} / (sqrt(N) (a + b)),
 *   theta = p (x1 - x2) / hbar,  E = p^2 / m.
 *
 * Everything here depends on the configuration only through the relative
 * coordinate delta = x1 - x2, and the guidance velocities satisfy v2 = -v1,
 * so x1 + x2 is a constant of the motion.
 *
 * The wavefunction is box normalized on [0, L]^2. The default L is three
 * wavelengths (6 pi hbar / p), which keeps psi periodic on the box so the
 * guidance flow is well defined on the torus.
 */

#include <array>
#include <cmath>
#include <cstddef>
#include <string_view>
#include <utility>

#include "bohm/errors.hpp"
#include "bohm/numerics/complex.hpp"
#include "bohm/numerics/ode.hpp"
#include "bohm/numerics/quadrature.hpp"
#include "bohm/numerics/roots.hpp"

namespace bohm::planewave {

using numerics::ComplexScalar;

struct Params {
    double a = 1.0;
    double b = 0.0;
    double p = 1.0;
    double m = 1.0;
    double hbar = 1.0;
    double box_length = 0.0;  ///< <= 0 selects the default 6 pi hbar / p

    [[nodiscard]] double c() const noexcept { return (a - b) / (a + b); }
    [[nodiscard]] double energy() const noexcept { return p * p / m; }
    [[nodiscard]] double speed() const noexcept { return p / m; }
    [[nodiscard]] double default_box_length() const noexcept { return 6.0 * M_PI * hbar / p; }
    [[nodiscard]] double length() const noexcept { return box_length > 0.0 ? box_length : default_box_length(); }

    void validate() const {
        if (!(a >= 0.0)) throw ConfigError("a", "must satisfy a >= 0");
        if (!(b >= 0.0)) throw ConfigError("b", "must satisfy b >= 0");
        if (!(a + b > 0.0)) throw ConfigError("b", "need a + b > 0");
        if (!(p > 0.0)) throw ConfigError("p", "must be > 0");
        if (!(m > 0.0)) throw ConfigError("m", "must be > 0");
        if (!(hbar > 0.0)) throw ConfigError("hbar", "must be > 0");
        if (!(box_length >= 0.0) || !std::isfinite(box_length)) throw ConfigError("L", "must be > 0");
    }

    bool operator==(const Params&) const = default;
};

struct State {
    double x1 = 0.0;
    double x2 = 0.0;
    double t = 0.0;

    [[nodiscard]] double delta() const noexcept { return x1 - x2; }
};

/// Phase S with its branch cell: eta = round(theta / pi).
struct PhaseValue {
    double S = 0.0;
    long eta = 0;
};

class PlaneWavePair {
public:
    static constexpr std::size_t dim = 2;
    static constexpr std::string_view tag = "planewave";
    using Point = std::array<double, dim>;
    using ParamsType = Params;

    explicit PlaneWavePair(Params params) : params_(params) {
        params_.validate();
        length_ = params_.length();
        // N = int_{[0,L]^2} profile(x1 - x2) = int_{-L}^{L} (L - |d|) profile(d) dd
        const double period = M_PI * params_.hbar / params_.p;
        const auto cells = static_cast<std::size_t>(std::max(256.0, 64.0 * length_ / period));
        auto weighted = [this](double d) { return (length_ - std::abs(d)) * profile(d); };
        norm_ = numerics::integrate_composite(weighted, -length_, 0.0, cells) +
                numerics::integrate_composite(weighted, 0.0, length_, cells);
    }

    [[nodiscard]] const Params& params() const noexcept { return params_; }
    [[nodiscard]] double norm() const noexcept { return norm_; }
    [[nodiscard]] double box_length() const noexcept { return length_; }

    [[nodiscard]] double theta(double delta) const noexcept { return params_.p * delta / params_.hbar; }

    /// True when the box holds a whole number of density periods pi hbar / p,
    /// i.e. the velocity field is periodic on the box torus.
    [[nodiscard]] bool periodic_box_consistent() const noexcept {
        const double cells = length_ * params_.p / (M_PI * params_.hbar);
        return std::abs(cells - std::round(cells)) < 1e-9 * std::max(1.0, cells);
    }

    [[nodiscard]] ComplexScalar psi(const State& s) const {
        const double th = theta(s.delta());
        const ComplexScalar sup = params_.a * std::polar(1.0, th) + params_.b * std::polar(1.0, -th);
        const ComplexScalar time_phase = std::polar(1.0, -params_.energy() * s.t / params_.hbar);
        return sup * time_phase / (std::sqrt(norm_) * (params_.a + params_.b));
    }

    [[nodiscard]] double density_direct(const State& s) const { return numerics::modulus2(psi(s)); }

    /// (a^2 + b^2 + 2ab cos theta) / (N (a+b)^2), transcribed with cos theta
    /// where the expansion of |psi|^2 gives cos 2 theta. Kept for comparison.
    [[nodiscard]] double density_as_printed(const State& s) const {
        const double a = params_.a, b = params_.b;
        return (a * a + b * b + 2 * a * b * std::cos(theta(s.delta()))) / (norm_ * (a + b) * (a + b));
    }

    [[nodiscard]] PhaseValue phase(const State& s) const {
        const double th = theta(s.delta());
        if (is_node(th)) throw DomainError("planewave phase: node of psi");
        const double k = std::round(th / M_PI);
        const double phi = th - k * M_PI;
        const double c = params_.c();
        const double sgn = c > 0.0 ? 1.0 : (c < 0.0 ? -1.0 : 0.0);
        const double S = params_.hbar * (std::atan2(c * std::sin(phi), std::cos(phi)) + sgn * k * M_PI) -
                         params_.energy() * s.t;
        return {S, static_cast<long>(k)};
    }

    /// Guidance velocities (p/m) c / (cos^2 theta + c^2 sin^2 theta) and its negative.
    [[nodiscard]] std::pair<double, double> velocities(const State& s) const {
        const double v1 = velocity1(s.delta());
        return {v1, -v1};
    }

    [[nodiscard]] Point velocity_field(const Point& x, double /*t*/) const {
        const double v1 = velocity1(x[0] - x[1]);
        return {v1, -v1};
    }

    [[nodiscard]] double density(const Point& x, double t) const { return density_direct({x[0], x[1], t}); }

    [[nodiscard]] Point sampling_lo() const noexcept { return {0.0, 0.0}; }
    [[nodiscard]] Point sampling_hi() const noexcept { return {length_, length_}; }
    /// max |psi|^2, attained where cos 2 theta = 1.
    [[nodiscard]] double density_bound() const noexcept { return 1.0 / norm_; }

    /// Conserved relative-coordinate function F(delta) with F(delta(t)) - 2 v t
    /// constant along every trajectory:
    ///   F = (a^2+b^2)/(a^2-b^2) delta + (hbar/p) ab/(a^2-b^2) sin(2 p delta / hbar).
    [[nodiscard]] double implicit_lhs(double delta) const {
        const auto [k1, k2] = implicit_coefficients();
        return k1 * delta + k2 * std::sin(2.0 * theta(delta));
    }

    /// Same relation as printed with a factor 1/2 on the linear term. That form
    /// is not conserved by the flow; its delta-derivative is positive for every
    /// delta exactly when 4ab < a^2 + b^2.
    [[nodiscard]] double implicit_lhs_as_printed(double delta) const {
        const auto [k1, k2] = implicit_coefficients();
        return 0.5 * k1 * delta + k2 * std::sin(2.0 * theta(delta));
    }

    /// beta = F(delta) - 2 v t at the given state.
    [[nodiscard]] double beta(const State& s) const { return implicit_lhs(s.delta()) - 2.0 * params_.speed() * s.t; }

    [[nodiscard]] double implicit_residual(const State& s, double beta) const {
        return implicit_lhs(s.delta()) - 2.0 * params_.speed() * s.t - beta;
    }

    [[nodiscard]] double implicit_residual_as_printed(const State& s, double beta) const {
        return implicit_lhs_as_printed(s.delta()) - 2.0 * params_.speed() * s.t - beta;
    }

    /// Time at which the trajectory through `s` has delta = 0 (F(0) = 0).
    [[nodiscard]] double coincidence_time(const State& s) const {
        return s.t - implicit_lhs(s.delta()) / (2.0 * params_.speed());
    }

    /// |psi|^2 up to the 1/N factor as a function of delta.
    [[nodiscard]] double profile(double delta) const noexcept {
        const double a = params_.a, b = params_.b;
        return (a * a + b * b + 2 * a * b * std::cos(2.0 * theta(delta))) / ((a + b) * (a + b));
    }

private:
    [[nodiscard]] bool is_node(double th) const noexcept {
        const double c = params_.c();
        const double cs = std::cos(th), sn = std::sin(th);
        return cs * cs + c * c * sn * sn < 1e-20;
    }

    [[nodiscard]] double velocity1(double delta) const {
        const double th = theta(delta);
        const double c = params_.c();
        const double cs = std::cos(th), sn = std::sin(th);
        const double den = cs * cs + c * c * sn * sn;
        if (den < 1e-20) throw DomainError("planewave velocity: node of psi");
        return params_.speed() * c / den;
    }

    [[nodiscard]] std::pair<double, double> implicit_coefficients() const {
        const double a = params_.a, b = params_.b;
        const double d = a * a - b * b;
        if (d == 0.0) throw DegenerateParameters("implicit solution undefined for a == b");
        return {(a * a + b * b) / d, params_.hbar / params_.p * a * b / d};
    }

    Params params_;
    double length_ = 0.0;
    double norm_ = 1.0;
};

/// max over samples of |(x1 + x2) - (x1 + x2)_initial|.
inline double cm_invariant(const numerics::Trajectory<2>& traj) {
    if (traj.empty()) throw std::invalid_argument("cm_invariant: empty trajectory");
    const double alpha = traj.positions.front()[0] + traj.positions.front()[1];
    double worst = 0.0;
    for (const auto& x : traj.positions) worst = std::max(worst, std::abs(x[0] + x[1] - alpha));
    return worst;
}

/// max over samples of |residual| with beta fixed at the first sample.
inline double implicit_residual_drift(const PlaneWavePair& model, const numerics::Trajectory<2>& traj,
                                      bool as_printed = false) {
    if (traj.empty()) throw std::invalid_argument("implicit_residual_drift: empty trajectory");
    auto residual = [&](const State& s, double beta) {
        return as_printed ? model.implicit_residual_as_printed(s, beta) : model.implicit_residual(s, beta);
    };
    const State s0{traj.positions.front()[0], traj.positions.front()[1], traj.times.front()};
    const double beta0 = residual(s0, 0.0);
    double worst = 0.0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const State s{traj.positions[i][0], traj.positions[i][1], traj.times[i]};
        worst = std::max(worst, std::abs(residual(s, beta0)));
    }
    return worst;
}

struct UniquenessReport {
    double t = 0.0;
    double t0 = 0.0;
    bool four_ab_condition = false;  ///< 4ab < a^2 + b^2
    bool b_third_condition = false;  ///< b < a/3
    [[nodiscard]] bool conditions_agree() const noexcept { return four_ab_condition == b_third_condition; }
    numerics::RootScanReport printed_scan;     ///< relation as printed
    numerics::RootScanReport conserved_scan;   ///< conserved form
};

/**
 * Scans F(delta) - 2 v (t - t0) over `interval` in delta for both forms of the
 * implicit relation and reports the two sufficient conditions next to the
 * measured root counts.
 */
inline UniquenessReport uniqueness_analysis(const PlaneWavePair& model, double t, double t0,
                                            std::pair<double, double> interval, std::size_t grid = 100'000) {
    const auto& pr = model.params();
    if (pr.a == pr.b) throw DegenerateParameters("uniqueness_analysis: a == b");
    UniquenessReport rep;
    rep.t = t;
    rep.t0 = t0;
    rep.four_ab_condition = 4 * pr.a * pr.b < pr.a * pr.a + pr.b * pr.b;
    rep.b_third_condition = pr.b < pr.a / 3.0;
    const double rhs = 2.0 * pr.speed() * (t - t0);
    rep.printed_scan = numerics::count_roots_scan(
        [&](double d) { return model.implicit_lhs_as_printed(d) - rhs; }, interval.first, interval.second, grid);
    rep.conserved_scan = numerics::count_roots_scan([&](double d) { return model.implicit_lhs(d) - rhs; },
                                                    interval.first, interval.second, grid);
    return rep;
}

}  // namespace bohm::planewave
