#pragma once

/**
 * @file spherical_pair.hpp
 * @brief Two particles emitted by two point sources ("slits") at
 *        A = (0, a, 0) and B = (0, -a, 0), entangled as
 *
 *   psi = [ e^{ik(r1A + r2B)} / (r1A r2B) + e^{ik(r1B + r2A)} / (r1B r2A) ] e^{-iEt/hbar} / N
 *
 * with r_iJ the distance of particle i from source J and E = hbar^2 k^2 / m.
 *
 * Writing psi r1A r1B r2A r2B = (D + iN) e^{-iEt/hbar} gives the phase
 * S = hbar atan2(N, D) - E t. The guidance velocities follow from the four
 * partials dS/dr_iJ and the geometric factors (r_i - J) / r_iJ.
 *
 * The wavefunction is symmetric under y -> -y for both particles and under
 * exchange of the particles. Configurations with r2 = (x1, -y1, z1) satisfy
 * r1A = r2B and r1B = r2A; that set is invariant under the flow.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string_view>

#include "bohm/errors.hpp"
#include "bohm/numerics/complex.hpp"
#include "bohm/numerics/ode.hpp"
#include "bohm/numerics/random.hpp"

namespace bohm::spherical {

using numerics::ComplexScalar;
using Vec3 = std::array<double, 3>;

inline constexpr double kSlitExclusion = 1e-6;
inline constexpr double kNodeThreshold = 1e-12;

struct Params {
    double k = 5.0;
    double slit_a = 0.5;
    double m = 1.0;
    double hbar = 1.0;
    double box_length = 0.0;  ///< <= 0 selects 40 / k
    double x_min = -1.0;      ///< lower x edge of the sampling box; < 0 selects L / 4

    [[nodiscard]] double energy() const noexcept { return hbar * hbar * k * k / m; }
    [[nodiscard]] double length() const noexcept { return box_length > 0.0 ? box_length : 40.0 / k; }
    [[nodiscard]] double sampling_x_min() const noexcept { return x_min >= 0.0 ? x_min : length() / 4.0; }

    void validate() const {
        if (!(k > 0.0)) throw ConfigError("k", "must be > 0");
        if (!(slit_a > 0.0)) throw ConfigError("slit_a", "must be > 0");
        if (!(m > 0.0)) throw ConfigError("m", "must be > 0");
        if (!(hbar > 0.0)) throw ConfigError("hbar", "must be > 0");
        if (!(box_length >= 0.0) || !std::isfinite(box_length)) throw ConfigError("L", "must be > 0");
        if (x_min >= 0.0 && !(x_min < length())) throw ConfigError("x_min", "must be < L");
    }

    bool operator==(const Params&) const = default;
};

struct State {
    Vec3 r1{};
    Vec3 r2{};
    double t = 0.0;

    [[nodiscard]] bool in_support() const noexcept { return r1[0] >= 0.0 && r2[0] >= 0.0; }
};

/// Flips both y coordinates and swaps the particle labels.
inline State mirror(const State& s) {
    return {{s.r2[0], -s.r2[1], s.r2[2]}, {s.r1[0], -s.r1[1], s.r1[2]}, s.t};
}

struct Distances {
    double r1A, r1B, r2A, r2B;
};

/// Numerator and denominator of the phase, S = hbar atan2(Nval, Dval) - E t.
struct PhaseParts {
    double Nval;
    double Dval;
};

struct PhaseDerivatives {
    double d_r1A, d_r1B, d_r2A, d_r2B;
};

namespace detail {

inline double dist(const Vec3& r, double ys) {
    const double dy = r[1] - ys;
    return std::sqrt(r[0] * r[0] + dy * dy + r[2] * r[2]);
}

// Weights w1, w2 scale the two terms; (1, 1) is the physical state. Setting
// one to zero isolates a single spherical wave.
inline PhaseParts phase_parts(const Distances& d, double k, double w1 = 1.0, double w2 = 1.0) {
    const double s1 = k * (d.r1A + d.r2B);
    const double s2 = k * (d.r1B + d.r2A);
    return {w1 * d.r1B * d.r2A * std::sin(s1) + w2 * d.r1A * d.r2B * std::sin(s2),
            w1 * d.r1B * d.r2A * std::cos(s1) + w2 * d.r1A * d.r2B * std::cos(s2)};
}

// dS/dr = hbar (D dN - N dD) / (N^2 + D^2), the quotient rule for
// hbar arctan(N/D) written so it stays finite where D = 0.
inline PhaseDerivatives phase_derivatives(const Distances& d, double k, double hbar, double w1 = 1.0,
                                          double w2 = 1.0) {
    const double s1 = k * (d.r1A + d.r2B);
    const double s2 = k * (d.r1B + d.r2A);
    const double c1 = std::cos(s1), n1 = std::sin(s1);
    const double c2 = std::cos(s2), n2 = std::sin(s2);
    const auto [N, D] = phase_parts(d, k, w1, w2);
    const double den = N * N + D * D;
    auto dS = [&](double dN, double dD) { return hbar * (D * dN - N * dD) / den; };

    const double t1 = w1 * k * d.r1B * d.r2A;  // k r1B r2A, first term
    const double t2 = w2 * k * d.r1A * d.r2B;  // k r1A r2B, second term
    return {
        dS(t1 * c1 + w2 * d.r2B * n2, -t1 * n1 + w2 * d.r2B * c2),  // r1A
        dS(w1 * d.r2A * n1 + t2 * c2, w1 * d.r2A * c1 - t2 * n2),   // r1B
        dS(w1 * d.r1B * n1 + t2 * c2, w1 * d.r1B * c1 - t2 * n2),   // r2A
        dS(t1 * c1 + w2 * d.r1A * n2, -t1 * n1 + w2 * d.r1A * c2),  // r2B
    };
}

// Distance from the source point (0, ys, 0) to the box [x0, x1] x [-h, h]^2.
inline double box_distance(double ys, double x0, double x1, double h) {
    const double dx = std::max({x0, -x1, 0.0});
    const double dy = std::max({-h - ys, ys - h, 0.0});
    return std::hypot(dx, dy);  // z range always contains 0
}

}  // namespace detail

struct ConstraintReport {
    double mirror_deviation = 0.0;   ///< max(|r1A - r2B|, |r1B - r2A|)
    double literal_deviation = 0.0;  ///< max(|r1A - r2B|, |r2B - r2A|)
    double initial_mirror_deviation = 0.0;
    double initial_literal_deviation = 0.0;
    std::size_t samples = 0;
};

class SphericalPair {
public:
    static constexpr std::size_t dim = 6;
    static constexpr std::string_view tag = "spherical";
    using Point = std::array<double, dim>;
    using ParamsType = Params;

    /// Normalizes by Monte Carlo over the sampling box with `norm_samples` points.
    explicit SphericalPair(Params params, std::size_t norm_samples = 200'000, std::uint64_t norm_seed = 0x5eedULL)
        : params_(params) {
        params_.validate();
        length_ = params_.length();
        x_min_ = params_.sampling_x_min();
        numerics::Rng rng(norm_seed);
        const auto lo = sampling_lo();
        const auto hi = sampling_hi();
        double volume = 1.0;
        for (std::size_t i = 0; i < dim; ++i) volume *= hi[i] - lo[i];
        double sum = 0.0, sum2 = 0.0;
        for (std::size_t i = 0; i < norm_samples; ++i) {
            Point x;
            for (std::size_t j = 0; j < dim; ++j) x[j] = rng.uniform(lo[j], hi[j]);
            const double f = numerics::modulus2(raw_amplitude(distances(to_state(x, 0.0))));
            sum += f;
            sum2 += f * f;
        }
        const double n = static_cast<double>(norm_samples);
        const double mean = sum / n;
        const double var = std::max(0.0, sum2 / n - mean * mean);
        norm2_ = volume * mean;
        norm2_std_error_ = volume * std::sqrt(var / n);
    }

    [[nodiscard]] const Params& params() const noexcept { return params_; }
    /// N, so that |psi|^2 integrates to one over the sampling box.
    [[nodiscard]] double norm_factor() const noexcept { return std::sqrt(norm2_); }
    /// Monte Carlo standard error of N^2.
    [[nodiscard]] double norm2_std_error() const noexcept { return norm2_std_error_; }
    [[nodiscard]] double box_length() const noexcept { return length_; }

    static State to_state(const Point& x, double t) noexcept {
        return {{x[0], x[1], x[2]}, {x[3], x[4], x[5]}, t};
    }
    static Point to_point(const State& s) noexcept {
        return {s.r1[0], s.r1[1], s.r1[2], s.r2[0], s.r2[1], s.r2[2]};
    }

    [[nodiscard]] Distances distances(const State& s) const {
        const double a = params_.slit_a;
        Distances d{detail::dist(s.r1, a), detail::dist(s.r1, -a), detail::dist(s.r2, a), detail::dist(s.r2, -a)};
        if (std::min({d.r1A, d.r1B, d.r2A, d.r2B}) < kSlitExclusion)
            throw DomainError("spherical: configuration at a slit point");
        return d;
    }

    [[nodiscard]] ComplexScalar psi3d(const State& s) const {
        const ComplexScalar time_phase = std::polar(1.0, -params_.energy() * s.t / params_.hbar);
        return raw_amplitude(distances(s)) * time_phase / norm_factor();
    }

    [[nodiscard]] double density_direct(const State& s) const { return numerics::modulus2(psi3d(s)); }

    /// |psi| (r1A r2B + r1B r2A) / 2 for the unnormalized amplitude; zero at a node.
    [[nodiscard]] double node_measure(const State& s) const {
        const auto d = distances(s);
        return std::abs(raw_amplitude(d)) * (d.r1A * d.r2B + d.r1B * d.r2A) / 2.0;
    }

    [[nodiscard]] bool is_node(const State& s) const { return node_measure(s) < kNodeThreshold; }

    [[nodiscard]] PhaseParts phase_parts(const State& s) const {
        return detail::phase_parts(distances(s), params_.k);
    }

    /// hbar atan2(N, D) - E t; principal branch of the arctangent.
    [[nodiscard]] double phase3d(const State& s) const {
        const auto d = checked_distances(s);
        const auto [N, D] = detail::phase_parts(d, params_.k);
        return params_.hbar * std::atan2(N, D) - params_.energy() * s.t;
    }

    [[nodiscard]] PhaseDerivatives dS_dr(const State& s) const {
        return detail::phase_derivatives(checked_distances(s), params_.k, params_.hbar);
    }

    [[nodiscard]] std::pair<Vec3, Vec3> velocities3d(const State& s) const {
        const auto d = checked_distances(s);
        const auto g = detail::phase_derivatives(d, params_.k, params_.hbar);
        const double a = params_.slit_a;
        const double inv_m = 1.0 / params_.m;
        Vec3 v1, v2;
        const Vec3 off1A{s.r1[0], s.r1[1] - a, s.r1[2]}, off1B{s.r1[0], s.r1[1] + a, s.r1[2]};
        const Vec3 off2A{s.r2[0], s.r2[1] - a, s.r2[2]}, off2B{s.r2[0], s.r2[1] + a, s.r2[2]};
        for (std::size_t i = 0; i < 3; ++i) {
            v1[i] = inv_m * (g.d_r1A * off1A[i] / d.r1A + g.d_r1B * off1B[i] / d.r1B);
            v2[i] = inv_m * (g.d_r2A * off2A[i] / d.r2A + g.d_r2B * off2B[i] / d.r2B);
        }
        return {v1, v2};
    }

    /// Six-component gradient of S assembled from dS_dr by the chain rule.
    [[nodiscard]] Point phase_gradient(const State& s) const {
        const auto [v1, v2] = velocities3d(s);
        const double m = params_.m;
        return {m * v1[0], m * v1[1], m * v1[2], m * v2[0], m * v2[1], m * v2[2]};
    }

    [[nodiscard]] Point velocity_field(const Point& x, double t) const {
        const auto [v1, v2] = velocities3d(to_state(x, t));
        return {v1[0], v1[1], v1[2], v2[0], v2[1], v2[2]};
    }

    [[nodiscard]] double density(const Point& x, double t) const { return density_direct(to_state(x, t)); }

    /// Per particle [x_min, L] x [-L/2, L/2]^2.
    [[nodiscard]] Point sampling_lo() const noexcept {
        const double h = length_ / 2.0;
        return {x_min_, -h, -h, x_min_, -h, -h};
    }
    [[nodiscard]] Point sampling_hi() const noexcept {
        const double h = length_ / 2.0;
        return {length_, h, h, length_, h, h};
    }

    /// Rigorous upper bound of |psi|^2 on the sampling box from the smallest
    /// possible source distances. Infinite when a source touches the box.
    [[nodiscard]] double density_bound() const noexcept {
        const double h = length_ / 2.0;
        const double dA = detail::box_distance(params_.slit_a, x_min_, length_, h);
        const double dB = detail::box_distance(-params_.slit_a, x_min_, length_, h);
        if (dA < kSlitExclusion || dB < kSlitExclusion) return std::numeric_limits<double>::infinity();
        const double amp = 2.0 / (dA * dB);
        return amp * amp / norm2_;
    }

private:
    [[nodiscard]] ComplexScalar raw_amplitude(const Distances& d) const {
        const double k = params_.k;
        return std::polar(1.0 / (d.r1A * d.r2B), k * (d.r1A + d.r2B)) +
               std::polar(1.0 / (d.r1B * d.r2A), k * (d.r1B + d.r2A));
    }

    [[nodiscard]] Distances checked_distances(const State& s) const {
        const auto d = distances(s);
        if (std::abs(raw_amplitude(d)) * (d.r1A * d.r2B + d.r1B * d.r2A) / 2.0 < kNodeThreshold)
            throw DomainError("spherical: node of psi");
        return d;
    }

    Params params_;
    double length_ = 0.0;
    double x_min_ = 0.0;
    double norm2_ = 1.0;
    double norm2_std_error_ = 0.0;
};

/// Constraint deviations at a single configuration.
inline ConstraintReport constraint_R_check(const SphericalPair& model, const State& s) {
    const auto d = model.distances(s);
    ConstraintReport rep;
    rep.mirror_deviation = std::max(std::abs(d.r1A - d.r2B), std::abs(d.r1B - d.r2A));
    rep.literal_deviation = std::max(std::abs(d.r1A - d.r2B), std::abs(d.r2B - d.r2A));
    rep.initial_mirror_deviation = rep.mirror_deviation;
    rep.initial_literal_deviation = rep.literal_deviation;
    rep.samples = 1;
    return rep;
}

/// Maximum constraint deviations over every sample of a trajectory.
inline ConstraintReport constraint_R_check(const SphericalPair& model, const numerics::Trajectory<6>& traj) {
    ConstraintReport rep;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const auto one = constraint_R_check(model, SphericalPair::to_state(traj.positions[i], traj.times[i]));
        if (i == 0) {
            rep.initial_mirror_deviation = one.mirror_deviation;
            rep.initial_literal_deviation = one.literal_deviation;
        }
        rep.mirror_deviation = std::max(rep.mirror_deviation, one.mirror_deviation);
        rep.literal_deviation = std::max(rep.literal_deviation, one.literal_deviation);
    }
    rep.samples = traj.size();
    return rep;
}

}  // namespace bohm::spherical
