#pragma once

/**
 * @file oracle.hpp
 * @brief Guidance velocities computed straight from the wavefunction,
 *        v_i = (hbar/m) Im( d_i psi / psi ), with central differences of psi.
 *
 * This path uses only psi and never touches the analytic phase or its
 * derivatives, so it serves as the cross-check for both models.
 */

#include <array>
#include <cstddef>

#include "bohm/numerics/complex.hpp"
#include "bohm/numerics/finite_diff.hpp"
#include "bohm/planewave_pair.hpp"
#include "bohm/spherical_pair.hpp"

namespace bohm::oracle {

template <std::size_t N, class Psi>
std::array<double, N> im_log_gradient(Psi&& psi, const std::array<double, N>& x) {
    const numerics::ComplexScalar centre = psi(x);
    std::array<double, N> out{};
    for (std::size_t i = 0; i < N; ++i) {
        const double h = numerics::default_fd_step(x[i]);
        auto xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        const numerics::ComplexScalar d = (psi(xp) - psi(xm)) / (xp[i] - xm[i]);
        out[i] = (d / centre).imag();
    }
    return out;
}

inline std::array<double, 2> velocities(const planewave::PlaneWavePair& model, const planewave::State& s) {
    const auto& pr = model.params();
    auto psi = [&](const std::array<double, 2>& x) { return model.psi({x[0], x[1], s.t}); };
    auto g = im_log_gradient<2>(psi, {s.x1, s.x2});
    return {pr.hbar / pr.m * g[0], pr.hbar / pr.m * g[1]};
}

inline std::array<double, 6> velocities(const spherical::SphericalPair& model, const spherical::State& s) {
    const auto& pr = model.params();
    auto psi = [&](const std::array<double, 6>& x) {
        return model.psi3d(spherical::SphericalPair::to_state(x, s.t));
    };
    auto g = im_log_gradient<6>(psi, spherical::SphericalPair::to_point(s));
    for (auto& v : g) v *= pr.hbar / pr.m;
    return g;
}

}  // namespace bohm::oracle
