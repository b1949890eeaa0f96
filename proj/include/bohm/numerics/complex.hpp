#pragma once

#include <cmath>
#include <complex>
#include <vector>

namespace bohm::numerics {

/// Complex amplitude of a wavefunction value.
using ComplexScalar = std::complex<double>;

/// |z|^2 without the square root.
inline double modulus2(ComplexScalar z) noexcept { return std::norm(z); }

/// Principal argument in (-pi, pi].
inline double principal_arg(ComplexScalar z) noexcept {
    double phi = std::atan2(z.imag(), z.real());
    return phi == -M_PI ? M_PI : phi;
}

/// Wraps an angle difference into [-period/2, period/2].
inline double wrap_difference(double d, double period = 2.0 * M_PI) noexcept {
    return std::remainder(d, period);
}

/// Removes jumps larger than period/2 between consecutive samples.
inline std::vector<double> unwrap(std::vector<double> values, double period = 2.0 * M_PI) {
    for (std::size_t i = 1; i < values.size(); ++i) {
        values[i] = values[i - 1] + std::remainder(values[i] - values[i - 1], period);
    }
    return values;
}

}  // namespace bohm::numerics
