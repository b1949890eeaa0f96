#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace bohm::numerics {

/**
 * Seeded generator with a platform-independent mapping to doubles.
 *
 * std::mt19937_64 output is fully defined by the standard; the standard
 * distributions are not, so uniform variates use the top 53 bits directly.
 */
class Rng {
public:
    static constexpr std::string_view algorithm_id = "mt19937_64;u01=(x>>11)*2^-53";

    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform01() noexcept { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform01(); }
    std::uint64_t next() noexcept { return engine_(); }

private:
    std::mt19937_64 engine_;
};

}  // namespace bohm::numerics
