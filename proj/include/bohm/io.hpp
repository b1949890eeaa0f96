#pragma once

/**
 * @file io.hpp
 * @brief CSV output of trajectories and ensembles.
 *
 * Columns: member_id,t,x1,y1,z1,x2,y2,z2,v1x,v1y,v1z,v2x,v2y,v2z,truncated
 * One-dimensional models leave the y/z columns empty. Numbers use the
 * shortest decimal form that round-trips to the same binary64 value.
 */

#include <array>
#include <charconv>
#include <cstddef>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include "bohm/numerics/ode.hpp"

namespace bohm::io {

inline constexpr const char* kCsvHeader =
    "member_id,t,x1,y1,z1,x2,y2,z2,v1x,v1y,v1z,v2x,v2y,v2z,truncated";

inline std::string format_double(double v) {
    std::array<char, 32> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc{}) throw std::runtime_error("format_double failed");
    return {buf.data(), end};
}

namespace detail {

// Expands a model point into (x, y, z) per particle; empty strings for 1D.
template <std::size_t N>
std::array<std::string, 6> expand(const std::array<double, N>& p) {
    static_assert(N == 2 || N == 6, "1D pair or 3D pair");
    if constexpr (N == 2) {
        return {format_double(p[0]), "", "", format_double(p[1]), "", ""};
    } else {
        std::array<std::string, 6> out;
        for (std::size_t i = 0; i < 6; ++i) out[i] = format_double(p[i]);
        return out;
    }
}

}  // namespace detail

template <std::size_t N>
void write_rows(std::ostream& os, std::size_t member_id, const numerics::Trajectory<N>& traj) {
    const char* flag = traj.truncated() ? "1" : "0";
    for (std::size_t k = 0; k < traj.size(); ++k) {
        os << member_id << ',' << format_double(traj.times[k]);
        for (const auto& s : detail::expand(traj.positions[k])) os << ',' << s;
        for (const auto& s : detail::expand(traj.velocities[k])) os << ',' << s;
        os << ',' << flag << '\n';
    }
}

template <std::size_t N>
void write_csv(std::ostream& os, const std::vector<numerics::Trajectory<N>>& members) {
    os << kCsvHeader << '\n';
    for (std::size_t i = 0; i < members.size(); ++i) write_rows(os, i, members[i]);
}

template <std::size_t N>
void write_csv_file(const std::string& path, const std::vector<numerics::Trajectory<N>>& members) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path);
    write_csv(os, members);
}

}  // namespace bohm::io
