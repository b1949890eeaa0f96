#pragma once

/**
 * @file statistics.hpp
 * @brief Kolmogorov-Smirnov statistics, histograms and binned chi-square.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace bohm::numerics {

/// Asymptotic 99% critical value of the one-sample KS statistic.
inline double ks_critical_99(std::size_t n) { return 1.63 / std::sqrt(static_cast<double>(n)); }

/// sup_x |F_n(x) - F(x)| for the empirical CDF of `samples`.
template <class Cdf>
double ks_statistic(std::vector<double> samples, const Cdf& cdf) {
    if (samples.empty()) throw std::invalid_argument("ks_statistic: empty sample");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max(d, std::max(f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f));
    }
    return d;
}

/// sup_x |F_a(x) - F_b(x)| between two empirical CDFs.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

/// 99% critical value of the two-sample KS statistic.
inline double ks_two_sample_critical_99(std::size_t na, std::size_t nb) {
    const double a = static_cast<double>(na), b = static_cast<double>(nb);
    return 1.63 * std::sqrt((a + b) / (a * b));
}

struct Histogram {
    double lo = 0.0;
    double hi = 1.0;
    std::vector<std::uint64_t> counts;
    std::uint64_t outside = 0;

    [[nodiscard]] std::size_t bins() const noexcept { return counts.size(); }
    [[nodiscard]] double width() const noexcept { return (hi - lo) / static_cast<double>(counts.size()); }
    [[nodiscard]] double center(std::size_t i) const noexcept {
        return lo + (static_cast<double>(i) + 0.5) * width();
    }
};

inline Histogram make_histogram(const std::vector<double>& samples, double lo, double hi, std::size_t bins) {
    if (bins == 0 || !(hi > lo)) throw std::invalid_argument("make_histogram: bad binning");
    Histogram h{lo, hi, std::vector<std::uint64_t>(bins, 0), 0};
    for (double x : samples) {
        if (x < lo || x > hi) {
            ++h.outside;
            continue;
        }
        auto i = static_cast<std::size_t>((x - lo) / (hi - lo) * static_cast<double>(bins));
        h.counts[std::min(i, bins - 1)]++;
    }
    return h;
}

/// Pearson chi-square of histogram counts against expected bin probabilities.
/// Bins with zero expected probability are skipped.
inline double chi_square(const Histogram& h, const std::vector<double>& expected_prob) {
    if (expected_prob.size() != h.bins()) throw std::invalid_argument("chi_square: bin mismatch");
    std::uint64_t n = 0;
    for (auto c : h.counts) n += c;
    double chi = 0.0;
    for (std::size_t i = 0; i < h.bins(); ++i) {
        const double e = expected_prob[i] * static_cast<double>(n);
        if (e <= 0.0) continue;
        const double d = static_cast<double>(h.counts[i]) - e;
        chi += d * d / e;
    }
    return chi;
}

}  // namespace bohm::numerics
