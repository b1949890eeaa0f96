#pragma once

/**
 * @file ensemble.hpp
 * @brief Ensembles of guidance trajectories: sampling initial configurations
 *        from |psi|^2, evolving them, and comparing evolved distributions with
 *        the quantum density.
 *
 * Sampling is rejection sampling with a uniform proposal over the model's
 * sampling box, drawn sequentially from one seeded stream. Evolution treats
 * members independently and may use several threads; results are identical
 * for any thread count.
 */

#include <algorithm>
#include <atomic>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

#include "bohm/errors.hpp"
#include "bohm/numerics/ode.hpp"
#include "bohm/numerics/quadrature.hpp"
#include "bohm/numerics/random.hpp"
#include "bohm/numerics/roots.hpp"
#include "bohm/numerics/statistics.hpp"
#include "bohm/planewave_pair.hpp"
#include "bohm/spherical_pair.hpp"

namespace bohm::ensemble {

template <class M>
concept GuidanceModel = requires(const M& m, const typename M::Point& x, double t) {
    { M::dim } -> std::convertible_to<std::size_t>;
    { m.velocity_field(x, t) } -> std::same_as<typename M::Point>;
    { m.density(x, t) } -> std::convertible_to<double>;
    { m.sampling_lo() } -> std::same_as<typename M::Point>;
    { m.sampling_hi() } -> std::same_as<typename M::Point>;
    { m.density_bound() } -> std::convertible_to<double>;
};

inline constexpr double kMinAcceptance = 1e-4;
inline constexpr std::size_t kMinSurvivors = 100;

template <class Point>
struct SampleResult {
    std::vector<Point> points;
    std::size_t proposals = 0;
    [[nodiscard]] double acceptance_rate() const noexcept {
        return proposals == 0 ? 0.0 : static_cast<double>(points.size()) / static_cast<double>(proposals);
    }
};

/**
 * n configurations distributed as model.density(., t0) on the sampling box.
 * Throws ConfigError("box") when the acceptance rate falls below 1e-4 or the
 * density bound is not finite.
 */
template <GuidanceModel Model>
SampleResult<typename Model::Point> sample_initial(const Model& model, std::size_t n, std::uint64_t seed,
                                                   double t0 = 0.0) {
    if (n < 1) throw ConfigError("n", "must be >= 1");
    const double bound = model.density_bound();
    if (!std::isfinite(bound) || !(bound > 0.0))
        throw ConfigError("box", "density is unbounded on the sampling box (a source touches it)");

    const auto lo = model.sampling_lo();
    const auto hi = model.sampling_hi();
    numerics::Rng rng(seed);
    SampleResult<typename Model::Point> out;
    out.points.reserve(n);
    while (out.points.size() < n) {
        typename Model::Point x;
        for (std::size_t j = 0; j < Model::dim; ++j) x[j] = rng.uniform(lo[j], hi[j]);
        const double u = rng.uniform01();
        ++out.proposals;
        const double f = model.density(x, t0);
        if (f > bound * (1.0 + 1e-9)) throw std::logic_error("sample_initial: density exceeds its bound");
        if (u * bound < f) out.points.push_back(x);
        if (out.proposals >= 100'000 && out.proposals % 10'000 == 0 &&
            static_cast<double>(out.points.size()) < kMinAcceptance * static_cast<double>(out.proposals))
            throw ConfigError("box", "rejection efficiency below 1e-4");
    }
    return out;
}

template <GuidanceModel Model>
struct Ensemble {
    using Point = typename Model::Point;
    using Member = numerics::Trajectory<Model::dim>;

    Model model;
    std::string sampling = "direct_density";  ///< or "user_supplied"
    std::uint64_t seed = 0;
    std::string prng_id{numerics::Rng::algorithm_id};
    std::size_t proposals = 0;
    double acceptance_rate = 1.0;
    double t_start = 0.0;
    numerics::IntegratorConfig integrator{};
    std::vector<Member> members{};

    [[nodiscard]] std::size_t size() const noexcept { return members.size(); }
    [[nodiscard]] std::size_t truncated_count() const noexcept {
        return static_cast<std::size_t>(
            std::count_if(members.begin(), members.end(), [](const Member& m) { return m.truncated(); }));
    }
    [[nodiscard]] double survival_fraction() const noexcept {
        return members.empty() ? 0.0
                               : 1.0 - static_cast<double>(truncated_count()) / static_cast<double>(members.size());
    }
};

namespace detail {

template <GuidanceModel Model>
typename Ensemble<Model>::Member initial_member(const Model& model, const typename Model::Point& x, double t0) {
    typename Ensemble<Model>::Member m;
    try {
        m.push(t0, x, model.velocity_field(x, t0));
    } catch (const DomainError& e) {
        m.push(t0, x, typename Model::Point{});
        m.termination = numerics::Termination::domain_error;
        m.message = e.what();
    }
    return m;
}

}  // namespace detail

template <GuidanceModel Model>
Ensemble<Model> make_ensemble(const Model& model, std::size_t n, std::uint64_t seed, double t0 = 0.0) {
    auto sample = sample_initial(model, n, seed, t0);
    Ensemble<Model> ens{.model = model};
    ens.seed = seed;
    ens.proposals = sample.proposals;
    ens.acceptance_rate = sample.acceptance_rate();
    ens.t_start = t0;
    ens.members.reserve(n);
    for (const auto& x : sample.points) ens.members.push_back(detail::initial_member(model, x, t0));
    return ens;
}

template <GuidanceModel Model>
Ensemble<Model> make_ensemble_from_points(const Model& model, const std::vector<typename Model::Point>& points,
                                          double t0 = 0.0) {
    Ensemble<Model> ens{.model = model};
    ens.sampling = "user_supplied";
    ens.t_start = t0;
    for (const auto& x : points) ens.members.push_back(detail::initial_member(model, x, t0));
    return ens;
}

/**
 * Integrates every member from its last sample through `sample_times`.
 * Members that hit a node or another domain error keep the samples reached
 * and are marked truncated.
 */
template <GuidanceModel Model>
Ensemble<Model> evolve_ensemble(const Ensemble<Model>& ens, const std::vector<double>& sample_times,
                                const numerics::IntegratorConfig& cfg, unsigned threads = 1) {
    cfg.validate();
    Ensemble<Model> out = ens;
    out.integrator = cfg;
    const Model& model = out.model;
    auto rhs = [&model](const typename Model::Point& x, double t) { return model.velocity_field(x, t); };

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t i = next.fetch_add(1); i < out.members.size(); i = next.fetch_add(1)) {
            auto& member = out.members[i];
            if (member.truncated() || member.empty()) continue;
            const double t0 = member.times.back();
            std::vector<double> todo;
            for (double ts : sample_times)
                if (ts != t0) todo.push_back(ts);
            if (todo.empty()) continue;
            auto piece = numerics::integrate_ode<Model::dim>(rhs, member.positions.back(), t0,
                                                            std::span<const double>(todo), cfg);
            for (std::size_t k = 1; k < piece.size(); ++k)
                member.push(piece.times[k], piece.positions[k], piece.velocities[k]);
            member.termination = piece.termination;
            member.message = piece.message;
            member.steps_taken += piece.steps_taken;
        }
    };
    threads = std::max(1u, threads);
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
    }
    return out;
}

template <GuidanceModel Model>
Ensemble<Model> evolve_ensemble(const Ensemble<Model>& ens, double t_end, const numerics::IntegratorConfig& cfg,
                                unsigned threads = 1) {
    return evolve_ensemble(ens, std::vector<double>{t_end}, cfg, threads);
}

/// Positions of surviving members at exactly time t.
template <GuidanceModel Model>
std::vector<typename Model::Point> positions_at(const Ensemble<Model>& ens, double t) {
    std::vector<typename Model::Point> out;
    for (const auto& m : ens.members) {
        for (std::size_t k = 0; k < m.size(); ++k) {
            if (std::abs(m.times[k] - t) <= 1e-12 * std::max(1.0, std::abs(t))) {
                out.push_back(m.positions[k]);
                break;
            }
        }
    }
    return out;
}

struct DistributionReport {
    std::string marginal;        ///< which 1D marginal was compared
    std::string reference_kind;  ///< "quadrature_cdf" or "reference_sample"
    double time = 0.0;
    double ks_statistic = 0.0;
    double ks_critical_99 = 0.0;
    std::size_t sample_size = 0;
    double survival_fraction = 0.0;
    numerics::Histogram histogram;
    std::vector<double> reference_on_centers;  ///< marginal density at bin centers
    double chi_square = 0.0;

    [[nodiscard]] bool passes_99() const noexcept { return ks_statistic < ks_critical_99; }
};

// ---------------------------------------------------------------------------
// Plane-wave pair: delta = x1 - x2 marginal on the periodic box
// ---------------------------------------------------------------------------

/// Marginal of delta = x1 - x2 for density_direct on [0, L]^2, support [-L, L].
class DeltaMarginal {
public:
    explicit DeltaMarginal(const planewave::PlaneWavePair& model)
        : model_(model),
          cdf_(Weighted{&model_}, -model_.box_length(), model_.box_length(), cells_for(model_)) {}

    DeltaMarginal(const DeltaMarginal&) = delete;
    DeltaMarginal& operator=(const DeltaMarginal&) = delete;

    double cdf(double delta) const { return cdf_(delta); }
    double pdf(double delta) const { return Weighted{&model_}(delta) / cdf_.total(); }
    double operator()(double delta) const { return cdf(delta); }

private:
    struct Weighted {
        const planewave::PlaneWavePair* model;
        double operator()(double d) const {
            const double L = model->box_length();
            if (std::abs(d) >= L) return 0.0;
            return (L - std::abs(d)) * model->density_direct({d, 0.0, 0.0});
        }
    };
    static std::size_t cells_for(const planewave::PlaneWavePair& m) {
        const double period = M_PI * m.params().hbar / m.params().p;
        return static_cast<std::size_t>(std::max(2048.0, 256.0 * 2.0 * m.box_length() / period));
    }

    planewave::PlaneWavePair model_;
    numerics::TabulatedCdf<Weighted> cdf_;
};

/// Wraps positions onto [0, L)^2 and returns x1 - x2.
inline double wrapped_delta(const std::array<double, 2>& x, double L) {
    auto wrap = [L](double v) {
        double r = std::fmod(v, L);
        return r < 0.0 ? r + L : r;
    };
    return wrap(x[0]) - wrap(x[1]);
}

inline DistributionReport compare_distribution(const Ensemble<planewave::PlaneWavePair>& ens, double t) {
    const auto pts = positions_at(ens, t);
    if (pts.size() < kMinSurvivors)
        throw InsufficientSamples("compare_distribution: fewer than 100 members reached t");
    const double L = ens.model.box_length();
    std::vector<double> deltas;
    deltas.reserve(pts.size());
    for (const auto& x : pts) deltas.push_back(wrapped_delta(x, L));

    DeltaMarginal ref(ens.model);
    DistributionReport rep;
    rep.marginal = "delta=x1-x2 (periodic box)";
    rep.reference_kind = "quadrature_cdf";
    rep.time = t;
    rep.sample_size = deltas.size();
    rep.survival_fraction = static_cast<double>(deltas.size()) / static_cast<double>(ens.size());
    rep.ks_statistic = numerics::ks_statistic(deltas, ref);
    rep.ks_critical_99 = numerics::ks_critical_99(deltas.size());
    rep.histogram = numerics::make_histogram(deltas, -L, L, 128);
    std::vector<double> probs(rep.histogram.bins());
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const double c = rep.histogram.center(i);
        const double w = rep.histogram.width();
        rep.reference_on_centers.push_back(ref.pdf(c));
        probs[i] = ref.cdf(c + w / 2) - ref.cdf(c - w / 2);
    }
    rep.chi_square = numerics::chi_square(rep.histogram, probs);
    return rep;
}

// ---------------------------------------------------------------------------
// Spherical pair: one coordinate marginal against an independent |psi|^2 sample
// ---------------------------------------------------------------------------

inline DistributionReport compare_distribution(const Ensemble<spherical::SphericalPair>& ens, double t,
                                               std::size_t coordinate = 1) {
    if (coordinate >= 6) throw std::invalid_argument("compare_distribution: coordinate index must be < 6");
    const auto pts = positions_at(ens, t);
    if (pts.size() < kMinSurvivors)
        throw InsufficientSamples("compare_distribution: fewer than 100 members reached t");
    std::vector<double> xs;
    for (const auto& x : pts) xs.push_back(x[coordinate]);

    // The density is stationary, so a fresh sample at t is a sample of the reference.
    const auto ref = sample_initial(ens.model, pts.size(), ens.seed ^ 0x9e3779b97f4a7c15ULL, t);
    std::vector<double> rs;
    for (const auto& x : ref.points) rs.push_back(x[coordinate]);

    static constexpr std::array<const char*, 6> names{"x1", "y1", "z1", "x2", "y2", "z2"};
    DistributionReport rep;
    rep.marginal = names[coordinate];
    rep.reference_kind = "reference_sample";
    rep.time = t;
    rep.sample_size = xs.size();
    rep.survival_fraction = static_cast<double>(xs.size()) / static_cast<double>(ens.size());
    rep.ks_statistic = numerics::ks_two_sample(xs, rs);
    rep.ks_critical_99 = numerics::ks_two_sample_critical_99(xs.size(), rs.size());
    const auto lo = ens.model.sampling_lo()[coordinate];
    const auto hi = ens.model.sampling_hi()[coordinate];
    rep.histogram = numerics::make_histogram(xs, lo, hi, 64);
    const auto ref_hist = numerics::make_histogram(rs, lo, hi, 64);
    std::vector<double> probs;
    for (auto c : ref_hist.counts) {
        const double pr = static_cast<double>(c) / static_cast<double>(rs.size());
        probs.push_back(pr);
        rep.reference_on_centers.push_back(pr / ref_hist.width());
    }
    rep.chi_square = numerics::chi_square(rep.histogram, probs);
    return rep;
}

// ---------------------------------------------------------------------------
// Ensemble-global reading of the implicit relation
// ---------------------------------------------------------------------------

struct GlobalConstraintReport {
    std::vector<double> member_t0;  ///< per member: time of delta = 0 under its own beta
    double t0_min = 0.0;
    double t0_max = 0.0;
    double t0_mean = 0.0;
    double t0_std = 0.0;

    double common_t0 = 0.0;               ///< the ensemble's start time
    std::size_t roots_at_common_t0 = 0;   ///< solutions of F(delta) = 0 on [-L, L]
    std::vector<double> common_t0_roots;
    double ks_point_mass = 0.0;           ///< KS of the forced delta distribution vs density
    double ks_initial_sample = 0.0;       ///< KS of the actual initial delta sample vs density
    double cdf_at_zero = 0.0;
};

/**
 * Per-member reading: each member has its own beta and reaches delta = 0 at
 * its own t0. Global reading: one beta = -2 v t0 for all members at the
 * common t0 = ensemble start, which forces every delta onto a root of
 * F(delta) = 0; the resulting distribution is compared with |psi|^2.
 */
inline GlobalConstraintReport global_constraint_analysis(const Ensemble<planewave::PlaneWavePair>& ens) {
    const auto& model = ens.model;
    if (model.params().a == model.params().b) throw DegenerateParameters("global_constraint_analysis: a == b");
    if (ens.members.empty()) throw InsufficientSamples("global_constraint_analysis: empty ensemble");

    GlobalConstraintReport rep;
    std::vector<double> initial_deltas;
    for (const auto& m : ens.members) {
        const planewave::State s{m.positions.front()[0], m.positions.front()[1], m.times.front()};
        rep.member_t0.push_back(model.coincidence_time(s));
        initial_deltas.push_back(wrapped_delta(m.positions.front(), model.box_length()));
    }
    const auto [mn, mx] = std::minmax_element(rep.member_t0.begin(), rep.member_t0.end());
    rep.t0_min = *mn;
    rep.t0_max = *mx;
    const double n = static_cast<double>(rep.member_t0.size());
    rep.t0_mean = std::accumulate(rep.member_t0.begin(), rep.member_t0.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : rep.member_t0) ss += (v - rep.t0_mean) * (v - rep.t0_mean);
    rep.t0_std = std::sqrt(ss / n);

    rep.common_t0 = ens.t_start;
    const double L = model.box_length();
    const auto scan = numerics::count_roots_scan([&](double d) { return model.implicit_lhs(d); }, -L, L, 100'001);
    rep.common_t0_roots = scan.roots;
    rep.roots_at_common_t0 = scan.count();

    DeltaMarginal ref(model);
    rep.cdf_at_zero = ref.cdf(0.0);
    // With a unique root every member sits on it; otherwise members are
    // assigned to the root nearest their own initial delta.
    std::vector<double> forced;
    forced.reserve(ens.size());
    for (double d0 : initial_deltas) {
        double best = scan.roots.empty() ? 0.0 : scan.roots.front();
        for (double r : scan.roots)
            if (std::abs(r - d0) < std::abs(best - d0)) best = r;
        forced.push_back(best);
    }
    rep.ks_point_mass = numerics::ks_statistic(forced, ref);
    rep.ks_initial_sample = numerics::ks_statistic(initial_deltas, ref);
    return rep;
}

}  // namespace bohm::ensemble
