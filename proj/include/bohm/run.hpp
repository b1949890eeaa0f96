#pragma once

/**
 * @file run.hpp
 * @brief Executes a validated RunConfig: runs the selected analyses, writes
 *        trajectories.csv / ensemble.csv / claims_report.json / meta.json
 *        into the output directory and returns the exit status.
 *
 * Exit status: 0 when every checked claim passes, 2 when any check fails.
 * Configuration errors are reported by the caller (exit status 1).
 */

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "bohm/config.hpp"
#include "bohm/ensemble.hpp"
#include "bohm/io.hpp"
#include "bohm/numerics/finite_diff.hpp"
#include "bohm/numerics/random.hpp"
#include "bohm/oracle.hpp"
#include "bohm/planewave_pair.hpp"
#include "bohm/spherical_pair.hpp"
#include "json.hpp"

namespace bohm::run {

using nlohmann::json;

enum class Status { pass, fail, measured };

inline std::string_view to_string(Status s) {
    switch (s) {
        case Status::pass: return "pass";
        case Status::fail: return "fail";
        case Status::measured: return "measured";
    }
    return "?";
}

struct Claim {
    std::string claim_id;
    std::string anchor;  ///< which stated claim of the model this entry checks
    Status status = Status::measured;
    json value;
    std::optional<double> tolerance;
};

inline json to_json(const Claim& c) {
    return json{{"claim_id", c.claim_id},
                {"paper_anchor", c.anchor},
                {"status", std::string(to_string(c.status))},
                {"value", c.value},
                {"tolerance", c.tolerance ? json(*c.tolerance) : json(nullptr)}};
}

struct RunResult {
    int exit_code = 0;
    std::vector<Claim> claims;
    json meta;

    [[nodiscard]] const Claim* find(std::string_view id) const {
        for (const auto& c : claims)
            if (c.claim_id == id) return &c;
        return nullptr;
    }
};

namespace detail {

// Sub-seeds so each analysis draws from its own stream.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline Claim check(std::string id, std::string anchor, double value, double tol) {
    return {std::move(id), std::move(anchor), value < tol ? Status::pass : Status::fail, value, tol};
}

inline Claim exact_zero(std::string id, std::string anchor, double value) {
    return {std::move(id), std::move(anchor), value == 0.0 ? Status::pass : Status::fail, value, 0.0};
}

inline Claim measured(std::string id, std::string anchor, json value, std::optional<double> tol = std::nullopt) {
    return {std::move(id), std::move(anchor), Status::measured, std::move(value), tol};
}

inline json scan_json(const numerics::RootScanReport& r) {
    return json{{"interval", {r.lo, r.hi}},
                {"grid_points", r.grid_points},
                {"root_count", r.count()},
                {"roots", r.roots},
                {"is_monotone_on_interval", r.is_monotone_on_interval}};
}

inline json distribution_json(const ensemble::DistributionReport& r) {
    return json{{"marginal", r.marginal},
                {"reference", r.reference_kind},
                {"t", r.time},
                {"ks_statistic", r.ks_statistic},
                {"ks_critical_99", r.ks_critical_99},
                {"sample_size", r.sample_size},
                {"survival_fraction", r.survival_fraction},
                {"chi_square", r.chi_square},
                {"histogram_bins", r.histogram.bins()}};
}

template <class Model>
json ensemble_meta(const ensemble::Ensemble<Model>& ens) {
    return json{{"size", ens.size()},
                {"sampling", ens.sampling},
                {"seed", ens.seed},
                {"prng", ens.prng_id},
                {"proposals", ens.proposals},
                {"acceptance_rate", ens.acceptance_rate},
                {"truncated", ens.truncated_count()},
                {"survival_fraction", ens.survival_fraction()}};
}

inline std::string timestamp_utc() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// ---------------------------------------------------------------------------
// plane-wave pair
// ---------------------------------------------------------------------------

class PlaneWaveRun {
public:
    PlaneWaveRun(const config::RunConfig& cfg, RunResult& result)
        : cfg_(cfg), result_(result), model_(cfg.planewave) {}

    void execute() {
        namespace fs = std::filesystem;
        const auto& pr = model_.params();
        result_.meta["model"] = {{"tag", "planewave"},
                                 {"norm", model_.norm()},
                                 {"box_length", model_.box_length()},
                                 {"periodic_box_consistent", model_.periodic_box_consistent()},
                                 {"c", pr.c()},
                                 {"E", pr.energy()},
                                 {"v", pr.speed()}};
        if (cfg_.has(config::Analysis::trajectories)) trajectories();
        if (cfg_.has(config::Analysis::constraints)) constraints();
        if (cfg_.has(config::Analysis::uniqueness)) uniqueness();
        if (cfg_.has(config::Analysis::oracle_crosscheck)) oracle_crosscheck();
        if (cfg_.has(config::Analysis::density_discrepancy)) density_discrepancy();
        if (cfg_.has(config::Analysis::equivariance)) equivariance();
        if (cfg_.has(config::Analysis::global_constraint)) global_constraint();
        if (final_ensemble_) {
            io::write_csv_file((fs::path(cfg_.out_dir) / "ensemble.csv").string(), final_ensemble_->members);
            result_.meta["ensemble"] = ensemble_meta(*final_ensemble_);
        }
    }

private:
    using Ens = ensemble::Ensemble<planewave::PlaneWavePair>;

    [[nodiscard]] bool degenerate() const { return model_.params().a == model_.params().b; }

    const Ens& initial_ensemble() {
        if (!initial_) initial_ = ensemble::make_ensemble(model_, cfg_.n, cfg_.seed, cfg_.t_start);
        if (!final_ensemble_) final_ensemble_ = *initial_;
        return *initial_;
    }

    std::vector<numerics::Trajectory<2>> integrate_many(const std::vector<std::array<double, 2>>& starts) {
        const auto times = cfg_.sample_times();
        auto rhs = [this](const std::array<double, 2>& x, double t) { return model_.velocity_field(x, t); };
        std::vector<numerics::Trajectory<2>> out;
        for (const auto& x : starts)
            out.push_back(numerics::integrate_ode<2>(rhs, x, cfg_.t_start, times, cfg_.integrator));
        return out;
    }

    std::vector<std::array<double, 2>> sampled_starts(std::size_t count, std::uint64_t salt) {
        if (count == 0) return {};
        return ensemble::sample_initial(model_, count, derive_seed(cfg_.seed, salt), cfg_.t_start).points;
    }

    void conservation_claims(const std::string& prefix, const std::vector<numerics::Trajectory<2>>& trajs) {
        double cm = 0.0, res = 0.0, res_printed = 0.0;
        std::size_t truncated = 0;
        for (const auto& tr : trajs) {
            if (tr.truncated()) ++truncated;
            cm = std::max(cm, planewave::cm_invariant(tr));
            if (!degenerate()) {
                res = std::max(res, planewave::implicit_residual_drift(model_, tr));
                res_printed = std::max(res_printed, planewave::implicit_residual_drift(model_, tr, true));
            }
        }
        result_.claims.push_back(check(prefix + ".cm_invariant",
                                       "v1 + v2 = 0, so x1 + x2 = alpha (stationary centre of mass)", cm, 1e-8));
        if (!degenerate()) {
            result_.claims.push_back(check(prefix + ".implicit_residual_drift",
                                           "implicit relative-coordinate solution F(x1 - x2) = 2vt + beta", res,
                                           1e-6));
            result_.claims.push_back(measured(prefix + ".implicit_residual_drift_as_printed",
                                              "implicit relative-coordinate solution as printed (1/2 on the linear term)",
                                              res_printed));
        }
        result_.claims.push_back(measured(prefix + ".truncated", "guidance flow defined away from nodes",
                                          json{{"truncated", truncated}, {"total", trajs.size()}}));
    }

    void trajectories() {
        namespace fs = std::filesystem;
        std::vector<std::array<double, 2>> starts{cfg_.x_initial};
        for (const auto& x : sampled_starts(cfg_.n_trajectories, 1)) starts.push_back(x);
        const auto trajs = integrate_many(starts);
        io::write_csv_file((fs::path(cfg_.out_dir) / "trajectories.csv").string(), trajs);
        conservation_claims("trajectories", trajs);

        const auto& pr = model_.params();
        double max_speed = 0.0, free_dev = 0.0;
        for (const auto& tr : trajs) {
            for (std::size_t k = 0; k < tr.size(); ++k) {
                max_speed = std::max(max_speed, std::abs(tr.velocities[k][0]));
                const double dt = tr.times[k] - tr.times.front();
                free_dev = std::max(free_dev, std::abs(tr.positions[k][0] - tr.positions.front()[0] - pr.speed() * dt));
                free_dev = std::max(free_dev, std::abs(tr.positions[k][1] - tr.positions.front()[1] + pr.speed() * dt));
            }
        }
        if (degenerate()) {
            result_.claims.push_back(
                exact_zero("trajectories.static_when_a_equals_b", "a = b: both particles at rest", max_speed));
        }
        if (pr.b == 0.0) {
            result_.claims.push_back(check("trajectories.free_motion_when_b_zero",
                                           "b = 0: x1 = x1(0) + pt/m, x2 = x2(0) - pt/m", free_dev, 1e-9));
        }
        result_.claims.push_back(measured("trajectories.max_speed", "guidance velocity v1 = (1/m) dS/dx1", max_speed));
    }

    void constraints() {
        const auto trajs = integrate_many(sampled_starts(cfg_.n_constraint, 2));
        conservation_claims("constraints", trajs);
    }

    void uniqueness() {
        const auto& pr = model_.params();
        const double half = cfg_.scan_periods * M_PI * pr.hbar / pr.p;
        const auto rep =
            planewave::uniqueness_analysis(model_, cfg_.t_minus_t0, 0.0, {-half, half}, cfg_.grid);
        result_.claims.push_back(measured("uniqueness.condition_4ab_lt_a2_plus_b2",
                                          "unique root when 4ab < a^2 + b^2", rep.four_ab_condition));
        result_.claims.push_back(
            measured("uniqueness.condition_b_lt_a_over_3", "b < a/3 offered as sufficient for 4ab < a^2 + b^2",
                     rep.b_third_condition));
        result_.claims.push_back(measured(
            "uniqueness.conditions_agree", "b < a/3 offered as sufficient for 4ab < a^2 + b^2",
            json{{"agree", rep.conditions_agree()},
                 {"four_ab_lt_a2_plus_b2", rep.four_ab_condition},
                 {"b_lt_a_over_3", rep.b_third_condition},
                 {"exact_threshold_b_over_a", 2.0 - std::sqrt(3.0)}}));
        result_.claims.push_back(measured("uniqueness.root_count_as_printed",
                                          "single coincidence x1 = x2 at t0", scan_json(rep.printed_scan)));
        result_.claims.push_back(measured("uniqueness.root_count_conserved_form",
                                          "single coincidence x1 = x2 at t0",
                                          scan_json(rep.conserved_scan)));
        if (rep.four_ab_condition) {
            const double miss = rep.printed_scan.count() == 1 ? 0.0 : 1.0;
            result_.claims.push_back(check("uniqueness.single_root_when_condition_holds",
                                           "single coincidence x1 = x2 at t0 when 4ab < a^2 + b^2",
                                           miss, 0.5));
        }
        const double equiv = rep.printed_scan.is_monotone_on_interval == rep.four_ab_condition ? 0.0 : 1.0;
        result_.claims.push_back(check("uniqueness.monotone_iff_condition",
                                       "printed relation monotone in x1 - x2 iff 4ab < a^2 + b^2", equiv, 0.5));
    }

    void oracle_crosscheck() {
        const auto& pr = model_.params();
        numerics::Rng rng(derive_seed(cfg_.seed, 3));
        const double L = model_.box_length();
        double worst_v = 0.0, worst_sum = 0.0, worst_limit = 0.0;
        std::size_t used = 0, skipped = 0;
        for (std::size_t i = 0; i < cfg_.n_oracle; ++i) {
            const planewave::State s{rng.uniform(0.0, L), rng.uniform(0.0, L), rng.uniform(0.0, 1.0)};
            const double q = model_.profile(s.delta());
            if (q < 1e-6) {  // too close to a node for a finite-difference oracle
                ++skipped;
                continue;
            }
            ++used;
            const auto [v1, v2] = model_.velocities(s);
            const auto ov = oracle::velocities(model_, s);
            worst_v = std::max({worst_v, std::abs(v1 - ov[0]), std::abs(v2 - ov[1])});
            // both components from finite differences of the phase
            const double S0 = model_.phase(s).S;
            auto S = [&](const std::array<double, 2>& x) {
                return numerics::wrap_difference(model_.phase({x[0], x[1], s.t}).S - S0, 2 * M_PI * pr.hbar);
            };
            const auto g = numerics::finite_diff_gradient<2>(S, {s.x1, s.x2});
            worst_sum = std::max(worst_sum, std::abs(g[0] + g[1]) / pr.m);
            if (pr.b == 0.0) worst_limit = std::max({worst_limit, std::abs(v1 - pr.speed()), std::abs(v2 + pr.speed())});
        }
        result_.claims.push_back(check("oracle.velocity_vs_im_grad_psi",
                                       "guidance condition v_i = (1/m) dS/dx_i", worst_v, 1e-6));
        result_.claims.push_back(check("oracle.v1_plus_v2_from_phase", "v1 + v2 = 0", worst_sum, 1e-6));
        result_.claims.push_back(
            measured("oracle.states", "guidance condition v_i = (1/m) dS/dx_i",
                     json{{"used", used}, {"skipped_near_node", skipped}}));
        if (pr.b == 0.0) {
            result_.claims.push_back(
                check("oracle.plane_wave_limit_v1_eq_p_over_m", "b = 0: v1 = p/m, v2 = -p/m", worst_limit, 1e-12));
        }
    }

    void density_discrepancy() {
        auto max_gap = [](const planewave::PlaneWavePair& m) {
            const std::size_t grid = 10'001;
            double worst = 0.0;
            const auto& pr = m.params();
            for (std::size_t i = 0; i < grid; ++i) {
                const double th = 2 * M_PI * static_cast<double>(i) / static_cast<double>(grid - 1);
                const planewave::State s{th * pr.hbar / pr.p, 0.0, 0.0};
                worst = std::max(worst, std::abs(m.density_direct(s) - m.density_as_printed(s)));
            }
            return worst;
        };
        const double gap = max_gap(model_);
        result_.claims.push_back(measured("density.direct_vs_as_printed",
                                          "R^2 = (a^2 + b^2 + 2ab cos p(x1 - x2)/hbar) / (N (a+b)^2)",
                                          json{{"max_abs_difference", gap},
                                               {"formulas_agree", gap < 1e-12},
                                               {"a", model_.params().a},
                                               {"b", model_.params().b}},
                                          1e-12));
        auto limit = model_.params();
        limit.b = 0.0;
        if (limit.a == 0.0) limit.a = 1.0;
        result_.claims.push_back(check("density.b_zero_agreement",
                                       "b = 0: printed and direct densities coincide",
                                       max_gap(planewave::PlaneWavePair(limit)), 1e-12));
    }

    void equivariance() {
        const auto& ens0 = initial_ensemble();
        const auto at_start = ensemble::compare_distribution(ens0, cfg_.t_start);
        result_.claims.push_back(check("equivariance.sampler_ks_at_t0",
                                       "initial distribution P_t0 = |psi|^2 at t0", at_start.ks_statistic,
                                       at_start.ks_critical_99));
        auto evolved = ensemble::evolve_ensemble(ens0, cfg_.t_end, cfg_.integrator, cfg_.threads);
        const auto rep = ensemble::compare_distribution(evolved, cfg_.t_end);
        result_.claims.push_back(measured("equivariance.ks_at_t", "ensemble distribution stays |psi|^2 under the flow",
                                          distribution_json(rep), rep.ks_critical_99));

        if (!degenerate()) {
            // Reported, not checked: the integrator's tolerance is relative to
            // |x|, so members far from the origin drift more in absolute terms.
            std::size_t over = 0, alive = 0;
            double worst_cm = 0.0, worst_res = 0.0;
            for (const auto& m : evolved.members) {
                if (m.truncated()) continue;
                ++alive;
                const double cm = planewave::cm_invariant(m);
                const double res = planewave::implicit_residual_drift(model_, m);
                worst_cm = std::max(worst_cm, cm);
                worst_res = std::max(worst_res, res);
                if (cm >= 1e-8 || res >= 1e-6) ++over;
            }
            result_.claims.push_back(measured("equivariance.conservation_audit",
                                              "x1 + x2 = alpha and F(x1 - x2) = 2vt + beta for every member",
                                              json{{"max_cm_drift", worst_cm},
                                                   {"max_implicit_residual_drift", worst_res},
                                                   {"members_over_tolerance", over},
                                                   {"members", alive}},
                                              1e-6));
        }
        result_.claims.push_back(measured("equivariance.survival_fraction", "guidance flow defined away from nodes",
                                          evolved.survival_fraction()));
        final_ensemble_ = std::move(evolved);
    }

    void global_constraint() {
        if (degenerate()) {
            result_.claims.push_back(
                measured("global_constraint.skipped", "one beta shared by all pairs at t0",
                         "a == b: implicit relation undefined"));
            return;
        }
        const auto& ens0 = initial_ensemble();
        const auto rep = ensemble::global_constraint_analysis(ens0);
        result_.claims.push_back(measured("global_constraint.member_t0",
                                          "one beta shared by all pairs at t0",
                                          json{{"min", rep.t0_min},
                                               {"max", rep.t0_max},
                                               {"mean", rep.t0_mean},
                                               {"std", rep.t0_std},
                                               {"members", rep.member_t0.size()}}));
        result_.claims.push_back(measured("global_constraint.roots_at_common_t0",
                                          "all pairs coincide at a shared t0",
                                          json{{"root_count", rep.roots_at_common_t0}, {"roots", rep.common_t0_roots}}));
        result_.claims.push_back(measured("global_constraint.ks_point_mass_vs_density",
                                          "point mass at the shared root versus |psi|^2", rep.ks_point_mass));
        result_.claims.push_back(measured("global_constraint.ks_initial_sample_vs_density",
                                          "initial distribution P_t0 = |psi|^2 at t0", rep.ks_initial_sample));
        if (rep.roots_at_common_t0 == 1) {
            const double root = rep.common_t0_roots.front();
            ensemble::DeltaMarginal ref(model_);
            const double direct = std::max(ref.cdf(root), 1.0 - ref.cdf(root));
            result_.claims.push_back(check("global_constraint.point_mass_ks_oracle",
                                           "point mass at the shared root versus |psi|^2",
                                           std::abs(rep.ks_point_mass - direct), 1e-9));
        }
    }

    const config::RunConfig& cfg_;
    RunResult& result_;
    planewave::PlaneWavePair model_;
    std::optional<Ens> initial_;
    std::optional<Ens> final_ensemble_;
};

// ---------------------------------------------------------------------------
// spherical pair
// ---------------------------------------------------------------------------

class SphericalRun {
public:
    SphericalRun(const config::RunConfig& cfg, RunResult& result)
        : cfg_(cfg), result_(result), model_(cfg.spherical) {}

    void execute() {
        namespace fs = std::filesystem;
        result_.meta["model"] = {{"tag", "spherical"},
                                 {"norm_factor", model_.norm_factor()},
                                 {"norm2_std_error", model_.norm2_std_error()},
                                 {"box_length", model_.box_length()},
                                 {"x_min", model_.params().x_min},
                                 {"E", model_.params().energy()}};
        if (cfg_.has(config::Analysis::trajectories)) trajectories();
        if (cfg_.has(config::Analysis::constraints)) constraints();
        if (cfg_.has(config::Analysis::oracle_crosscheck)) oracle_crosscheck();
        if (cfg_.has(config::Analysis::equivariance)) equivariance();
        if (final_ensemble_) {
            io::write_csv_file((fs::path(cfg_.out_dir) / "ensemble.csv").string(), final_ensemble_->members);
            result_.meta["ensemble"] = ensemble_meta(*final_ensemble_);
        }
    }

private:
    using Point = spherical::SphericalPair::Point;

    numerics::Trajectory<6> integrate(const Point& x) {
        auto rhs = [this](const Point& y, double t) { return model_.velocity_field(y, t); };
        return numerics::integrate_ode<6>(rhs, x, cfg_.t_start, cfg_.sample_times(), cfg_.integrator);
    }

    void trajectories() {
        namespace fs = std::filesystem;
        std::vector<numerics::Trajectory<6>> trajs;
        trajs.push_back(integrate(spherical::SphericalPair::to_point({cfg_.r1, cfg_.r2, cfg_.t_start})));
        if (cfg_.n_trajectories > 0) {
            const auto starts = ensemble::sample_initial(model_, cfg_.n_trajectories, derive_seed(cfg_.seed, 1),
                                                         cfg_.t_start);
            for (const auto& x : starts.points) trajs.push_back(integrate(x));
        }
        io::write_csv_file((fs::path(cfg_.out_dir) / "trajectories.csv").string(), trajs);
        std::size_t truncated = 0;
        for (const auto& t : trajs) truncated += t.truncated() ? 1 : 0;
        result_.claims.push_back(measured("trajectories.truncated", "guidance flow defined away from nodes",
                                          json{{"truncated", truncated}, {"total", trajs.size()}}));
        const auto rep = spherical::constraint_R_check(model_, trajs.front());
        result_.claims.push_back(measured("trajectories.initial_trajectory_constraints",
                                          "mirror constraints r1A = r2B, r1B = r2A",
                                          json{{"mirror_deviation", rep.mirror_deviation},
                                               {"literal_deviation", rep.literal_deviation},
                                               {"initial_mirror_deviation", rep.initial_mirror_deviation}}));
    }

    void constraints() {
        const spherical::State s{cfg_.r1, {cfg_.r1[0], -cfg_.r1[1], cfg_.r1[2]}, cfg_.t_start};
        const auto tr = integrate(spherical::SphericalPair::to_point(s));
        const auto rep = spherical::constraint_R_check(model_, tr);
        result_.claims.push_back(check("constraints.mirror_manifold_invariance",
                                       "mirror constraints r1A = r2B, r1B = r2A kept by the flow",
                                       tr.truncated() ? 1.0 : rep.mirror_deviation, 1e-6));
        result_.claims.push_back(measured("constraints.literal_reading_deviation",
                                          "constraints r1A = r2B, r2B = r2A read literally",
                                          rep.literal_deviation));
        const spherical::State gen{cfg_.r1, cfg_.r2, cfg_.t_start};
        const auto gen_tr = integrate(spherical::SphericalPair::to_point(gen));
        const auto grep = spherical::constraint_R_check(model_, gen_tr);
        result_.claims.push_back(measured("constraints.configured_start_deviation",
                                          "generic starts off the constraint set",
                                          json{{"mirror_deviation", grep.mirror_deviation},
                                               {"literal_deviation", grep.literal_deviation},
                                               {"initial_mirror_deviation", grep.initial_mirror_deviation}}));
    }

    void oracle_crosscheck() {
        const auto& pr = model_.params();
        numerics::Rng rng(derive_seed(cfg_.seed, 3));
        const auto lo = model_.sampling_lo();
        const auto hi = model_.sampling_hi();
        double worst_v = 0.0, worst_grad = 0.0, worst_sym = 0.0;
        std::size_t used = 0, skipped = 0;
        while (used < cfg_.n_oracle) {
            Point x;
            for (std::size_t j = 0; j < 6; ++j) x[j] = rng.uniform(lo[j], hi[j]);
            const auto s = spherical::SphericalPair::to_state(x, rng.uniform(0.0, 1.0));
            if (!well_conditioned(s)) {
                ++skipped;
                continue;
            }
            ++used;
            const auto v = model_.velocity_field(x, s.t);
            const auto ov = oracle::velocities(model_, s);
            for (std::size_t j = 0; j < 6; ++j) worst_v = std::max(worst_v, std::abs(v[j] - ov[j]));

            const double S0 = model_.phase3d(s);
            auto S = [&](const Point& y) {
                return numerics::wrap_difference(model_.phase3d(spherical::SphericalPair::to_state(y, s.t)) - S0,
                                                 2 * M_PI * pr.hbar);
            };
            const auto g_fd = numerics::finite_diff_gradient<6>(S, x);
            const auto g = model_.phase_gradient(s);
            for (std::size_t j = 0; j < 6; ++j) worst_grad = std::max(worst_grad, std::abs(g[j] - g_fd[j]));

            const auto vm = model_.velocity_field(spherical::SphericalPair::to_point(spherical::mirror(s)), s.t);
            const Point expect{v[3], -v[4], v[5], v[0], -v[1], v[2]};
            for (std::size_t j = 0; j < 6; ++j) worst_sym = std::max(worst_sym, std::abs(vm[j] - expect[j]));
        }
        result_.claims.push_back(check("oracle.velocity_vs_im_grad_psi",
                                       "chain-rule guidance velocities v = (1/m) grad S", worst_v, 1e-6));
        result_.claims.push_back(check("oracle.chain_rule_gradient_vs_phase_fd",
                                       "dS/dr partials assembled by the chain rule", worst_grad, 1e-6));
        result_.claims.push_back(check("oracle.mirror_exchange_symmetry",
                                       "symmetric under y -> -y and under interchange 1 <-> 2", worst_sym, 1e-9));
        result_.claims.push_back(measured("oracle.states", "chain-rule guidance velocities v = (1/m) grad S",
                                          json{{"used", used}, {"skipped_near_node", skipped}}));
    }

    void equivariance() {
        auto ens0 = ensemble::make_ensemble(model_, cfg_.n, cfg_.seed, cfg_.t_start);
        auto evolved = ensemble::evolve_ensemble(ens0, cfg_.t_end, cfg_.integrator, cfg_.threads);
        const auto rep = ensemble::compare_distribution(evolved, cfg_.t_end, cfg_.marginal);
        result_.claims.push_back(measured("equivariance.ks_at_t", "ensemble distribution stays |psi|^2 under the flow",
                                          distribution_json(rep), rep.ks_critical_99));
        result_.claims.push_back(measured("equivariance.survival_fraction", "guidance flow defined away from nodes",
                                          evolved.survival_fraction()));
        final_ensemble_ = std::move(evolved);
    }

    // Excludes states where the two terms nearly cancel; there the phase
    // varies too fast for a 1e-6 finite-difference stencil.
    [[nodiscard]] bool well_conditioned(const spherical::State& s) const {
        const auto d = model_.distances(s);
        const double t1 = 1.0 / (d.r1A * d.r2B), t2 = 1.0 / (d.r1B * d.r2A);
        const double amp = std::abs(std::polar(t1, pr_k() * (d.r1A + d.r2B)) + std::polar(t2, pr_k() * (d.r1B + d.r2A)));
        return amp > 0.05 * (t1 + t2);
    }
    [[nodiscard]] double pr_k() const { return model_.params().k; }

    const config::RunConfig& cfg_;
    RunResult& result_;
    spherical::SphericalPair model_;
    std::optional<ensemble::Ensemble<spherical::SphericalPair>> final_ensemble_;
};

}  // namespace detail

/// Runs every selected analysis and writes the output files.
inline RunResult run(const config::RunConfig& cfg) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);
    RunResult result;
    if (cfg.model == config::Model::planewave) {
        detail::PlaneWaveRun(cfg, result).execute();
    } else {
        detail::SphericalRun(cfg, result).execute();
    }

    json claims = json::array();
    bool failed = false;
    for (const auto& c : result.claims) {
        claims.push_back(to_json(c));
        failed = failed || c.status == Status::fail;
    }
    result.exit_code = failed ? 2 : 0;

    result.meta["config"] = config::to_json(cfg);
    result.meta["prng"] = std::string(numerics::Rng::algorithm_id);
    result.meta["seed"] = cfg.seed;
    result.meta["integrator"] = {{"method", std::string(numerics::to_string(cfg.integrator.method))},
                                 {"step", cfg.integrator.step},
                                 {"rel_tol", cfg.integrator.rel_tol},
                                 {"abs_tol", cfg.integrator.abs_tol},
                                 {"max_steps", cfg.integrator.max_steps}};
    result.meta["exit_code"] = result.exit_code;
    result.meta["timestamp"] = detail::timestamp_utc();

    std::ofstream(fs::path(cfg.out_dir) / "claims_report.json") << claims.dump(2) << '\n';
    std::ofstream(fs::path(cfg.out_dir) / "meta.json") << result.meta.dump(2) << '\n';
    return result;
}

}  // namespace bohm::run
