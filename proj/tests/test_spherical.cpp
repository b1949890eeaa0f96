#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <random>

#include "bohm/errors.hpp"
#include "bohm/numerics/ode.hpp"
#include "bohm/spherical_pair.hpp"

using namespace bohm;
using namespace bohm::spherical;

namespace {

SphericalPair make(double k = 5.0, double a = 0.5) { return SphericalPair(Params{k, a}, 20'000); }

double dist(const Vec3& r, double ys) { return std::sqrt(r[0] * r[0] + (r[1] - ys) * (r[1] - ys) + r[2] * r[2]); }

// Unnormalized wavefunction written out independently of the model.
std::complex<double> psi_ref(const Params& pr, const std::array<double, 6>& x) {
    const Vec3 r1{x[0], x[1], x[2]}, r2{x[3], x[4], x[5]};
    const double a = pr.slit_a;
    const double r1A = dist(r1, a), r1B = dist(r1, -a), r2A = dist(r2, a), r2B = dist(r2, -a);
    return std::polar(1.0 / (r1A * r2B), pr.k * (r1A + r2B)) + std::polar(1.0 / (r1B * r2A), pr.k * (r1B + r2A));
}

std::array<double, 6> velocity_oracle(const Params& pr, const std::array<double, 6>& x, double h = 1e-6) {
    std::array<double, 6> v{};
    const auto c = psi_ref(pr, x);
    for (std::size_t i = 0; i < 6; ++i) {
        auto xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        v[i] = pr.hbar / pr.m * ((psi_ref(pr, xp) - psi_ref(pr, xm)) / (2 * h) / c).imag();
    }
    return v;
}

std::array<double, 6> random_point(std::mt19937_64& gen, const SphericalPair& model) {
    const auto lo = model.sampling_lo(), hi = model.sampling_hi();
    std::array<double, 6> x{};
    for (std::size_t i = 0; i < 6; ++i) x[i] = std::uniform_real_distribution<double>(lo[i], hi[i])(gen);
    return x;
}

// Both terms are comparable in size, so cancellation does not spoil the finite differences.
bool well_conditioned(const Params& pr, const std::array<double, 6>& x) {
    const Vec3 r1{x[0], x[1], x[2]}, r2{x[3], x[4], x[5]};
    const double a = pr.slit_a;
    const double t1 = 1.0 / (dist(r1, a) * dist(r2, -a)), t2 = 1.0 / (dist(r1, -a) * dist(r2, a));
    return std::abs(psi_ref(pr, x)) > 0.05 * (t1 + t2);
}

}  // namespace

TEST(SphericalParams, Validation) {
    try {
        SphericalPair(Params{-1.0}, 10);
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.field(), "k");
    }
    EXPECT_THROW(SphericalPair(Params{5.0, 0.0}, 10), ConfigError);
    EXPECT_DOUBLE_EQ(Params{}.energy(), 25.0);
    EXPECT_DOUBLE_EQ(Params{}.length(), 8.0);
    EXPECT_DOUBLE_EQ(Params{}.sampling_x_min(), 2.0);
}

TEST(SphericalGeometry, SlitPointThrows) {
    const auto model = make();
    EXPECT_THROW((void)model.distances({{0.0, 0.5, 0.0}, {1.0, 0.0, 0.0}, 0.0}), DomainError);
    EXPECT_THROW((void)model.velocities3d({{1.0, 0.0, 0.0}, {0.0, -0.5, 0.0}, 0.0}), DomainError);
}

TEST(SphericalPhase, SymmetricConfiguration) {
    const auto model = make(5.0, 0.5);
    const State s{{1.0, 0.0, 0.0}, {1.0, 0.0, 0.0}, 0.0};
    const double r = std::sqrt(1.25);
    const auto g = model.dS_dr(s);
    EXPECT_NEAR(g.d_r1A, 2.5, 1e-12);
    EXPECT_NEAR(g.d_r1B, 2.5, 1e-12);
    EXPECT_NEAR(g.d_r2A, 2.5, 1e-12);
    EXPECT_NEAR(g.d_r2B, 2.5, 1e-12);
    const auto [v1, v2] = model.velocities3d(s);
    EXPECT_NEAR(v1[0], 5.0 / r, 1e-12);
    EXPECT_NEAR(v1[1], 0.0, 1e-12);
    EXPECT_NEAR(v1[2], 0.0, 1e-12);
    EXPECT_NEAR(v2[0], 5.0 / r, 1e-12);
}

TEST(SphericalPhase, SingleTermLimit) {
    const Distances d{1.3, 1.7, 2.1, 0.9};
    const auto g = detail::phase_derivatives(d, 4.0, 1.0, 1.0, 0.0);
    EXPECT_NEAR(g.d_r1A, 4.0, 1e-12);
    EXPECT_NEAR(g.d_r2B, 4.0, 1e-12);
    EXPECT_NEAR(g.d_r1B, 0.0, 1e-12);
    EXPECT_NEAR(g.d_r2A, 0.0, 1e-12);
    const auto h = detail::phase_derivatives(d, 4.0, 2.0, 0.0, 1.0);
    EXPECT_NEAR(h.d_r1B, 8.0, 1e-12);
    EXPECT_NEAR(h.d_r2A, 8.0, 1e-12);
    EXPECT_NEAR(h.d_r1A, 0.0, 1e-12);
}

TEST(SphericalPhase, PrintedFormMatchesArgument) {
    const auto model = make();
    std::mt19937_64 gen(1);
    for (int i = 0; i < 200; ++i) {
        const auto x = random_point(gen, model);
        const double t = 0.37 * i / 200.0;
        const auto s = SphericalPair::to_state(x, t);
        const auto [N, D] = model.phase_parts(s);
        EXPECT_EQ(model.phase3d(s), std::atan2(N, D) - model.params().energy() * t);
        const double arg = std::arg(model.psi3d(s));
        EXPECT_NEAR(std::remainder(model.phase3d(s) - arg, 2 * M_PI), 0.0, 1e-9);
    }
}

TEST(SphericalVelocity, PropertyAgreesWithOracle) {
    std::mt19937_64 gen(77);
    int checked = 0;
    for (double k : {2.0, 5.0}) {
        const auto model = make(k, 0.5);
        while (checked < 500 * (k == 2.0 ? 1 : 2)) {
            const auto x = random_point(gen, model);
            if (!well_conditioned(model.params(), x)) continue;
            const auto v = model.velocity_field(x, 0.3);
            const auto o = velocity_oracle(model.params(), x);
            for (std::size_t i = 0; i < 6; ++i) ASSERT_NEAR(v[i], o[i], 1e-5 * (1.0 + std::abs(o[i])));
            ++checked;
        }
    }
}

TEST(SphericalVelocity, ChainRuleGradientMatchesPhaseDifferences) {
    const auto model = make();
    std::mt19937_64 gen(8);
    int checked = 0;
    while (checked < 200) {
        const auto x = random_point(gen, model);
        if (!well_conditioned(model.params(), x)) continue;
        const auto g = model.phase_gradient(SphericalPair::to_state(x, 0.0));
        for (std::size_t i = 0; i < 6; ++i) {
            auto xp = x, xm = x;
            const double h = 1e-6;
            xp[i] += h;
            xm[i] -= h;
            const double dS = std::remainder(model.phase3d(SphericalPair::to_state(xp, 0.0)) -
                                                 model.phase3d(SphericalPair::to_state(xm, 0.0)),
                                             2 * M_PI);
            EXPECT_NEAR(g[i], dS / (2 * h), 1e-5 * (1.0 + std::abs(g[i])));
        }
        ++checked;
    }
}

TEST(SphericalSymmetry, ExchangeAndReflection) {
    const auto model = make();
    std::mt19937_64 gen(4);
    for (int i = 0; i < 200; ++i) {
        const auto x = random_point(gen, model);
        const auto s = SphericalPair::to_state(x, 0.1);
        const State swapped{s.r2, s.r1, s.t};
        const State reflected{{s.r1[0], -s.r1[1], s.r1[2]}, {s.r2[0], -s.r2[1], s.r2[2]}, s.t};
        const double rho = model.density_direct(s);
        EXPECT_NEAR(model.density_direct(swapped), rho, 1e-12 * rho);
        EXPECT_NEAR(model.density_direct(reflected), rho, 1e-12 * rho);
        if (model.is_node(s)) continue;
        const auto [v1, v2] = model.velocities3d(s);
        const auto [w1, w2] = model.velocities3d(swapped);
        const auto [u1, u2] = model.velocities3d(reflected);
        for (std::size_t c = 0; c < 3; ++c) {
            const double sign = c == 1 ? -1.0 : 1.0;
            EXPECT_NEAR(w1[c], v2[c], 1e-9 * (1 + std::abs(v2[c])));
            EXPECT_NEAR(w2[c], v1[c], 1e-9 * (1 + std::abs(v1[c])));
            EXPECT_NEAR(u1[c], sign * v1[c], 1e-9 * (1 + std::abs(v1[c])));
            EXPECT_NEAR(u2[c], sign * v2[c], 1e-9 * (1 + std::abs(v2[c])));
        }
    }
}

TEST(SphericalSymmetry, MirrorIsAnInvolution) {
    const State s{{1.0, 0.2, -0.3}, {2.0, 0.7, 0.1}, 0.5};
    const auto m = mirror(mirror(s));
    EXPECT_EQ(m.r1, s.r1);
    EXPECT_EQ(m.r2, s.r2);
    const State on{{1.0, 0.3, 0.2}, {1.0, -0.3, 0.2}, 0.0};
    EXPECT_EQ(mirror(on).r1, on.r1);
}

TEST(SphericalConstraint, SingleConfiguration) {
    const auto model = make();
    const auto rep = constraint_R_check(model, {{1.0, 0.3, 0.0}, {1.0, -0.3, 0.0}, 0.0});
    EXPECT_NEAR(rep.mirror_deviation, 0.0, 1e-15);
    EXPECT_GT(rep.literal_deviation, 0.1);
    EXPECT_EQ(rep.samples, 1u);
}

TEST(SphericalConstraint, MirrorManifoldInvariantUnderFlow) {
    const auto model = make();
    auto rhs = [&](const std::array<double, 6>& x, double t) { return model.velocity_field(x, t); };
    const auto times = numerics::linspace_samples(0.0, 1.0, 101);
    const auto tr = numerics::integrate_ode<6>(rhs, {1.0, 0.3, 0.0, 1.0, -0.3, 0.0}, 0.0,
                                               std::span<const double>(times), numerics::IntegratorConfig{});
    ASSERT_FALSE(tr.truncated()) << tr.message;
    const auto rep = constraint_R_check(model, tr);
    EXPECT_LT(rep.mirror_deviation, 1e-6);
    EXPECT_EQ(rep.samples, tr.size());
    EXPECT_GT(tr.positions.back()[0], 1.5);
}

TEST(SphericalNode, ConstructedNodeIsFlagged) {
    // Equal term moduli need r2A / r2B = r1A / r1B; opposite phases then fix r2B.
    const auto model = make(5.0, 0.5);
    const Vec3 r1{0.5, 1.5, 0.0};
    const double r1A = dist(r1, 0.5), r1B = dist(r1, -0.5);
    const double rho = r1A / r1B;
    const double r2B = r1B - M_PI / (5.0 * (1.0 - rho));
    const double r2A = rho * r2B;
    const double y = (r2B * r2B - r2A * r2A) / (4 * 0.5);
    const double x = std::sqrt(r2A * r2A - (y - 0.5) * (y - 0.5));
    const State node{r1, {x, y, 0.0}, 0.0};
    ASSERT_LT(std::abs(psi_ref(model.params(), {r1[0], r1[1], r1[2], x, y, 0.0})), 1e-12);
    EXPECT_TRUE(model.is_node(node));
    EXPECT_THROW((void)model.velocities3d(node), DomainError);
    EXPECT_THROW((void)model.phase3d(node), DomainError);
    EXPECT_FALSE(model.is_node({r1, {x + 0.05, y, 0.0}, 0.0}));
}

TEST(SphericalNorm, BoundAndStandardError) {
    const SphericalPair model(Params{}, 200'000);
    EXPECT_LT(model.norm2_std_error(), 0.02 * model.norm_factor() * model.norm_factor());
    const SphericalPair other(Params{}, 200'000, 12345);
    const double n2a = model.norm_factor() * model.norm_factor();
    const double n2b = other.norm_factor() * other.norm_factor();
    EXPECT_LT(std::abs(n2a - n2b), 5 * std::hypot(model.norm2_std_error(), other.norm2_std_error()));

    const double bound = model.density_bound();
    ASSERT_TRUE(std::isfinite(bound));
    std::mt19937_64 gen(6);
    for (int i = 0; i < 20000; ++i) EXPECT_LE(model.density(random_point(gen, model), 0.0), bound);
    EXPECT_FALSE(std::isfinite(SphericalPair(Params{5.0, 0.5, 1.0, 1.0, 0.0, 0.0}, 100).density_bound()));
}
