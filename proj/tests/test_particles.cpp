#include <gtest/gtest.h>

#include <cmath>

#include "degdiff/diagnostics.hpp"
#include "degdiff/oracles.hpp"
#include "degdiff/particles.hpp"

using namespace degdiff;

namespace {

const MonotoneGraph H = build_graph(GraphSpec::heaviside(1.0));
const MonotoneGraph Lin = build_graph(GraphSpec::linear(1.0));

GridField box(const Grid& g, double height, double half) {
    return GridField::sample(g, [=](double x) { return std::abs(x) <= half ? height : 0.0; });
}

}  // namespace

TEST(CounterRng, UniformAndNormalMoments) {
    const CounterRng rng(42, 7);
    const std::size_t n = 200000;
    double su = 0.0, sz = 0.0, sz2 = 0.0, sz4 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double u = rng.uniform(k);
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
        su += u;
        const double z = rng.normal(k);
        sz += z;
        sz2 += z * z;
        sz4 += z * z * z * z;
    }
    const double N = static_cast<double>(n);
    EXPECT_NEAR(su / N, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / N));
    EXPECT_NEAR(sz / N, 0.0, 4.0 / std::sqrt(N));
    EXPECT_NEAR(sz2 / N, 1.0, 4.0 * std::sqrt(2.0 / N));
    EXPECT_NEAR(sz4 / N, 3.0, 4.0 * std::sqrt(96.0 / N));
}

TEST(CounterRng, IsAPureFunctionOfSeedStreamCounter) {
    const CounterRng a(1, 2), b(1, 2), c(1, 3), d(2, 2);
    for (std::uint64_t k = 0; k < 100; ++k) {
        EXPECT_EQ(a.bits(k), b.bits(k));
        EXPECT_NE(a.bits(k), c.bits(k));
        EXPECT_NE(a.bits(k), d.bits(k));
    }
}

TEST(Reflect, FoldsIntoTheBox) {
    EXPECT_EQ(detail::reflect(0.3, 1.0), 0.3);
    EXPECT_DOUBLE_EQ(detail::reflect(1.25, 1.0), 0.75);
    EXPECT_DOUBLE_EQ(detail::reflect(-1.5, 1.0), -0.5);
    EXPECT_DOUBLE_EQ(detail::reflect(3.5, 1.0), -0.5);
    for (double y = -10.0; y <= 10.0; y += 0.173) {
        const double r = detail::reflect(y, 2.0);
        EXPECT_GE(r, -2.0);
        EXPECT_LE(r, 2.0);
    }
}

TEST(InitialPositions, StratifiedMatchesTheDatum) {
    const Grid g(10.0, 2000);
    const auto u0 = heat_solution(1.0).sample(g, 0.0);
    const auto y = detail::initial_positions(u0, 20000, 5, true);
    EXPECT_LT(law_distance(y, u0).ks, 1e-3);
    const auto iid = detail::initial_positions(u0, 20000, 5, false);
    EXPECT_LT(law_distance(iid, u0).ks, 1.63 / std::sqrt(20000.0));
    EXPECT_THROW(detail::initial_positions(GridField(g, 0.0), 10, 5, true), InvalidArgument);
}

TEST(Coupled, LinearIsBrownianMotion) {
    const Grid g(10.0, 1000);
    const auto traj = evolve(Lin, heat_solution(1.0).sample(g, 0.0), 1.0, 100);
    const std::size_t N = 20000;
    const auto path = simulate_coupled(traj, N, 1, 11);
    const auto m0 = sample_moments(path.positions.front()), mT = sample_moments(path.final());
    EXPECT_NEAR(mT.variance - m0.variance, 1.0, 4.0 * std::sqrt(2.0 / N) * mT.variance);
    EXPECT_LT(law_distance(path.final(), traj.u.back()).ks, 1.63 / std::sqrt(static_cast<double>(N)) + 2e-3);

    // E|B_s|^4 = 3 s^2
    for (const auto& inc : increment_fourth_moments(path, 1.0)) {
        EXPECT_NEAR(inc.fourth_moment, inc.bound, 4.0 * inc.standard_error) << "lag " << inc.lag;
        EXPECT_NEAR(inc.bound, 3.0 * inc.lag * inc.lag, 1e-12);
    }
}

TEST(Coupled, SubcriticalEnsembleIsFrozen) {
    const Grid g(2.0, 400);
    const auto traj = evolve(H, box(g, 0.9, 0.5), 0.1, 100);
    const auto path = simulate_coupled(traj, 5000, 4, 7);
    EXPECT_EQ(path.final(), path.positions.front());
    for (const auto& inc : increment_fourth_moments(path, H.growth_bound(0.9))) {
        EXPECT_EQ(inc.fourth_moment, 0.0);
        EXPECT_EQ(inc.bound, 0.0);
    }
}

TEST(Coupled, DeterministicAcrossWorkersAndReruns) {
    const Grid g(2.0, 200);
    const auto traj = evolve(H, box(g, 1.5, 1.0 / 3.0), 0.1, 20);
    ParticleOptions serial, parallel;
    parallel.workers = 4;
    const auto a = simulate_coupled(traj, 3001, 2, 99, serial);
    const auto b = simulate_coupled(traj, 3001, 2, 99, parallel);
    const auto c = simulate_coupled(traj, 3001, 2, 99, serial);
    const auto d = simulate_coupled(traj, 3001, 2, 100, serial);
    EXPECT_EQ(a.positions, b.positions);
    EXPECT_EQ(a.positions, c.positions);
    EXPECT_NE(a.final(), d.final());
}

TEST(Coupled, RecordsRequestedStepsOnly) {
    const Grid g(2.0, 100);
    const auto traj = evolve(H, box(g, 1.5, 0.5), 0.1, 8);
    ParticleOptions opt;
    opt.record_steps = {0, 4, 8};
    const auto path = simulate_coupled(traj, 100, 1, 1, opt);
    EXPECT_EQ(path.steps, (std::vector<std::size_t>{0, 4, 8}));
    EXPECT_DOUBLE_EQ(path.times[1], 0.05);
    EXPECT_EQ(path.at_step(4), path.positions[1]);
    EXPECT_THROW(simulate_coupled(traj, 0, 1, 1), InvalidArgument);
    EXPECT_THROW(simulate_coupled(traj, 10, 0, 1), InvalidArgument);
}

TEST(Coupled, HeavisideMomentsAndLaw) {
    const Grid g(2.0, 400);
    const auto u0 = box(g, 1.5, 1.0 / 3.0);
    const auto traj = evolve(H, u0, 0.1, 100);
    const std::size_t N = 50000;
    ParticleOptions opt;
    opt.record_steps = {0, 50, 75, 100};
    const auto path = simulate_coupled(traj, N, 4, 12345, opt);
    EXPECT_LT(law_distance(path.final(), traj.u.back()).ks, 0.02);
    for (const auto& row : moment_check(path, traj)) {
        EXPECT_LE(std::abs(row.mean_drift), row.mean_bound) << "t=" << row.t;
        EXPECT_NEAR(row.variance_gain, row.eta_integral, 4.0 * row.standard_error + row.mean_bound * row.mean_bound)
            << "t=" << row.t;
    }
    for (const auto& inc : increment_fourth_moments(path, H.growth_bound(1.5)))
        EXPECT_LE(inc.fourth_moment, inc.bound + 4.0 * inc.standard_error) << "lag " << inc.lag;
}

TEST(Kde, IntegratesToOneAndRejectsBadBandwidth) {
    const Grid g(5.0, 500);
    std::vector<double> y;
    for (int i = 0; i < 1000; ++i) y.push_back(-1.0 + 2.0 * (i + 0.5) / 1000.0);
    const auto f = kde_on_grid(y, g, 0.1);
    EXPECT_NEAR(integrate(f), 1.0, 1e-3);
    EXPECT_NEAR(f[250], 0.5, 1e-2);
    EXPECT_THROW(kde_on_grid(y, g, 0.0), InvalidArgument);
    EXPECT_THROW(kde_on_grid(y, g, -1.0), InvalidArgument);
    // 1.06 * sd * N^{-1/5} with the unbiased standard deviation; the points are symmetric about 0
    double ss = 0.0;
    for (double v : y) ss += v * v;
    EXPECT_NEAR(rule_of_thumb_bandwidth(y), 1.06 * std::sqrt(ss / 999.0) * std::pow(1000.0, -0.2), 1e-12);
}

TEST(SelfConsistent, LinearAgreesWithCoupled) {
    const Grid g(10.0, 1000);
    const auto u0 = heat_solution(1.0).sample(g, 0.0);
    const std::size_t N = 20000;
    const auto sc = simulate_selfconsistent(Lin, u0, 1.0, 100, N, 3);
    const auto co = simulate_coupled(evolve(Lin, u0, 1.0, 100), N, 1, 3);
    EXPECT_LE(ks_two_sample(sc.final(), co.final()), 1.63 * std::sqrt(2.0 / N));
}

TEST(SelfConsistent, RegularizedHeavisideTracksRegularizedPde) {
    const Grid g(2.0, 400);
    const auto u0 = box(g, 1.5, 1.0 / 3.0);
    SelfConsistentOptions opt;
    opt.eps = 0.05;
    const auto path = simulate_selfconsistent(H, u0, 0.1, 100, 20000, 99, opt);
    const auto pde = evolve(regularize(H, 0.05), u0, 0.1, 100);
    EXPECT_LT(law_distance(path.final(), pde.u.back()).ks, 0.02);
}

TEST(SelfConsistent, RejectsBadArguments) {
    const Grid g(2.0, 100);
    const auto u0 = box(g, 1.5, 0.5);
    SelfConsistentOptions opt;
    opt.bandwidth = 0.0;
    EXPECT_THROW(simulate_selfconsistent(H, u0, 0.1, 10, 100, 1, opt), InvalidArgument);
    EXPECT_THROW(simulate_selfconsistent(H, u0, 0.0, 10, 100, 1), InvalidArgument);
    EXPECT_THROW(simulate_selfconsistent(H, u0, 0.1, 10, 1, 1), InvalidArgument);
    EXPECT_THROW(simulate_selfconsistent(H, GridField(g, 0.0), 0.1, 10, 100, 1), InvalidArgument);
}

TEST(LawDistance, Examples) {
    // uniform density on the whole box [-1/2, 1/2] has CDF x + 1/2
    const GridField uniform(Grid(0.5, 50), 1.0);
    const std::vector<double> two{-0.25, 0.25};
    const auto d = law_distance(two, uniform, 0.3);
    EXPECT_NEAR(d.ks, 0.25, 1e-12);
    EXPECT_DOUBLE_EQ(d.t, 0.3);
    EXPECT_EQ(d.sample_size, 2u);
    EXPECT_THROW(law_distance(std::vector<double>{}, uniform), InvalidArgument);

    std::vector<double> dense;
    for (int i = 0; i < 10000; ++i) dense.push_back(-0.5 + (i + 0.5) / 10000.0);
    const auto close = law_distance(dense, uniform);
    EXPECT_LT(close.ks, 1e-3);
    EXPECT_LT(close.wasserstein1, 1e-3);
    EXPECT_LT(close.histogram_l1, 1e-2);
}

TEST(TwoSample, Examples) {
    const std::vector<double> zeros(10, 0.0), ones(10, 1.0);
    EXPECT_DOUBLE_EQ(wasserstein1(zeros, ones), 1.0);
    EXPECT_DOUBLE_EQ(ks_two_sample(zeros, ones), 1.0);
    EXPECT_DOUBLE_EQ(ks_two_sample(zeros, zeros), 0.0);
    EXPECT_DOUBLE_EQ(wasserstein1(std::vector<double>{0.0, 2.0}, std::vector<double>{1.0, 1.0}), 1.0);
    EXPECT_DOUBLE_EQ(ks_two_sample(std::vector<double>{0.0, 1.0}, std::vector<double>{0.5, 2.0}), 0.5);
}
