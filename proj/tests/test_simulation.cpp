#include <gtest/gtest.h>

#include <cmath>

#include "nmd/demo_params.hpp"
#include "nmd/error.hpp"
#include "nmd/simulation.hpp"
#include "support.hpp"

using namespace nmd;

namespace {

SimSpec base_spec(const Var1Params& p, std::size_t n_paths, std::size_t horizon) {
    SimSpec s;
    s.params = p;
    s.x0 = demo_initial_state();
    s.n_paths = n_paths;
    s.horizon_steps = horizon;
    s.seed = 314;
    s.threads = 1;
    return s;
}

}  // namespace

TEST(Simulation, NoiseFreeFollowsDriftRecursion) {
    const Var1Params p = demo_nig_params();
    SimSpec s = base_spec(p, 3, 240);
    s.noise_free = true;
    const PathEnsemble ens = simulate(s);
    const OuDrift ou = var1_to_ou(p.a, p.B, p.dt);
    Mat3 bk = Mat3::identity();
    for (std::size_t k = 0; k <= 240; ++k) {
        const Vec3 expected = ou.theta + bk * (s.x0 - ou.theta);
        for (std::size_t i = 0; i < 3; ++i)
            EXPECT_NEAR(ens.state(1, k, i), expected[i], 1e-9 * std::max(1.0, std::abs(expected[i])));
        bk = p.B * bk;
    }
    EXPECT_EQ(ens.state(0, 100, 2), ens.state(2, 100, 2));
}

TEST(Simulation, StartsAtInitialStateAndVolumesPositive) {
    const PathEnsemble ens = simulate(base_spec(demo_nig_params(), 200, 24));
    for (std::size_t p = 0; p < ens.n_paths(); ++p) {
        for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(ens.state(p, 0, i), demo_initial_state()[i]);
        for (std::size_t k = 0; k < ens.steps(); ++k) {
            EXPECT_GT(ens.volume(p, k), 0.0);
            EXPECT_EQ(ens.volume(p, k), std::exp(ens.state(p, k, 2)));
            EXPECT_EQ(ens.level(p, k, 1), std::exp(ens.state(p, k, 1)));
            EXPECT_EQ(ens.level(p, k, 0), ens.state(p, k, 0));
        }
    }
    EXPECT_EQ(ens.grid().back(), 24.0);
}

TEST(Simulation, WorkerCountIndependent) {
    SimSpec s = base_spec(demo_nig_params(), 1001, 36);
    const PathEnsemble one = simulate(s);
    s.threads = 4;
    const PathEnsemble four = simulate(s);
    s.threads = 7;
    const PathEnsemble seven = simulate(s);
    EXPECT_EQ(one.data(), four.data());
    EXPECT_EQ(one.data(), seven.data());
}

TEST(Simulation, PrefixDeterminism) {
    SimSpec s = base_spec(demo_nig_params(), 500, 12);
    const PathEnsemble small = simulate(s);
    s.n_paths = 1000;
    const PathEnsemble big = simulate(s);
    for (std::size_t p = 0; p < 500; ++p)
        for (std::size_t k = 0; k < 13; ++k) ASSERT_EQ(small.log_volume(p, k), big.log_volume(p, k));
}

TEST(Simulation, VolumeOnlyMatchesFull) {
    SimSpec s = base_spec(demo_nig_params(), 300, 60);
    const PathEnsemble full = simulate(s);
    s.storage = StateStorage::VolumeOnly;
    const PathEnsemble vol = simulate(s);
    for (std::size_t p = 0; p < 300; ++p)
        for (std::size_t k = 0; k < 61; ++k) ASSERT_EQ(full.log_volume(p, k), vol.log_volume(p, k));
    EXPECT_THROW(vol.state(0, 1, 0), DomainError);
    EXPECT_THROW(vol.volumes_at(61), DomainError);
}

TEST(Simulation, GaussianMeanAndStepCovariance) {
    const Var1Params p = demo_gaussian_params();
    const std::size_t n = 100000;
    SimSpec s = base_spec(p, n, 24);
    s.threads = 0;
    const PathEnsemble ens = simulate(s);

    // One-step innovation covariance S D S'.
    const Mat3 d = Mat3::diagonal({p.sigma[0] * p.sigma[0], p.sigma[1] * p.sigma[1], p.sigma[2] * p.sigma[2]});
    const Mat3 expected = p.S * d * p.S.transpose();
    Mat3 cov;
    for (std::size_t q = 0; q < n; ++q) {
        Vec3 u;
        for (std::size_t i = 0; i < 3; ++i) u[i] = ens.state(q, 1, i) - (p.a + p.B * s.x0)[i];
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) cov(i, j) += u[i] * u[j] / static_cast<double>(n);
    }
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(cov(i, i) / expected(i, i), 1.0, 0.01) << i;
    // Off-diagonals relative to the scale of the product of sds.
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < i; ++j)
            EXPECT_NEAR(cov(i, j), expected(i, j), 0.01 * std::sqrt(expected(i, i) * expected(j, j)));

    // Mean at step k: theta + B^k (x0 - theta), within 4 standard errors.
    const OuDrift ou = var1_to_ou(p.a, p.B, p.dt);
    Mat3 bk = Mat3::identity();
    for (std::size_t k = 0; k < 24; ++k) bk = p.B * bk;
    const Vec3 mean_k = ou.theta + bk * (s.x0 - ou.theta);
    for (std::size_t i = 0; i < 3; ++i) {
        double m = 0, m2 = 0;
        for (std::size_t q = 0; q < n; ++q) {
            const double v = ens.state(q, 24, i);
            m += v;
            m2 += v * v;
        }
        m /= n;
        const double se = std::sqrt((m2 / n - m * m) / n);
        EXPECT_LT(std::abs(m - mean_k[i]), 4 * se) << i;
    }
}

TEST(Simulation, NigOneStepSkewness) {
    const Var1Params p = demo_nig_params();
    const std::size_t n = 100000;
    SimSpec s = base_spec(p, n, 1);
    s.threads = 0;
    const PathEnsemble ens = simulate(s);
    std::vector<double> eps1(n);
    for (std::size_t q = 0; q < n; ++q) eps1[q] = ens.state(q, 1, 0) - (p.a + p.B * s.x0)[0];
    const auto m = test::sample_moments(eps1);
    EXPECT_LT(std::abs(m.skewness - nig_moments(p.nig[0]).skewness), 5 * m.se_skewness);
}

TEST(Simulation, ConditionalRatio) {
    const Var1Params p = demo_nig_params();
    const Vec3 x = demo_initial_state();
    for (double r : conditional_simulate(p, x, 0, 10, 1)) EXPECT_EQ(r, 1.0);

    const auto det = conditional_simulate(p, x, 6, 4, 1, 0, 1, true);
    Vec3 state = x;
    for (int k = 0; k < 6; ++k) state = p.a + p.B * state;
    for (double r : det) EXPECT_NEAR(r, std::exp(state[2] - x[2]), 1e-12);

    const auto small = conditional_simulate(p, x, 6, 100, 9, 3, 1);
    const auto big = conditional_simulate(p, x, 6, 200, 9, 3, 2);
    for (std::size_t q = 0; q < 100; ++q) EXPECT_EQ(small[q], big[q]);
    const auto other = conditional_simulate(p, x, 6, 100, 9, 4, 1);
    EXPECT_NE(small, other);
}

TEST(Simulation, CommonRandomNumbersAcrossVolumeLaws) {
    // Changing only the volume law leaves the rate components untouched.
    Var1Params p = demo_nig_params();
    SimSpec s = base_spec(p, 200, 12);
    const PathEnsemble a = simulate(s);
    s.params.nig[2] = demo_stressed_volume_law();
    const PathEnsemble b = simulate(s);
    for (std::size_t q = 0; q < 200; ++q)
        for (std::size_t k = 0; k < 13; ++k) {
            ASSERT_EQ(a.state(q, k, 0), b.state(q, k, 0));
            ASSERT_EQ(a.state(q, k, 1), b.state(q, k, 1));
        }
}

TEST(Simulation, NonStationaryFlagged) {
    Var1Params p = demo_gaussian_params();
    p.B(2, 2) = 1.01;
    const PathEnsemble ens = simulate(base_spec(p, 10, 12));
    EXPECT_FALSE(ens.diagnostics().stationary);
    EXPECT_FALSE(ens.diagnostics().message.empty());
}

TEST(Simulation, SpecValidation) {
    SimSpec s = base_spec(demo_gaussian_params(), 0, 12);
    EXPECT_THROW(simulate(s), DomainError);
    s.n_paths = 1;
    s.horizon_steps = 0;
    EXPECT_THROW(simulate(s), DomainError);
    s.horizon_steps = 1;
    s.log_transform[2] = false;
    EXPECT_THROW(simulate(s), DomainError);
}

TEST(Simulation, ParallelForCoversRange) {
    std::vector<int> hits(1003, 0);
    parallel_for(hits.size(), 4, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) ++hits[i];
    });
    for (int h : hits) EXPECT_EQ(h, 1);
    EXPECT_GE(resolve_threads(0), 1u);
    EXPECT_EQ(resolve_threads(3), 3u);
}
