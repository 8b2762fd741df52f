#include <gtest/gtest.h>

#include <boost/math/distributions/lognormal.hpp>
#include <boost/math/distributions/normal.hpp>

#include <cmath>
#include <numeric>
#include <random>

#include "nmd/demo_params.hpp"
#include "nmd/error.hpp"
#include "nmd/risk.hpp"

using namespace nmd;

namespace {

// Ensemble from volume paths (rows = paths).
PathEnsemble from_volumes(const std::vector<std::vector<double>>& paths) {
    std::vector<double> data;
    for (const auto& p : paths)
        for (double v : p) data.push_back(std::log(v));
    return PathEnsemble::from_data(paths.size(), paths[0].size() - 1, StateStorage::VolumeOnly, {false, true, true},
                                   std::move(data));
}

PathEnsemble random_walk_ensemble(std::size_t n, std::size_t horizon, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> z(0.0, 0.05);
    std::vector<std::vector<double>> paths(n, std::vector<double>(horizon + 1));
    for (auto& p : paths) {
        double x = 0.0;
        for (auto& v : p) {
            v = std::exp(x);
            x += z(gen);
        }
    }
    return from_volumes(paths);
}

}  // namespace

TEST(Quantile, OrderStatisticDefinition) {
    EXPECT_EQ(lower_quantile({1.0, 2.0}, 0.95), 1.0);
    std::vector<double> hundred(100);
    std::iota(hundred.begin(), hundred.end(), 1.0);
    EXPECT_EQ(lower_quantile(hundred, 0.95), 5.0);
    EXPECT_EQ(lower_quantile(hundred, 0.99), 1.0);
    EXPECT_EQ(empirical_quantile(hundred, 0.5), 50.0);
    const TailMean t = tail_mean(hundred, 0.95);
    EXPECT_EQ(t.value, 3.0);
    EXPECT_EQ(t.tail_size, 5u);
    EXPECT_THROW(lower_quantile(hundred, 0.4), DomainError);
    EXPECT_THROW(lower_quantile({}, 0.95), DomainError);
}

TEST(Quantile, LognormalOracle) {
    // Quantile of order q: exp(m + s z_q). Standard error by order-statistic
    // asymptotics: sqrt(q (1 - q) / n) / f(x_q).
    const double m = 0.1, s = 0.3, q = 0.05;
    boost::math::lognormal_distribution<double> ln(m, s);
    const double exact = boost::math::quantile(ln, q);
    const double density = boost::math::pdf(ln, exact);
    std::mt19937_64 gen(31);
    std::lognormal_distribution<double> draw(m, s);
    double previous_error = 0.0;
    for (std::size_t n : {10000u, 100000u}) {
        std::vector<double> x(n);
        for (auto& v : x) v = draw(gen);
        const double est = lower_quantile(x, 1.0 - q);
        const double se = std::sqrt(q * (1 - q) / static_cast<double>(n)) / density;
        EXPECT_LT(std::abs(est - exact), 3 * se) << "n=" << n;
        previous_error = se;
    }
    EXPECT_GT(previous_error, 0.0);
}

TEST(RunningMin, Definition) {
    const PathEnsemble e = from_volumes({{3, 1, 2}, {1, 2, 3}});
    const auto m = running_min(e);
    EXPECT_NEAR(m[0], 3.0, 1e-14);
    EXPECT_NEAR(m[1], 1.0, 1e-14);
    EXPECT_NEAR(m[2], 1.0, 1e-14);
    // Increasing path: M stays at D(0).
    for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(m[3 + k], 1.0, 1e-14);
    EXPECT_THROW(running_min_at(m, 3, 3), DomainError);
}

TEST(RunningMin, EndEqualsPathMinimum) {
    const PathEnsemble e = random_walk_ensemble(200, 50, 4);
    const auto m = running_min(e);
    for (std::size_t p = 0; p < 200; ++p) {
        double low = e.volume(p, 0);
        for (std::size_t k = 0; k < 51; ++k) {
            low = std::min(low, e.volume(p, k));
            if (k > 0) EXPECT_LE(m[p * 51 + k], m[p * 51 + k - 1]);
        }
        EXPECT_EQ(m[p * 51 + 50], low);
    }
}

TEST(Tsl, ConstantPathsGiveOne) {
    const PathEnsemble e = from_volumes(std::vector<std::vector<double>>(50, std::vector<double>(13, 7.5)));
    for (double v : tsl(e, 0.99)) EXPECT_NEAR(v, 1.0, 1e-14);
    EXPECT_NEAR(var_volume(e, 12, 0.95), 7.5, 1e-13);
    EXPECT_NEAR(expected_shortfall(e, 12, 0.975), 7.5, 1e-13);
}

TEST(Tsl, MonotoneInTimeAndConfidence) {
    const PathEnsemble e = random_walk_ensemble(5000, 120, 8);
    const auto t95 = tsl(e, 0.95), t99 = tsl(e, 0.99);
    EXPECT_EQ(t95[0], 1.0);
    for (std::size_t k = 1; k < t95.size(); ++k) {
        EXPECT_LE(t95[k], t95[k - 1]);
        EXPECT_LE(t99[k], t99[k - 1]);
        EXPECT_LE(t99[k], t95[k]);
    }
}

TEST(Tsl, NonPositiveInitialVolumeRejected) {
    // exp() of a finite log never gives zero, so build from a -inf log volume.
    std::vector<double> data = {-INFINITY, 0.0, 0.0, 0.0};
    const PathEnsemble e = PathEnsemble::from_data(2, 1, StateStorage::VolumeOnly, {false, true, true}, data);
    EXPECT_THROW(tsl(e, 0.95), DomainError);
}

TEST(RiskReport, Invariants) {
    const PathEnsemble e = random_walk_ensemble(3000, 120, 15);
    const RiskReport r = risk_report(e);
    ASSERT_EQ(r.alphas.size(), 2u);
    for (std::size_t k = 0; k < r.grid.size(); ++k) {
        EXPECT_LE(r.var[1][k], r.var[0][k]);
        EXPECT_LE(r.es[k], lower_quantile(e.volumes_at(k), 0.975));
        EXPECT_LE(r.tsl_es[k], r.tsl[0][k] + 1e-15);
    }
    EXPECT_EQ(r.tsl[0][0], 1.0);
    EXPECT_NEAR(r.initial_volume, 1.0, 1e-15);
    const auto rows = tsl_table(e);
    ASSERT_EQ(rows.size(), 4u);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        EXPECT_EQ(rows[i].step, kTslTableSteps[i]);
        EXPECT_EQ(rows[i].var95, r.tsl[0][rows[i].step]);
        EXPECT_EQ(rows[i].var99, r.tsl[1][rows[i].step]);
        EXPECT_EQ(rows[i].es975, r.tsl_es[rows[i].step]);
    }
    EXPECT_THROW(tsl_table(e, {121}), DomainError);
    RiskOptions bad;
    bad.alphas = {0.3};
    EXPECT_THROW(risk_report(e, bad), ConfigError);
}

TEST(RiskReport, EsNeverAboveVarOnRandomSamples) {
    std::mt19937_64 gen(77);
    std::student_t_distribution<double> t(3.0);
    std::uniform_real_distribution<double> a(0.51, 0.999);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> x(50 + trial % 300);
        for (auto& v : x) v = t(gen);
        const double alpha = a(gen);
        EXPECT_LE(tail_mean(x, alpha).value, lower_quantile(x, alpha));
    }
}

TEST(RiskReport, SimulatedModelOrdering) {
    SimSpec s;
    s.params = demo_nig_params();
    s.x0 = demo_initial_state();
    s.n_paths = 20000;
    s.horizon_steps = 120;
    s.seed = 5;
    s.storage = StateStorage::VolumeOnly;
    const PathEnsemble e = simulate(s);
    const auto rows = tsl_table(e);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        EXPECT_LE(rows[i].var95, rows[i - 1].var95);
        EXPECT_LE(rows[i].var99, rows[i - 1].var99);
        EXPECT_LE(rows[i].es975, rows[i - 1].es975);
    }
}

TEST(RiskReport, TailMeanOfConstantSampleIsExact) {
    const std::vector<double> x(100000, 701234.56789);
    EXPECT_EQ(tail_mean(x, 0.975).value, 701234.56789);
    EXPECT_EQ(lower_quantile(x, 0.975), 701234.56789);
}
