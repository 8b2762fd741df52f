#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nmd/demo_params.hpp"
#include "nmd/error.hpp"
#include "nmd/estimation.hpp"
#include "support.hpp"

using namespace nmd;

namespace {

Var1Params tiny_noise_params() {
    Var1Params p = demo_gaussian_params();
    p.sigma = {1e-9, 1e-9, 1e-9};
    return p;
}

}  // namespace

TEST(OlsInit, RecoversDriftUnderTinyNoise) {
    // Tiny noise plus a start far from the mean keeps the regressors informative.
    const Var1Params truth = tiny_noise_params();
    const SeriesPanel panel = test::synthetic_panel(truth, {0.05, std::log(0.03), std::log(5e5)}, 300, 4);
    const LeastSquaresStart ls = ols_init(panel);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_NEAR(ls.a[i], truth.a[i], 1e-6);
        for (std::size_t j = 0; j <= i; ++j) EXPECT_NEAR(ls.B(i, j), truth.B(i, j), 1e-6) << i << j;
    }
    EXPECT_EQ(ls.observations, 299u);
}

TEST(OlsInit, WhiteNoisePanel) {
    Var1Params p;
    p.B = Mat3::diagonal({1e-9, 1e-9, 1e-9});
    p.sigma = {1.0, 2.0, 0.5};
    const std::size_t n = 4000;
    const SeriesPanel panel = test::synthetic_panel(p, {0, 0, 0}, n, 8);
    const LeastSquaresStart ls = ols_init(panel);
    const double bound = 2.0 / std::sqrt(static_cast<double>(n));
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j <= i; ++j) EXPECT_LT(std::abs(ls.B(i, j)), bound * p.sigma[i] / p.sigma[j]);
}

TEST(OlsInit, ConstantSeriesIsSingular) {
    std::vector<Vec3> states(60, Vec3{0.01, -4.0, 13.0});
    EXPECT_THROW(ols_init(SeriesPanel::from_states(states)), SingularMatrixError);
}

TEST(OlsInit, TooShortPanel) {
    const SeriesPanel panel = test::synthetic_panel(demo_gaussian_params(), demo_initial_state(), 20, 1);
    EXPECT_THROW(ols_init(panel), DataError);
}

TEST(DecomposeCovariance, IdentityAndPublishedFactors) {
    const CovarianceFactors id = decompose_covariance(Mat3::identity());
    EXPECT_EQ(id.S, Mat3::identity());
    for (double s : id.sigma) EXPECT_EQ(s, 1.0);

    const Var1Params p = demo_nig_params();
    const Mat3 cov = p.S * Mat3::diagonal({p.sigma[0] * p.sigma[0], p.sigma[1] * p.sigma[1], p.sigma[2] * p.sigma[2]}) *
                     p.S.transpose();
    const CovarianceFactors f = decompose_covariance(cov);
    EXPECT_NEAR(f.S(1, 0), 5.859505, 1e-9);
    EXPECT_NEAR(f.S(2, 0), -0.000246, 1e-9);
    EXPECT_NEAR(f.S(2, 1), 0.007663, 1e-9);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(f.sigma[i], p.sigma[i], 1e-9);
}

TEST(DecomposeCovariance, RandomReconstruction) {
    std::mt19937_64 gen(12);
    std::normal_distribution<double> z;
    for (int trial = 0; trial < 500; ++trial) {
        Mat3 a;
        for (double& v : a.data) v = z(gen);
        const Mat3 spd = a * a.transpose() + 0.1 * Mat3::identity();
        const CovarianceFactors f = decompose_covariance(spd);
        const Mat3 d = Mat3::diagonal({f.sigma[0] * f.sigma[0], f.sigma[1] * f.sigma[1], f.sigma[2] * f.sigma[2]});
        EXPECT_LT(max_abs_diff(f.S * d * f.S.transpose(), spd), 1e-12 * norm1(spd));
    }
    EXPECT_THROW(decompose_covariance(Mat3::diagonal({1, -1, 1})), SingularMatrixError);
    EXPECT_THROW(decompose_covariance(Mat3::from({1, 0.5, 0, 0, 1, 0, 0, 0, 1})), SingularMatrixError);
}

TEST(Loglik, NigTermEqualsDensitySum) {
    std::mt19937_64 gen(21);
    std::uniform_real_distribution<double> u(0, 1);
    for (int trial = 0; trial < 200; ++trial) {
        const NigParams p = expand_constrained({std::log(5.0 + 100 * u(gen)), 40 * u(gen) - 20, 0.001 + 0.05 * u(gen)});
        RandomStream rng(trial, 0, 0);
        const auto eps = nig_sample(p, rng, 200);
        double direct = 0.0;
        for (double e : eps) direct += nig_logpdf(e, p);
        EXPECT_NEAR(nig_loglik(eps, p), direct, 1e-10 * std::max(1.0, std::abs(direct)));
    }
}

TEST(Loglik, GaussianClosedForms) {
    const std::vector<double> zeros(50, 0.0);
    EXPECT_NEAR(gaussian_loglik(zeros, 0.3), 50 * -0.5 * std::log(2 * std::numbers::pi * 0.09), 1e-12);
    const std::vector<double> small = {0.01, -0.02, 0.015};
    EXPECT_GT(gaussian_loglik(small, 0.1), gaussian_loglik(small, 0.2));
}

TEST(Loglik, ResidualIdentity) {
    const Var1Params p = demo_nig_params();
    const SeriesPanel panel = test::synthetic_panel(p, demo_initial_state(), 200, 3);
    const auto eps = compute_residuals(panel, p.a, p.B, p.S);
    for (std::size_t k = 0; k < eps.size(); ++k) {
        const Vec3 rebuilt = p.a + p.B * panel.states[k] + p.S * eps[k];
        for (std::size_t i = 0; i < 3; ++i)
            EXPECT_NEAR(rebuilt[i], panel.states[k + 1][i], 1e-12 * std::max(1.0, std::abs(rebuilt[i])));
    }
    double by_hand = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        std::vector<double> e(eps.size());
        for (std::size_t k = 0; k < e.size(); ++k) e[k] = eps[k][i];
        by_hand += nig_loglik(e, p.nig[i]);
    }
    EXPECT_NEAR(loglik(panel, p), by_hand, 1e-9);

    Var1Params unit_root = p;
    unit_root.B(0, 0) = 1.0;
    EXPECT_THROW(loglik(panel, unit_root, true), NonStationaryError);
    EXPECT_NO_THROW(loglik(panel, unit_root, false));
}

TEST(Fit, GaussianWithoutSignsReproducesLeastSquares) {
    const SeriesPanel panel = ingest(test::data_path("synthetic_panel.csv"), {});
    FitConfig cfg;
    cfg.noise_family = NoiseFamily::Gaussian;
    cfg.enforce_signs = false;
    const FitResult r = fit(panel, cfg);
    const LeastSquaresStart ls = ols_init(panel);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_NEAR(r.params.a[i], ls.a[i], 0.01 * ls.se_a[i]);
        for (std::size_t j = 0; j <= i; ++j) EXPECT_NEAR(r.params.B(i, j), ls.B(i, j), 0.01 * ls.se_B(i, j));
    }
    // Least squares is the Gaussian maximum (ML variances use divisor n).
    EXPECT_GE(r.loglik, r.init_loglik - 1e-6);
    EXPECT_LT(r.loglik - r.init_loglik, 0.1);
}

TEST(Fit, NigStagesAreMonotoneAndSignsHold) {
    const SeriesPanel panel = ingest(test::data_path("synthetic_panel.csv"), {});
    FitConfig cfg;
    const FitResult r = fit(panel, cfg);
    ASSERT_EQ(r.stages.size(), 2u);
    EXPECT_EQ(r.stages[0].name, "nig_margins");
    EXPECT_EQ(r.stages[1].name, "joint_ml");
    for (const auto& s : r.stages) EXPECT_GE(s.end_loglik, s.start_loglik - 1e-9) << s.name;
    EXPECT_TRUE(satisfies_sign_pattern(r.params));
    EXPECT_TRUE(check_stationarity_transition(r.params.B).stationary);
    EXPECT_NO_THROW(r.params.validate());
    EXPECT_NEAR(r.loglik, loglik(panel, r.params), 1e-9);
    const auto eps = compute_residuals(panel, r.params.a, r.params.B, r.params.S);
    EXPECT_EQ(eps, r.residuals);

    FitConfig g = cfg;
    g.noise_family = NoiseFamily::Gaussian;
    const FitResult rg = fit(panel, g);
    EXPECT_GT(r.loglik, rg.loglik);
    EXPECT_TRUE(satisfies_sign_pattern(rg.params));
}

TEST(Fit, Deterministic) {
    const SeriesPanel panel = ingest(test::data_path("synthetic_panel.csv"), {});
    FitConfig cfg;
    cfg.noise_family = NoiseFamily::Gaussian;
    const FitResult a = fit(panel, cfg), b = fit(panel, cfg);
    EXPECT_EQ(a.params, b.params);
    EXPECT_EQ(a.loglik, b.loglik);
}

TEST(Fit, InvalidConfig) {
    FitConfig cfg;
    cfg.param_tol = 0.0;
    EXPECT_THROW(cfg.validate(), ConfigError);
}
