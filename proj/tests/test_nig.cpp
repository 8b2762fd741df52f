#include <gtest/gtest.h>

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/bessel.hpp>

#include <cmath>
#include <random>

#include "nmd/bessel.hpp"
#include "nmd/error.hpp"
#include "nmd/nig.hpp"
#include "support.hpp"

using namespace nmd;

namespace {

constexpr double kPi = boost::math::constants::pi<double>();

// K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt.
double bessel_k_quadrature(double nu, double x) {
    boost::math::quadrature::exp_sinh<double> integrator;
    return integrator.integrate(
        [&](double t) {
            const double c = std::cosh(t);
            return x * c > 745.0 ? 0.0 : std::exp(-x * c) * std::cosh(nu * t);
        },
        1e-14);
}

double direct_logpdf(double x, const NigParams& p) {
    const double r = std::sqrt(p.delta * p.delta + (x - p.mu) * (x - p.mu));
    const double k1 = boost::math::cyl_bessel_k(1, p.alpha * r);
    return std::log(p.alpha * p.delta * k1 / (kPi * r)) + p.delta * p.gamma() + p.beta * (x - p.mu);
}

const NigParams kL1{52.52986, -9.29901, 0.00037, 0.00007};
const NigParams kL2{17.09158, -9.14173, 0.03709, 0.02348};
const NigParams kL3{71.33072, 12.01585, 0.02483, -0.00424};
const NigParams kStressed{269.4450, -256.7294, 0.0027, 0.0086};

}  // namespace

TEST(Bessel, KnownValues) {
    EXPECT_NEAR(bessel_k1(1.0), 0.6019072301972346, 1e-14);
    EXPECT_NEAR(bessel_k1(0.1), 9.853844780870606, 1e-12);
    // Large-argument asymptotics: K1(x) ~ sqrt(pi / 2x) e^-x (1 + 3/8x - 15/128x^2).
    const double x = 50.0;
    const double asym = std::sqrt(kPi / (2 * x)) * std::exp(-x) * (1 + 3 / (8 * x) - 15 / (128 * x * x));
    EXPECT_NEAR(bessel_k1(x) / asym, 1.0, 1e-6);
}

TEST(Bessel, MatchesReferenceOnLogGrid) {
    for (double lx = -8.0; lx <= 6.5; lx += 0.05) {
        const double x = std::exp(lx);
        const double ref = boost::math::cyl_bessel_k(1, x);
        EXPECT_NEAR(bessel_k1(x) / ref, 1.0, 1e-13) << "x=" << x;
        EXPECT_NEAR(log_bessel_k1(x), std::log(ref), 1e-13) << "x=" << x;
        EXPECT_NEAR(bessel_k1_scaled(x), ref * std::exp(x), 1e-13 * ref * std::exp(x)) << "x=" << x;
    }
}

TEST(Bessel, RecurrenceAgainstQuadrature) {
    // K0(x) + (2/x) K1(x) = K2(x), with K0 and K2 from the integral representation.
    for (double x : {0.05, 0.3, 1.0, 2.5, 7.0, 20.0, 60.0}) {
        const double k0 = bessel_k_quadrature(0.0, x);
        const double k2 = bessel_k_quadrature(2.0, x);
        EXPECT_NEAR((k0 + 2.0 / x * bessel_k1(x)) / k2, 1.0, 1e-8) << "x=" << x;
    }
}

TEST(Bessel, LogVariantIsFiniteBeyondUnderflow) {
    const double x = 2000.0;
    EXPECT_EQ(bessel_k1(x), 0.0);
    const double expected = 0.5 * std::log(kPi / (2 * x)) - x + std::log1p(3 / (8 * x) - 15 / (128 * x * x));
    EXPECT_NEAR(log_bessel_k1(x), expected, 1e-9);
    EXPECT_THROW(bessel_k1(0.0), DomainError);
    EXPECT_THROW(log_bessel_k1(-1.0), DomainError);
}

TEST(Nig, StandardSymmetricDensityAtZero) {
    // NIG(1, 0, 1, 0) at 0: K1(1) e / pi.
    EXPECT_NEAR(nig_logpdf(0.0, {1, 0, 1, 0}), std::log(0.6019072301972346 * std::exp(1.0) / kPi), 1e-13);
}

TEST(Nig, SymmetryUnderReflection) {
    const NigParams p{3.0, 1.2, 0.7, 0.4};
    const NigParams q{3.0, -1.2, 0.7, -0.4};
    for (double x = -3.0; x <= 3.0; x += 0.25) EXPECT_NEAR(nig_logpdf(x, p), nig_logpdf(-x, q), 1e-12);
}

TEST(Nig, LogpdfMatchesDirectDensity) {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int checked = 0;
    while (checked < 1000) {
        const double alpha = std::exp(-1.0 + 6.0 * u(gen));
        const NigParams p{alpha, alpha * (1.8 * u(gen) - 0.9), std::exp(-6.0 + 6.0 * u(gen)), 0.2 * u(gen) - 0.1};
        const double sd = std::sqrt(nig_moments(p).variance);
        const double x = p.mu + sd * (12.0 * u(gen) - 6.0);
        const double arg = p.alpha * std::sqrt(p.delta * p.delta + (x - p.mu) * (x - p.mu));
        if (arg > 600.0) continue;  // the direct form underflows
        EXPECT_NEAR(nig_logpdf(x, p), direct_logpdf(x, p), 1e-10);
        ++checked;
    }
}

TEST(Nig, DensityIntegratesToOne) {
    for (const NigParams& p : {kL1, kL2, kL3, kStressed, NigParams{1, 0, 1, 0}, NigParams{5, -4.9, 0.1, 2}}) {
        const double m = nig_moments(p).mean;
        boost::math::quadrature::exp_sinh<double> integrator;
        const double right = integrator.integrate([&](double t) { return nig_pdf(m + t, p); }, 1e-13);
        const double left = integrator.integrate([&](double t) { return nig_pdf(m - t, p); }, 1e-13);
        EXPECT_NEAR(left + right, 1.0, 1e-6) << "alpha=" << p.alpha;
    }
}

TEST(Nig, MomentFormulas) {
    const NigMoments l3 = nig_moments(kL3);
    EXPECT_NEAR(l3.mean, 0.0, 1e-4);
    const NigMoments s = nig_moments(kStressed);
    EXPECT_NEAR(std::sqrt(s.variance) / 0.019063, 1.0, 0.01);
    const NigMoments sym = nig_moments({2.0, 0.0, 1.5, 0.3});
    EXPECT_EQ(sym.skewness, 0.0);
    EXPECT_DOUBLE_EQ(sym.mean, 0.3);
    // Gamma = 2, variance = delta / gamma, excess kurtosis = 3 / (delta gamma).
    EXPECT_DOUBLE_EQ(sym.variance, 0.75);
    EXPECT_DOUBLE_EQ(sym.excess_kurtosis, 1.0);
}

TEST(Nig, MomentsAgreeWithQuadrature) {
    for (const NigParams& p : {kL2, kL3, NigParams{4.0, -2.0, 0.5, 0.1}}) {
        const NigMoments m = nig_moments(p);
        boost::math::quadrature::exp_sinh<double> integrator;
        auto central = [&](int k) {
            auto f = [&](double t) {
                const double d = nig_pdf(m.mean + t, p);
                return d == 0.0 ? 0.0 : std::pow(t, k) * d;
            };
            auto g = [&](double t) {
                const double d = nig_pdf(m.mean - t, p);
                return d == 0.0 ? 0.0 : std::pow(-t, k) * d;
            };
            return integrator.integrate(f, 1e-12) + integrator.integrate(g, 1e-12);
        };
        const double mu1 = central(1), mu2 = central(2), mu3 = central(3), mu4 = central(4);
        const double sd = std::sqrt(m.variance);
        EXPECT_NEAR(mu1 / sd, 0.0, 1e-7);
        EXPECT_NEAR(mu2 / m.variance, 1.0, 1e-7);
        EXPECT_NEAR(mu3 / std::pow(mu2, 1.5), m.skewness, 1e-6 * (1 + std::abs(m.skewness)));
        EXPECT_NEAR(mu4 / (mu2 * mu2) - 3.0, m.excess_kurtosis, 1e-6 * (1 + m.excess_kurtosis));
    }
}

TEST(Nig, Annualization) {
    const AnnualMoments a = annualize_moments(-6.082, 62.9, 12);
    EXPECT_NEAR(a.skewness, -6.082 / std::sqrt(12.0), 1e-12);
    EXPECT_NEAR(a.excess_kurtosis, 62.9 / 12.0, 1e-12);
    const AnnualMoments z = annualize_moments(0.0, 0.0, 12);
    EXPECT_EQ(z.skewness, 0.0);
    EXPECT_EQ(z.excess_kurtosis, 0.0);
    const AnnualMoments id = annualize_moments(-1.3, 4.2, 1);
    EXPECT_EQ(id.skewness, -1.3);
    EXPECT_EQ(id.excess_kurtosis, 4.2);
    EXPECT_THROW(annualize_moments(0.0, 0.0, 0), DomainError);
}

TEST(Nig, ExpandConstrainedPinsMoments) {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    // gamma is recovered from (alpha, beta) as sqrt((alpha - beta)(alpha + beta)),
    // which loses about (beta / gamma)^2 ulps; the range keeps |beta| <= 20 gamma.
    for (int trial = 0; trial < 500; ++trial) {
        const double log_gamma = -2.0 + 8.0 * u(gen);
        const NigFree f{log_gamma, std::exp(log_gamma) * (40.0 * u(gen) - 20.0), std::exp(-7.0 + 6.0 * u(gen))};
        const NigParams p = expand_constrained(f);
        const NigMoments m = nig_moments(p);
        EXPECT_LT(std::abs(m.mean), 1e-12 * std::sqrt(m.variance));
        EXPECT_NEAR(m.variance / (f.sigma * f.sigma), 1.0, 1e-12);
        const NigFree back = to_free(p);
        EXPECT_NEAR(back.log_gamma, f.log_gamma, 1e-12 * std::max(1.0, std::abs(f.log_gamma)));
        EXPECT_NEAR(back.beta, f.beta, 1e-12 * std::max(1.0, std::abs(f.beta)));
        EXPECT_NEAR(back.sigma / f.sigma, 1.0, 1e-12);
    }
    const NigParams sym = expand_constrained({std::log(3.0), 0.0, 0.5});
    EXPECT_EQ(sym.mu, 0.0);
    EXPECT_DOUBLE_EQ(sym.alpha, 3.0);
    EXPECT_THROW(expand_constrained({0.0, 0.0, 0.0}), DomainError);
}

TEST(Nig, ExpandConstrainedRecoversPublishedRow) {
    const NigParams p = expand_constrained({std::log(kL1.gamma()), kL1.beta, 0.002729});
    EXPECT_NEAR(p.alpha, kL1.alpha, 1e-9);
    EXPECT_NEAR(p.delta, kL1.delta, 5e-6);
    EXPECT_NEAR(p.mu, kL1.mu, 5e-6);
}

TEST(Nig, Convolution) {
    const NigParams p1{3.0, -1.0, 0.2, 0.05}, p2{3.0, -1.0, 0.7, -0.02};
    const auto c = nig_convolve(p1, p2);
    ASSERT_TRUE(c.has_value());
    EXPECT_EQ(c->alpha, 3.0);
    EXPECT_EQ(c->beta, -1.0);
    EXPECT_DOUBLE_EQ(c->delta, 0.9);
    EXPECT_DOUBLE_EQ(c->mu, 0.03);
    // Cumulants add: the moments of the sum match.
    const NigMoments a = nig_moments(p1), b = nig_moments(p2), s = nig_moments(*c);
    EXPECT_NEAR(s.variance, a.variance + b.variance, 1e-14);
    EXPECT_FALSE(nig_convolve(p1, {3.5, -1.0, 0.2, 0.0}).has_value());
    EXPECT_FALSE(nig_convolve(p1, {3.0, -0.5, 0.2, 0.0}).has_value());
    EXPECT_THROW(nig_convolve(p1, {3.0, -1.0, 0.0, 0.0}), DomainError);
}

TEST(Nig, ValidateRejectsBadParameters) {
    EXPECT_THROW((NigParams{1.0, 1.0, 1.0, 0.0}.validate()), DomainError);
    EXPECT_THROW((NigParams{-1.0, 0.0, 1.0, 0.0}.validate()), DomainError);
    EXPECT_THROW((NigParams{1.0, 0.0, 0.0, 0.0}.validate()), DomainError);
    EXPECT_THROW((NigParams{1.0, 0.0, 1.0, NAN}.validate()), DomainError);
    EXPECT_NO_THROW(kStressed.validate());
}

TEST(NigSampler, DeterministicAndMomentsConverge) {
    RandomStream r1(42, 0, 0), r2(42, 0, 0);
    const auto a = nig_sample(kL2, r1, 200000);
    const auto b = nig_sample(kL2, r2, 200000);
    EXPECT_EQ(a, b);
    const auto s = test::sample_moments(a);
    const NigMoments m = nig_moments(kL2);
    EXPECT_LT(std::abs(s.mean - m.mean), 5 * s.se_mean);
    EXPECT_LT(std::abs(s.sd - std::sqrt(m.variance)), 5 * s.se_sd);
    EXPECT_LT(std::abs(s.skewness - m.skewness), 5 * s.se_skewness);
    EXPECT_LT(std::abs(s.excess_kurtosis - m.excess_kurtosis), 5 * s.se_excess_kurtosis);
}

TEST(NigSampler, GaussianLimit) {
    // delta gamma large with beta = 0: excess kurtosis 3 / (delta gamma) -> 0.
    const NigParams p{1000.0, 0.0, 1000.0, 0.0};
    RandomStream rng(1, 0, 0);
    const auto x = nig_sample(p, rng, 200000);
    const auto s = test::sample_moments(x);
    EXPECT_LT(std::abs(s.excess_kurtosis), 5 * s.se_excess_kurtosis + 3e-6);
    EXPECT_LT(std::abs(s.skewness), 5 * s.se_skewness);
}

TEST(NigSampler, InverseGaussianMoments) {
    // IG(m, l): mean m, variance m^3 / l.
    RandomStream rng(9, 0, 0);
    const double m = 0.5, l = 2.0;
    std::vector<double> v(200000);
    for (auto& x : v) x = inverse_gaussian_draw(m, l, rng);
    const auto s = test::sample_moments(v);
    EXPECT_LT(std::abs(s.mean - m), 5 * s.se_mean);
    EXPECT_LT(std::abs(s.sd - std::sqrt(m * m * m / l)), 5 * s.se_sd);
    for (double x : v) ASSERT_GT(x, 0.0);
}
