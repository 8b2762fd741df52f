#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "nmd/rng.hpp"

namespace nmd {

// Univariate normal inverse Gaussian law NIG(alpha, beta, delta, mu).
struct NigParams {
    double alpha = 1.0;  // tail heaviness, > 0
    double beta = 0.0;   // asymmetry, |beta| < alpha
    double delta = 1.0;  // scale, > 0
    double mu = 0.0;     // location

    double gamma() const;

    // Throws DomainError unless alpha > 0, |beta| < alpha, delta > 0 and
    // all fields are finite.
    void validate() const;

    bool operator==(const NigParams&) const = default;
};

// Optimizer-facing parameterization: (log gamma, beta) are free, the first
// two moments are pinned to (0, sigma^2).
struct NigFree {
    double log_gamma = 0.0;
    double beta = 0.0;
    double sigma = 1.0;
};

struct NigMoments {
    double mean = 0.0;
    double variance = 0.0;
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
};

struct AnnualMoments {
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
};

double nig_logpdf(double x, const NigParams& p);
double nig_pdf(double x, const NigParams& p);

NigMoments nig_moments(const NigParams& p);

// Skewness and excess kurtosis of the sum of `steps_per_year` iid copies.
AnnualMoments annualize_moments(double skew_per_step, double exkurt_per_step,
                                int steps_per_year);

// gamma = exp(log_gamma), alpha = sqrt(gamma^2 + beta^2),
// delta = sigma^2 gamma^3 / alpha^2, mu = -delta beta / gamma.
NigParams expand_constrained(const NigFree& f);

// Inverse of expand_constrained for a law with mean zero.
NigFree to_free(const NigParams& p);

// Closure under convolution: returns NIG(alpha, beta, delta1 + delta2,
// mu1 + mu2) when the tail and asymmetry parameters agree (1e-12
// relative), std::nullopt otherwise.
std::optional<NigParams> nig_convolve(const NigParams& p1, const NigParams& p2);

// Inverse-Gaussian variate with the given mean and shape, by the
// transformation-with-rejection method (one chi-square, one uniform).
double inverse_gaussian_draw(double mean, double shape, RandomStream& rng);

// Draws NIG(p) variates as the variance-mean mixture mu + beta V + sqrt(V) Z,
// V ~ IG(delta / gamma, delta^2). Every draw consumes exactly two normals
// and one uniform from the stream.
class NigSampler {
public:
    explicit NigSampler(const NigParams& p);

    double operator()(RandomStream& rng) const;

    const NigParams& params() const { return p_; }

private:
    NigParams p_;
    double ig_mean_;
    double ig_shape_;
};

std::vector<double> nig_sample(const NigParams& p, RandomStream& rng, std::size_t n);

}  // namespace nmd
