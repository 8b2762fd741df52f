#include "nmd/nig.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "nmd/bessel.hpp"
#include "nmd/error.hpp"

namespace nmd {

double NigParams::gamma() const { return std::sqrt((alpha - beta) * (alpha + beta)); }

void NigParams::validate() const {
    const bool finite = std::isfinite(alpha) && std::isfinite(beta) && std::isfinite(delta) &&
                        std::isfinite(mu);
    if (!finite || !(alpha > 0.0) || !(std::abs(beta) < alpha) || !(delta > 0.0) ||
        !(gamma() > 0.0)) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "invalid NIG parameters (alpha=" << alpha << ", beta=" << beta
            << ", delta=" << delta << ", mu=" << mu << ")";
        throw DomainError(msg.str());
    }
}

double nig_logpdf(double x, const NigParams& p) {
    p.validate();
    const double tau = (x - p.mu) / p.delta;
    const double c = std::hypot(1.0, tau);
    return std::log(p.alpha / std::numbers::pi) + p.delta * p.gamma() + p.beta * p.delta * tau -
           std::log(c) + log_bessel_k1(p.alpha * p.delta * c);
}

double nig_pdf(double x, const NigParams& p) { return std::exp(nig_logpdf(x, p)); }

NigMoments nig_moments(const NigParams& p) {
    p.validate();
    const double g = p.gamma();
    const double a2 = p.alpha * p.alpha;
    NigMoments m;
    m.mean = p.mu + p.delta * p.beta / g;
    m.variance = a2 * p.delta / (g * g * g);
    m.skewness = 3.0 * p.beta / (p.alpha * std::sqrt(p.delta * g));
    m.excess_kurtosis = 3.0 * (a2 + 4.0 * p.beta * p.beta) / (p.delta * a2 * g);
    return m;
}

AnnualMoments annualize_moments(double skew_per_step, double exkurt_per_step,
                                int steps_per_year) {
    if (steps_per_year < 1) throw DomainError("annualize_moments: steps_per_year must be >= 1");
    const double n = static_cast<double>(steps_per_year);
    return {skew_per_step / std::sqrt(n), exkurt_per_step / n};
}

NigParams expand_constrained(const NigFree& f) {
    if (!(f.sigma > 0.0) || !std::isfinite(f.sigma))
        throw DomainError("expand_constrained: sigma must be positive");
    if (!std::isfinite(f.log_gamma) || !std::isfinite(f.beta))
        throw DomainError("expand_constrained: non-finite free parameters");
    const double g = std::exp(f.log_gamma);
    NigParams p;
    p.beta = f.beta;
    p.alpha = std::hypot(g, f.beta);
    p.delta = f.sigma * f.sigma * g * g * g / (p.alpha * p.alpha);
    p.mu = -p.delta * f.beta / g;
    p.validate();
    return p;
}

NigFree to_free(const NigParams& p) {
    const NigMoments m = nig_moments(p);
    return {std::log(p.gamma()), p.beta, std::sqrt(m.variance)};
}

std::optional<NigParams> nig_convolve(const NigParams& p1, const NigParams& p2) {
    p1.validate();
    p2.validate();
    auto close = [](double a, double b) {
        return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b));
    };
    if (!close(p1.alpha, p2.alpha) || !close(p1.beta, p2.beta)) return std::nullopt;
    return NigParams{p1.alpha, p1.beta, p1.delta + p2.delta, p1.mu + p2.mu};
}

double inverse_gaussian_draw(double mean, double shape, RandomStream& rng) {
    const double z = rng.normal();
    const double half_w = 0.5 * mean * z * z / shape;
    // mean * (1 + y - sqrt(2y + y^2)), rewritten without cancellation
    const double x = mean / (1.0 + half_w + std::sqrt(half_w * (2.0 + half_w)));
    const double u = rng.uniform();
    return (u <= mean / (mean + x)) ? x : mean * mean / x;
}

NigSampler::NigSampler(const NigParams& p) : p_(p) {
    p_.validate();
    ig_mean_ = p_.delta / p_.gamma();
    ig_shape_ = p_.delta * p_.delta;
}

double NigSampler::operator()(RandomStream& rng) const {
    const double v = inverse_gaussian_draw(ig_mean_, ig_shape_, rng);
    return p_.mu + p_.beta * v + std::sqrt(v) * rng.normal();
}

std::vector<double> nig_sample(const NigParams& p, RandomStream& rng, std::size_t n) {
    const NigSampler sampler(p);
    std::vector<double> out(n);
    for (auto& x : out) x = sampler(rng);
    return out;
}

}  // namespace nmd
