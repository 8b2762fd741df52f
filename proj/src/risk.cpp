#include "nmd/risk.hpp"

#include <algorithm>
#include <cmath>

#include "nmd/error.hpp"

namespace nmd {

namespace {

void check_alpha(double alpha) {
    if (!(alpha > 0.5 && alpha < 1.0)) throw DomainError("confidence level must lie in (0.5, 1)");
}

// 1-based rank of the order statistic of order q. n q is snapped to the
// nearest integer when it is one up to rounding.
std::size_t rank_of(std::size_t n, double q) {
    const double r = static_cast<double>(n) * q;
    const double nearest = std::round(r);
    const double j = std::abs(r - nearest) < 1e-9 * std::max(1.0, r) ? nearest : std::ceil(r);
    return std::clamp<std::size_t>(static_cast<std::size_t>(j), 1, n);
}

std::size_t lower_rank(std::size_t n, double alpha) { return rank_of(n, 1.0 - alpha); }

}  // namespace

double empirical_quantile(std::vector<double> sample, double q) {
    if (!(q > 0.0 && q < 1.0)) throw DomainError("empirical_quantile: order must lie in (0, 1)");
    if (sample.empty()) throw DomainError("empirical_quantile: empty sample");
    const std::size_t j = rank_of(sample.size(), q);
    std::nth_element(sample.begin(), sample.begin() + static_cast<std::ptrdiff_t>(j - 1), sample.end());
    return sample[j - 1];
}

double lower_quantile(std::vector<double> sample, double alpha) {
    check_alpha(alpha);
    if (sample.empty()) throw DomainError("lower_quantile: empty sample");
    const std::size_t j = lower_rank(sample.size(), alpha);
    std::nth_element(sample.begin(), sample.begin() + static_cast<std::ptrdiff_t>(j - 1), sample.end());
    return sample[j - 1];
}

TailMean tail_mean(std::vector<double> sample, double alpha) {
    check_alpha(alpha);
    if (sample.empty()) throw DomainError("tail_mean: empty sample");
    const std::size_t j = lower_rank(sample.size(), alpha);
    std::sort(sample.begin(), sample.end());
    const double q = sample[j - 1];
    TailMean t;
    // Accumulate shortfalls below q so that the mean can never round above it.
    double sum = 0.0;
    for (double v : sample) {
        if (v > q) break;
        sum += v - q;
        ++t.tail_size;
    }
    if (t.tail_size == 0) {
        t.value = sample.front();
        t.diagnostic = "empty tail; returning the sample minimum";
        return t;
    }
    t.value = q + sum / static_cast<double>(t.tail_size);
    return t;
}

double var_volume(const PathEnsemble& ens, std::size_t step, double alpha) {
    return lower_quantile(ens.volumes_at(step), alpha);
}

double expected_shortfall(const PathEnsemble& ens, std::size_t step, double alpha) {
    return tail_mean(ens.volumes_at(step), alpha).value;
}

std::vector<double> running_min(const PathEnsemble& ens) {
    const std::size_t steps = ens.steps();
    std::vector<double> m(ens.n_paths() * steps);
    for (std::size_t p = 0; p < ens.n_paths(); ++p) {
        double low = ens.volume(p, 0);
        for (std::size_t k = 0; k < steps; ++k) {
            low = std::min(low, ens.volume(p, k));
            m[p * steps + k] = low;
        }
    }
    return m;
}

std::vector<double> running_min_at(const std::vector<double>& m, std::size_t steps, std::size_t step) {
    if (step >= steps) throw DomainError("running_min_at: step is off the grid");
    const std::size_t n = m.size() / steps;
    std::vector<double> out(n);
    for (std::size_t p = 0; p < n; ++p) out[p] = m[p * steps + step];
    return out;
}

namespace {

double initial_volume(const PathEnsemble& ens) {
    const double d0 = ens.volume(0, 0);
    if (!(d0 > 0.0) || !std::isfinite(d0)) throw DomainError("initial volume D(0) must be positive");
    return d0;
}

}  // namespace

std::vector<double> tsl(const PathEnsemble& ens, double alpha) {
    check_alpha(alpha);
    const double d0 = initial_volume(ens);
    const auto m = running_min(ens);
    std::vector<double> curve(ens.steps());
    for (std::size_t k = 0; k < curve.size(); ++k)
        curve[k] = lower_quantile(running_min_at(m, ens.steps(), k), alpha) / d0;
    return curve;
}

void RiskOptions::validate() const {
    if (alphas.empty()) throw ConfigError("at least one confidence level is required");
    for (double a : alphas)
        if (!(a > 0.5 && a < 1.0)) throw ConfigError("confidence levels must lie in (0.5, 1)");
    if (!(es_alpha > 0.5 && es_alpha < 1.0)) throw ConfigError("ES confidence level must lie in (0.5, 1)");
}

RiskReport risk_report(const PathEnsemble& ens, const RiskOptions& options) {
    options.validate();
    RiskReport r;
    r.grid = ens.grid();
    r.initial_volume = initial_volume(ens);
    r.alphas = options.alphas;
    r.es_alpha = options.es_alpha;
    const std::size_t steps = ens.steps();
    r.expected.resize(steps);
    r.var.assign(r.alphas.size(), std::vector<double>(steps));
    r.tsl.assign(r.alphas.size(), std::vector<double>(steps));
    r.es.resize(steps);
    r.tsl_es.resize(steps);

    const auto m = running_min(ens);
    for (std::size_t k = 0; k < steps; ++k) {
        const auto d = ens.volumes_at(k);
        double mean = 0.0;
        for (double v : d) mean += v;
        r.expected[k] = mean / static_cast<double>(d.size());
        const auto mk = running_min_at(m, steps, k);
        for (std::size_t a = 0; a < r.alphas.size(); ++a) {
            r.var[a][k] = lower_quantile(d, r.alphas[a]);
            r.tsl[a][k] = lower_quantile(mk, r.alphas[a]) / r.initial_volume;
        }
        r.es[k] = tail_mean(d, r.es_alpha).value;
        r.tsl_es[k] = tail_mean(mk, r.es_alpha).value / r.initial_volume;
    }
    return r;
}

std::vector<TslTableRow> tsl_table(const PathEnsemble& ens, const std::vector<std::size_t>& steps) {
    const double d0 = initial_volume(ens);
    const auto m = running_min(ens);
    std::vector<TslTableRow> rows;
    for (std::size_t step : steps) {
        if (step > ens.horizon())
            throw DomainError("tsl_table: horizon " + std::to_string(step) + " exceeds the simulated grid");
        const auto mk = running_min_at(m, ens.steps(), step);
        rows.push_back({step, lower_quantile(mk, 0.95) / d0, lower_quantile(mk, 0.99) / d0,
                        tail_mean(mk, 0.975).value / d0});
    }
    return rows;
}

}  // namespace nmd
