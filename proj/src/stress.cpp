#include "nmd/stress.hpp"

#include <cmath>
#include <sstream>
#include <tuple>

#include "nmd/risk.hpp"
#include "nmd/simulation.hpp"

namespace nmd {

void StressTarget::validate() const {
    if (!(outflow_fraction > 0.0 && outflow_fraction < 1.0))
        throw ConfigError("stress target: outflow_fraction must lie in (0, 1)");
    if (!(alpha > 0.5 && alpha < 1.0)) throw ConfigError("stress target: alpha must lie in (0.5, 1)");
    if (horizon_steps < 1) throw ConfigError("stress target: horizon must be at least one step");
    if (mc_paths < 1 || confirm_paths < 1) throw ConfigError("stress target: path counts must be >= 1");
    if (!(tolerance > 0.0) || !(search_tolerance > 0.0))
        throw ConfigError("stress target: tolerances must be positive");
    if (max_iterations < 1) throw ConfigError("stress target: max_iterations must be >= 1");
}

double rdo(const Var1Params& params, const SeriesPanel& panel, std::size_t k, std::size_t h_steps,
           double alpha, const RdoOptions& options) {
    if (k >= panel.size()) throw DomainError("rdo: conditioning index outside the panel");
    const auto ratio =
        conditional_simulate(params, panel.states[k], h_steps, options.n_paths, options.seed, k, options.threads);
    return 1.0 - lower_quantile(ratio, alpha);
}

double rdo_bar(const Var1Params& params, const SeriesPanel& panel, std::size_t h_steps, double alpha,
               const RdoOptions& options) {
    if (h_steps < 1) throw DomainError("rdo_bar: horizon must be at least one step");
    if (panel.size() <= h_steps) throw DomainError("rdo_bar: panel must be longer than the horizon");
    const std::size_t m = panel.transitions() - h_steps;
    double sum = 0.0;
    for (std::size_t k = 0; k <= m; ++k) sum += rdo(params, panel, k, h_steps, alpha, options);
    return sum / static_cast<double>(m + 1);
}

std::vector<double> rdo_bars(const Var1Params& params, const SeriesPanel& panel, std::size_t h_steps,
                             const std::vector<double>& alphas, const RdoOptions& options) {
    if (h_steps < 1) throw DomainError("rdo_bar: horizon must be at least one step");
    if (panel.size() <= h_steps) throw DomainError("rdo_bar: panel must be longer than the horizon");
    const std::size_t m = panel.transitions() - h_steps;
    std::vector<double> sums(alphas.size(), 0.0);
    for (std::size_t k = 0; k <= m; ++k) {
        const auto ratio = conditional_simulate(params, panel.states[k], h_steps, options.n_paths, options.seed, k,
                                                options.threads);
        for (std::size_t a = 0; a < alphas.size(); ++a) sums[a] += 1.0 - lower_quantile(ratio, alphas[a]);
    }
    for (double& s : sums) s /= static_cast<double>(m + 1);
    return sums;
}

namespace {

Var1Params with_volume_beta(const Var1Params& base, double log_gamma, double beta) {
    Var1Params p = base;
    p.nig[2] = expand_constrained({log_gamma, beta, base.sigma[2]});
    return p;
}

}  // namespace

StressResult stress_calibrate(const Var1Params& calibrated, const SeriesPanel& panel, const StressTarget& target,
                              std::uint64_t seed, unsigned threads) {
    target.validate();
    calibrated.validate();
    if (calibrated.family != NoiseFamily::Nig)
        throw DomainError("stress_calibrate: calibrated parameters must use NIG noise");

    const double log_gamma = std::log(calibrated.nig[2].gamma());
    const double gamma = calibrated.nig[2].gamma();
    const double beta_cal = calibrated.nig[2].beta;
    const double goal = target.outflow_fraction;

    StressResult result;
    auto evaluate = [&](double beta, std::size_t paths) {
        const RdoOptions opt{paths, seed, threads};
        const double v = rdo_bar(with_volume_beta(calibrated, log_gamma, beta), panel, target.horizon_steps,
                                 target.alpha, opt);
        result.trace.push_back({beta, v, paths});
        return v;
    };

    // Bisection on [lo, hi] (lo more negative, f(lo) >= goal > f(hi)).
    auto bisect = [&](double lo, double hi, double f_lo, double f_hi, std::size_t paths, double tol) {
        double best = std::abs(f_lo - goal) < std::abs(f_hi - goal) ? lo : hi;
        double best_gap = std::min(std::abs(f_lo - goal), std::abs(f_hi - goal));
        for (int it = 0; it < target.max_iterations && best_gap > tol; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double f = evaluate(mid, paths);
            if (std::abs(f - goal) < best_gap) {
                best_gap = std::abs(f - goal);
                best = mid;
            }
            if (f >= goal) {
                lo = mid;
                f_lo = f;
            } else {
                hi = mid;
                f_hi = f;
            }
            if (std::abs(hi - lo) <= 1e-12 * std::max(1.0, std::abs(lo))) break;
        }
        return std::tuple{best, lo, hi, f_lo, f_hi};
    };

    const double f_cal = evaluate(beta_cal, target.mc_paths);
    result.calibrated_rdo_bar = f_cal;

    double beta_star = beta_cal;
    double lo = beta_cal, hi = beta_cal, f_lo = f_cal, f_hi = f_cal;
    if (std::abs(f_cal - goal) > target.search_tolerance) {
        if (f_cal > goal) {
            std::ostringstream msg;
            msg << "stress target " << goal << " lies below the calibrated RDO-bar " << f_cal
                << "; only heavier left tails (beta <= calibrated beta) are searched";
            throw StressTargetUnreachable(msg.str(), f_cal);
        }
        // outward scan; RDO-bar is not monotone far out in beta, so take the
        // first crossing
        bool bracketed = false;
        double prev = beta_cal, f_prev = f_cal, extremal = f_cal;
        for (double c : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0}) {
            const double b = beta_cal - c * gamma;
            const double f = evaluate(b, target.mc_paths);
            extremal = std::max(extremal, f);
            if (f >= goal) {
                lo = b;
                f_lo = f;
                hi = prev;
                f_hi = f_prev;
                bracketed = true;
                break;
            }
            prev = b;
            f_prev = f;
        }
        if (!bracketed) {
            std::ostringstream msg;
            msg << "stress target " << goal << " is not reachable by lowering beta_3 with gamma_3 fixed; "
                << "largest RDO-bar reached " << extremal;
            throw StressTargetUnreachable(msg.str(), extremal);
        }
        std::tie(beta_star, lo, hi, f_lo, f_hi) =
            bisect(lo, hi, f_lo, f_hi, target.mc_paths, target.search_tolerance);
    }

    double achieved = evaluate(beta_star, target.confirm_paths);
    if (std::abs(achieved - goal) > target.tolerance && lo != hi) {
        // refine at the confirmation path count inside the last bracket
        const double a = evaluate(lo, target.confirm_paths);
        const double b = evaluate(hi, target.confirm_paths);
        if (a >= goal && b < goal) {
            std::tie(beta_star, lo, hi, f_lo, f_hi) = bisect(lo, hi, a, b, target.confirm_paths, target.search_tolerance);
            achieved = evaluate(beta_star, target.confirm_paths);
        }
    }

    result.params = with_volume_beta(calibrated, log_gamma, beta_star);
    result.stressed = result.params.nig[2];
    result.achieved_rdo_bar = achieved;
    result.step_moments = nig_moments(result.stressed);
    const int per_year = static_cast<int>(std::lround(1.0 / calibrated.dt));
    result.annual = annualize_moments(result.step_moments.skewness, result.step_moments.excess_kurtosis, per_year);
    return result;
}

}  // namespace nmd
