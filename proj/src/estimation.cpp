#include "nmd/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "nmd/bessel.hpp"
#include "nmd/optimize.hpp"

namespace nmd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::array<std::pair<std::size_t, std::size_t>, 3> kOffDiagonal = {{{1, 0}, {2, 0}, {2, 1}}};

struct Regression {
    std::vector<double> coef;  // intercept first
    std::vector<double> se;
    std::vector<double> resid;
    double rss = 0.0;
};

// In-place Cholesky of a dense p x p matrix; returns false if not positive definite.
bool cholesky(std::vector<double>& a, std::size_t p) {
    for (std::size_t j = 0; j < p; ++j) {
        double d = a[j * p + j];
        for (std::size_t k = 0; k < j; ++k) d -= a[j * p + k] * a[j * p + k];
        if (!(d > 1e-12)) return false;
        const double l = std::sqrt(d);
        a[j * p + j] = l;
        for (std::size_t i = j + 1; i < p; ++i) {
            double s = a[i * p + j];
            for (std::size_t k = 0; k < j; ++k) s -= a[i * p + k] * a[j * p + k];
            a[i * p + j] = s / l;
        }
    }
    return true;
}

std::vector<double> cholesky_solve(const std::vector<double>& l, std::size_t p, std::vector<double> b) {
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t k = 0; k < i; ++k) b[i] -= l[i * p + k] * b[k];
        b[i] /= l[i * p + i];
    }
    for (std::size_t i = p; i-- > 0;) {
        for (std::size_t k = i + 1; k < p; ++k) b[i] -= l[k * p + i] * b[k];
        b[i] /= l[i * p + i];
    }
    return b;
}

// OLS of y on an intercept and the given columns, on standardized regressors.
Regression least_squares(const std::vector<std::vector<double>>& cols, const std::vector<double>& y,
                         double variance_divisor) {
    const std::size_t n = y.size();
    const std::size_t p = cols.size();
    std::vector<double> mean(p), sd(p);
    std::vector<std::vector<double>> z(p, std::vector<double>(n));
    for (std::size_t j = 0; j < p; ++j) {
        double m = 0.0;
        for (double v : cols[j]) m += v;
        m /= static_cast<double>(n);
        double ss = 0.0;
        for (double v : cols[j]) ss += (v - m) * (v - m);
        const double s = std::sqrt(ss / static_cast<double>(n));
        if (!(s > 1e-12 * std::max(1.0, std::abs(m))))
            throw SingularMatrixError("least squares: regressor " + std::to_string(j + 1) +
                                      " is constant; regressor matrix is singular");
        mean[j] = m;
        sd[j] = s;
        for (std::size_t k = 0; k < n; ++k) z[j][k] = (cols[j][k] - m) / s;
    }
    double ybar = 0.0;
    for (double v : y) ybar += v;
    ybar /= static_cast<double>(n);

    std::vector<double> gram(p * p, 0.0), rhs(p, 0.0);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k) s += z[i][k] * z[j][k];
            gram[i * p + j] = gram[j * p + i] = s;
        }
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) s += z[i][k] * (y[k] - ybar);
        rhs[i] = s;
    }
    std::vector<double> chol = gram;
    if (!cholesky(chol, p))
        throw SingularMatrixError("least squares: collinear regressors; regressor matrix is singular");
    const std::vector<double> beta = cholesky_solve(chol, p, rhs);

    Regression r;
    r.coef.assign(p + 1, 0.0);
    double intercept = ybar;
    for (std::size_t j = 0; j < p; ++j) {
        r.coef[j + 1] = beta[j] / sd[j];
        intercept -= r.coef[j + 1] * mean[j];
    }
    r.coef[0] = intercept;
    r.resid.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        double fitted = intercept;
        for (std::size_t j = 0; j < p; ++j) fitted += r.coef[j + 1] * cols[j][k];
        r.resid[k] = y[k] - fitted;
        r.rss += r.resid[k] * r.resid[k];
    }

    // standard errors from sigma^2 (Z'Z)^{-1}
    const double s2 = r.rss / variance_divisor;
    std::vector<double> cov(p * p);
    for (std::size_t j = 0; j < p; ++j) {
        std::vector<double> e(p, 0.0);
        e[j] = 1.0;
        const auto col = cholesky_solve(chol, p, e);
        for (std::size_t i = 0; i < p; ++i) cov[i * p + j] = s2 * col[i] / (sd[i] * sd[j]);
    }
    r.se.assign(p + 1, 0.0);
    double var_intercept = s2 / static_cast<double>(n);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j) var_intercept += mean[i] * cov[i * p + j] * mean[j];
    r.se[0] = std::sqrt(var_intercept);
    for (std::size_t j = 0; j < p; ++j) r.se[j + 1] = std::sqrt(cov[j * p + j]);
    return r;
}

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }
double logit(double b) { return std::log(b / (1.0 - b)); }

// Maps Var1Params to an unconstrained vector:
//   [0,3)  c = a - (I - B) xbar (intercept of the centered system)
//   [3,6)  logit of diag(B)
//   [6,9)  b21, b31, b32   (log magnitudes when signs are enforced)
//   [9,12) s21, s31, s32   (idem)
//   [12,15) log sigma
//   [15,21) (log gamma_i, beta_i), NIG only
class ParamCodec {
public:
    ParamCodec(NoiseFamily family, bool signs, const Vec3& xbar)
        : family_(family), signs_(signs), xbar_(xbar) {}

    std::size_t size() const { return family_ == NoiseFamily::Nig ? 21 : 15; }

    // `floors` are the magnitudes used when a sign-constrained entry starts
    // on the wrong side of zero.
    std::vector<double> encode(const Var1Params& p, const std::array<double, 6>& floors) const {
        std::vector<double> x(size());
        const Vec3 c = p.a - (Mat3::identity() - p.B) * xbar_;
        for (std::size_t i = 0; i < 3; ++i) {
            x[i] = c[i];
            x[3 + i] = logit(std::clamp(p.B(i, i), 1e-6, 1.0 - 1e-6));
            x[12 + i] = std::log(p.sigma[i]);
        }
        for (std::size_t k = 0; k < 3; ++k) {
            const auto [i, j] = kOffDiagonal[k];
            x[6 + k] = encode_signed(p.B(i, j), kSignPattern[k], floors[k]);
            x[9 + k] = encode_signed(p.S(i, j), kSignPattern[k], floors[3 + k]);
        }
        if (family_ == NoiseFamily::Nig) {
            for (std::size_t i = 0; i < 3; ++i) {
                x[15 + 2 * i] = std::log(p.nig[i].gamma());
                x[16 + 2 * i] = p.nig[i].beta;
            }
        }
        return x;
    }

    // Returns false when the vector maps outside the model's domain.
    bool decode(const std::vector<double>& x, Var1Params& p) const {
        p.family = family_;
        p.B = Mat3::identity();
        p.S = Mat3::identity();
        for (std::size_t i = 0; i < 3; ++i) {
            p.B(i, i) = logistic(x[3 + i]);
            if (!(p.B(i, i) > 0.0 && p.B(i, i) < 1.0)) return false;
            p.sigma[i] = std::exp(x[12 + i]);
            if (!(p.sigma[i] > 0.0) || !std::isfinite(p.sigma[i])) return false;
        }
        for (std::size_t k = 0; k < 3; ++k) {
            const auto [i, j] = kOffDiagonal[k];
            p.B(i, j) = decode_signed(x[6 + k], kSignPattern[k]);
            p.S(i, j) = decode_signed(x[9 + k], kSignPattern[k]);
        }
        const Vec3 c{x[0], x[1], x[2]};
        p.a = c + (Mat3::identity() - p.B) * xbar_;
        if (family_ == NoiseFamily::Nig) {
            for (std::size_t i = 0; i < 3; ++i) {
                const double lg = x[15 + 2 * i];
                if (!(std::abs(lg) < 300.0)) return false;
                try {
                    p.nig[i] = expand_constrained({lg, x[16 + 2 * i], p.sigma[i]});
                } catch (const DomainError&) {
                    return false;
                }
            }
        }
        return true;
    }

private:
    double encode_signed(double v, int sign, double floor) const {
        if (!signs_) return v;
        const double mag = v * sign > 0.0 ? std::abs(v) : floor;
        return std::log(std::max(mag, 1e-300));
    }
    double decode_signed(double z, int sign) const { return signs_ ? sign * std::exp(z) : z; }

    NoiseFamily family_;
    bool signs_;
    Vec3 xbar_;
};

double component_loglik(const std::vector<Vec3>& eps, std::size_t i, const Var1Params& p) {
    std::vector<double> e(eps.size());
    for (std::size_t k = 0; k < eps.size(); ++k) e[k] = eps[k][i];
    return p.family == NoiseFamily::Nig ? nig_loglik(e, p.nig[i]) : gaussian_loglik(e, p.sigma[i]);
}

// Diagonal curvature in each coordinate; the optimizer works in units of
// 1/sqrt(curvature) so that one unit is roughly one standard error.
std::vector<double> curvature_scales(const Objective& f, const std::vector<double>& x, double f0,
                                     std::vector<double> guess) {
    std::vector<double> scales(x.size());
    std::vector<double> xp = x;
    for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double h = 0.1 * guess[i];
            xp[i] = x[i] + h;
            const double fp = f(xp);
            xp[i] = x[i] - h;
            const double fm = f(xp);
            xp[i] = x[i];
            const double curv = (fp - 2.0 * f0 + fm) / (h * h);
            double s = (std::isfinite(curv) && curv > 0.0) ? 1.0 / std::sqrt(curv) : guess[i];
            scales[i] = std::clamp(s, 1e-9, 10.0);
        }
        guess = scales;
    }
    return scales;
}

struct ScaledRun {
    std::vector<double> x;
    double value = kInf;
    int evaluations = 0;
    bool converged = false;
};

// Alternates quasi-Newton and simplex runs in curvature-scaled coordinates,
// restarting from the best point, until a round no longer improves.
ScaledRun minimize_with_restarts(const Objective& f, std::vector<double> x0,
                                 std::vector<double> scale_guess, const FitConfig& cfg) {
    ScaledRun best;
    best.x = x0;
    best.value = f(x0);
    best.evaluations = 1;
    for (int round = 0; round <= cfg.restarts; ++round) {
        const double round_start = best.value;
        const std::vector<double> origin = best.x;
        const std::vector<double> scales = curvature_scales(f, origin, best.value, scale_guess);
        best.evaluations += static_cast<int>(4 * origin.size());
        scale_guess = scales;
        const Objective scaled = [&](const std::vector<double>& z) {
            std::vector<double> x(z.size());
            for (std::size_t i = 0; i < z.size(); ++i) x[i] = origin[i] + scales[i] * z[i];
            return f(x);
        };
        auto unscale = [&](const std::vector<double>& z) {
            std::vector<double> x(z.size());
            for (std::size_t i = 0; i < z.size(); ++i) x[i] = origin[i] + scales[i] * z[i];
            return x;
        };

        OptimOptions opt;
        opt.xtol = cfg.param_tol;
        opt.ftol = cfg.objective_tol;
        opt.gtol = 1e-6;
        opt.max_evaluations = cfg.max_iterations;
        opt.max_iterations = 1000;
        opt.fd_step = 1e-4;
        opt.initial_step = 1.0;

        bool any_converged = false;
        std::vector<double> z(origin.size(), 0.0);
        const OptimResult q = bfgs(scaled, z, opt);
        best.evaluations += q.evaluations;
        if (q.value < best.value) {
            best.value = q.value;
            z = q.x;
        }
        any_converged |= q.converged;

        const OptimResult s = nelder_mead(scaled, z, opt);
        best.evaluations += s.evaluations;
        if (s.value < best.value) {
            best.value = s.value;
            z = s.x;
        }
        any_converged |= s.converged;

        const OptimResult q2 = bfgs(scaled, z, opt);
        best.evaluations += q2.evaluations;
        if (q2.value < best.value) {
            best.value = q2.value;
            z = q2.x;
        }
        any_converged |= q2.converged;

        best.x = unscale(z);
        const double gain = round_start - best.value;
        if (any_converged && gain <= cfg.objective_tol * std::max(1.0, std::abs(best.value))) {
            best.converged = true;
            break;
        }
    }
    return best;
}

// Moment-matched NIG start (mean 0, variance sigma^2) from sample skewness
// and excess kurtosis.
NigFree moment_start(std::span<const double> e, double sigma) {
    double m2 = 0.0, m3 = 0.0, m4 = 0.0, mean = 0.0;
    for (double v : e) mean += v;
    mean /= static_cast<double>(e.size());
    for (double v : e) {
        const double d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    const double n = static_cast<double>(e.size());
    m2 /= n;
    m3 /= n;
    m4 /= n;
    const double skew = m3 / std::pow(m2, 1.5);
    const double exkurt = std::max(m4 / (m2 * m2) - 3.0, 0.1);
    // skew = 3 rho / sqrt(zeta), exkurt = 3 (1 + 4 rho^2) / zeta, rho = beta / alpha
    double rho2 = 3.0 * exkurt > 4.0 * skew * skew ? skew * skew / (3.0 * exkurt - 4.0 * skew * skew) : 0.8;
    rho2 = std::min(rho2, 0.8);
    const double rho = std::copysign(std::sqrt(rho2), skew);
    const double zeta = 3.0 * (1.0 + 4.0 * rho2) / exkurt;
    const double g = std::sqrt(zeta / (sigma * sigma * (1.0 - rho2)));
    return {std::log(g), rho * g / std::sqrt(1.0 - rho2), sigma};
}

}  // namespace

void FitConfig::validate() const {
    if (!(param_tol > 0.0) || !(objective_tol > 0.0))
        throw ConfigError("optimizer tolerances must be positive");
    if (max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
    if (restarts < 0) throw ConfigError("restarts must be >= 0");
}

LeastSquaresStart ols_init(const SeriesPanel& panel) {
    const std::size_t n = panel.transitions();
    if (n < 30)
        throw DataError("least squares start needs at least 30 transitions, got " + std::to_string(n));
    std::array<std::vector<double>, 3> lag, lead;
    for (std::size_t i = 0; i < 3; ++i) {
        lag[i].resize(n);
        lead[i].resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            lag[i][k] = panel.states[k][i];
            lead[i][k] = panel.states[k + 1][i];
        }
    }
    const double divisor = static_cast<double>(n) - 4.0;
    const Regression r1 = least_squares({lag[0]}, lead[0], divisor);
    const Regression r2 = least_squares({lag[0], lag[1], r1.resid}, lead[1], divisor);
    const Regression r3 = least_squares({lag[0], lag[1], lag[2], r1.resid, r2.resid}, lead[2], divisor);

    LeastSquaresStart out;
    out.observations = n;
    out.a = {r1.coef[0], r2.coef[0], r3.coef[0]};
    out.se_a = {r1.se[0], r2.se[0], r3.se[0]};
    out.B = Mat3::from({r1.coef[1], 0, 0, r2.coef[1], r2.coef[2], 0, r3.coef[1], r3.coef[2], r3.coef[3]});
    out.se_B = Mat3::from({r1.se[1], 0, 0, r2.se[1], r2.se[2], 0, r3.se[1], r3.se[2], r3.se[3]});

    Mat3 cov{};
    for (std::size_t k = 0; k < n; ++k) {
        const Vec3 u = panel.states[k + 1] - out.a - out.B * panel.states[k];
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) cov(i, j) += u[i] * u[j];
    }
    out.Sigma_u = (1.0 / divisor) * cov;
    return out;
}

CovarianceFactors decompose_covariance(const Mat3& s) {
    double scale = 0.0;
    for (double v : s.data) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (std::abs(s(i, j) - s(j, i)) > 1e-12 * scale)
                throw SingularMatrixError("decompose_covariance: matrix is not symmetric");
    CovarianceFactors f;
    f.S = Mat3::identity();
    Vec3 d{};
    d[0] = s(0, 0);
    if (!(d[0] > 0.0)) throw SingularMatrixError("decompose_covariance: matrix is not positive definite");
    f.S(1, 0) = s(1, 0) / d[0];
    f.S(2, 0) = s(2, 0) / d[0];
    d[1] = s(1, 1) - f.S(1, 0) * f.S(1, 0) * d[0];
    if (!(d[1] > 0.0)) throw SingularMatrixError("decompose_covariance: matrix is not positive definite");
    f.S(2, 1) = (s(2, 1) - f.S(2, 0) * f.S(1, 0) * d[0]) / d[1];
    d[2] = s(2, 2) - f.S(2, 0) * f.S(2, 0) * d[0] - f.S(2, 1) * f.S(2, 1) * d[1];
    if (!(d[2] > 0.0)) throw SingularMatrixError("decompose_covariance: matrix is not positive definite");
    for (std::size_t i = 0; i < 3; ++i) f.sigma[i] = std::sqrt(d[i]);
    return f;
}

std::vector<Vec3> compute_residuals(const SeriesPanel& panel, const Vec3& a, const Mat3& B,
                                    const Mat3& S) {
    std::vector<Vec3> eps(panel.transitions());
    for (std::size_t k = 0; k < eps.size(); ++k) {
        const Vec3 u = panel.states[k + 1] - a - B * panel.states[k];
        eps[k] = solve_lower(S, u);
    }
    return eps;
}

double gaussian_loglik(std::span<const double> eps, double sigma) {
    if (!(sigma > 0.0)) throw DomainError("gaussian_loglik: sigma must be positive");
    double ss = 0.0;
    for (double e : eps) ss += e * e;
    const double n = static_cast<double>(eps.size());
    return -0.5 * n * std::log(2.0 * std::numbers::pi * sigma * sigma) - 0.5 * ss / (sigma * sigma);
}

double nig_loglik(std::span<const double> eps, const NigParams& p) {
    p.validate();
    const double n = static_cast<double>(eps.size());
    const double ad = p.alpha * p.delta;
    double sum = 0.0;
    for (double x : eps) {
        const double tau = (x - p.mu) / p.delta;
        const double c = std::hypot(1.0, tau);
        sum += p.beta * p.delta * tau - std::log(c) + log_bessel_k1(ad * c);
    }
    return n * std::log(p.alpha / std::numbers::pi) + n * p.delta * p.gamma() + sum;
}

double loglik(const SeriesPanel& panel, const Var1Params& params, bool require_stationary) {
    params.validate();
    if (require_stationary) {
        const auto rep = check_stationarity_transition(params.B);
        if (!rep.stationary) throw NonStationaryError("loglik: " + rep.diagnostic);
    }
    const auto eps = compute_residuals(panel, params.a, params.B, params.S);
    double total = 0.0;
    for (std::size_t i = 0; i < 3; ++i) total += component_loglik(eps, i, params);
    return total;
}

FitResult fit(const SeriesPanel& panel, const FitConfig& config) {
    config.validate();
    FitResult result;

    // stage 1: least squares and covariance factorization
    const LeastSquaresStart ls = ols_init(panel);
    const CovarianceFactors cf = decompose_covariance(ls.Sigma_u);
    Var1Params init;
    init.a = ls.a;
    init.B = ls.B;
    init.S = cf.S;
    init.sigma = cf.sigma;
    init.dt = panel.dt;
    init.family = NoiseFamily::Gaussian;
    const auto eps0 = compute_residuals(panel, init.a, init.B, init.S);

    if (config.noise_family == NoiseFamily::Gaussian) {
        const double l0 = loglik(panel, init, false);
        result.stages.push_back({"least_squares", l0, l0, 0, true});
    } else {
        // stage 2: NIG margins with {a, B, S, sigma} fixed
        init.family = NoiseFamily::Nig;
        StageDiagnostics diag{"nig_margins", 0.0, 0.0, 0, true};
        for (std::size_t i = 0; i < 3; ++i) {
            std::vector<double> e(eps0.size());
            for (std::size_t k = 0; k < e.size(); ++k) e[k] = eps0[k][i];
            const double sigma = init.sigma[i];
            const Objective f = [&](const std::vector<double>& x) {
                try {
                    return -nig_loglik(e, expand_constrained({x[0], x[1], sigma}));
                } catch (const DomainError&) {
                    return kInf;
                }
            };
            const NigFree mom = moment_start(e, sigma);
            const std::vector<std::vector<double>> starts = {
                {mom.log_gamma, mom.beta},
                {mom.log_gamma, 0.0},
                {mom.log_gamma - 1.0, 0.5 * mom.beta},
            };
            double start_value = f(starts[0]);
            ScaledRun best;
            for (const auto& s : starts) {
                const double g = std::exp(s[0]);
                ScaledRun run = minimize_with_restarts(f, s, {0.1, 0.1 * g}, config);
                diag.evaluations += run.evaluations;
                if (run.value < best.value) best = run;
            }
            diag.converged &= best.converged;
            init.nig[i] = expand_constrained({best.x[0], best.x[1], sigma});
            diag.start_loglik -= start_value;
            diag.end_loglik -= best.value;
        }
        // the Gaussian part of the margins does not depend on the NIG terms
        result.stages.push_back(diag);
    }
    result.init = init;
    result.init_loglik = loglik(panel, init, false);

    // stage 3: joint maximum likelihood under sign and stationarity constraints
    Vec3 xbar{};
    for (std::size_t k = 0; k < panel.transitions(); ++k) xbar = xbar + panel.states[k];
    xbar = (1.0 / static_cast<double>(panel.transitions())) * xbar;

    const ParamCodec codec(config.noise_family, config.enforce_signs, xbar);
    std::array<double, 6> floors{};
    for (std::size_t k = 0; k < 3; ++k) {
        const auto [i, j] = kOffDiagonal[k];
        floors[k] = 0.1 * ls.se_B(i, j);
        floors[3 + k] = 0.1 * cf.sigma[i] / (cf.sigma[j] * std::sqrt(static_cast<double>(ls.observations)));
    }
    const std::vector<double> x0 = codec.encode(init, floors);
    const Objective objective = [&](const std::vector<double>& x) {
        Var1Params p;
        p.dt = panel.dt;
        if (!codec.decode(x, p)) return kInf;
        try {
            return -loglik(panel, p, true);
        } catch (const std::exception&) {
            return kInf;
        }
    };
    std::vector<double> guess(x0.size(), 0.1);
    const double start_value = objective(x0);
    const ScaledRun run = minimize_with_restarts(objective, x0, guess, config);

    Var1Params best;
    best.dt = panel.dt;
    codec.decode(run.x, best);
    result.params = best;
    result.loglik = loglik(panel, best, true);
    result.residuals = compute_residuals(panel, best.a, best.B, best.S);
    result.stages.push_back({"joint_ml", -start_value, result.loglik, run.evaluations, run.converged});
    result.converged = run.converged;
    if (!run.converged) {
        std::ostringstream msg;
        msg << "joint maximum likelihood did not converge after " << config.restarts
            << " restarts (best loglik " << result.loglik << ")";
        throw FitNotConverged(msg.str(), result);
    }
    return result;
}

}  // namespace nmd
