#include "nmd/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace nmd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double safe_eval(const Objective& f, const std::vector<double>& x) {
    const double v = f(x);
    return std::isfinite(v) ? v : kInf;
}

bool small_change(double f_old, double f_new, double ftol) {
    return std::abs(f_old - f_new) <= ftol * std::max(1.0, std::abs(f_new));
}

}  // namespace

OptimResult nelder_mead(const Objective& f, const std::vector<double>& x0,
                        const OptimOptions& opt) {
    const std::size_t n = x0.size();
    std::vector<std::vector<double>> simplex(n + 1, x0);
    std::vector<double> values(n + 1);
    OptimResult res;

    for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += opt.initial_step;
    for (std::size_t i = 0; i <= n; ++i) values[i] = safe_eval(f, simplex[i]);
    res.evaluations = static_cast<int>(n + 1);

    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n), trial(n), trial2(n);

    auto point_along = [&](double coef, std::vector<double>& out) {
        const auto& worst = simplex[order[n]];
        for (std::size_t j = 0; j < n; ++j) out[j] = centroid[j] + coef * (worst[j] - centroid[j]);
    };

    while (res.evaluations < opt.max_evaluations) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

        double diameter = 0.0;
        for (std::size_t i = 1; i <= n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                diameter = std::max(diameter, std::abs(simplex[order[i]][j] - simplex[order[0]][j]));
        const double fbest = values[order[0]];
        const double fworst = values[order[n]];
        if (diameter <= opt.xtol ||
            (std::isfinite(fworst) && small_change(fworst, fbest, opt.ftol) && diameter <= 1e3 * opt.xtol)) {
            res.converged = true;
            break;
        }
        ++res.iterations;

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[order[i]][j] / static_cast<double>(n);

        point_along(-1.0, trial);
        const double fr = safe_eval(f, trial);
        ++res.evaluations;

        if (fr < fbest) {
            point_along(-2.0, trial2);
            const double fe = safe_eval(f, trial2);
            ++res.evaluations;
            if (fe < fr) {
                simplex[order[n]] = trial2;
                values[order[n]] = fe;
            } else {
                simplex[order[n]] = trial;
                values[order[n]] = fr;
            }
            continue;
        }
        if (fr < values[order[n - 1]]) {
            simplex[order[n]] = trial;
            values[order[n]] = fr;
            continue;
        }
        // contraction: outside if the reflection improved on the worst point
        const bool outside = fr < fworst;
        point_along(outside ? -0.5 : 0.5, trial2);
        const double fc = safe_eval(f, trial2);
        ++res.evaluations;
        if (fc < (outside ? fr : fworst)) {
            simplex[order[n]] = trial2;
            values[order[n]] = fc;
            continue;
        }
        // shrink towards the best vertex
        const auto best = simplex[order[0]];
        for (std::size_t i = 1; i <= n; ++i) {
            auto& v = simplex[order[i]];
            for (std::size_t j = 0; j < n; ++j) v[j] = best[j] + 0.5 * (v[j] - best[j]);
            values[order[i]] = safe_eval(f, v);
        }
        res.evaluations += static_cast<int>(n);
    }

    const auto best = std::min_element(values.begin(), values.end());
    res.x = simplex[static_cast<std::size_t>(best - values.begin())];
    res.value = *best;
    return res;
}

std::vector<double> numerical_gradient(const Objective& f, const std::vector<double>& x,
                                       double step, int* evaluations) {
    std::vector<double> g(x.size());
    std::vector<double> xp = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double h = step * std::max(1.0, std::abs(x[i]));
        xp[i] = x[i] + h;
        const double fp = safe_eval(f, xp);
        xp[i] = x[i] - h;
        const double fm = safe_eval(f, xp);
        xp[i] = x[i];
        g[i] = (fp - fm) / (2.0 * h);
        if (!std::isfinite(g[i])) g[i] = 0.0;
    }
    if (evaluations) *evaluations += static_cast<int>(2 * x.size());
    return g;
}

OptimResult bfgs(const Objective& f, const std::vector<double>& x0, const OptimOptions& opt) {
    const std::size_t n = x0.size();
    OptimResult res;
    res.x = x0;
    res.value = safe_eval(f, x0);
    res.evaluations = 1;
    if (!std::isfinite(res.value)) return res;

    // inverse Hessian approximation, row-major
    std::vector<double> h(n * n, 0.0);
    auto reset_h = [&] {
        std::fill(h.begin(), h.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) h[i * n + i] = 1.0;
    };
    reset_h();

    std::vector<double> g = numerical_gradient(f, res.x, opt.fd_step, &res.evaluations);
    std::vector<double> dir(n), xn(n), s(n), y(n), hy(n);
    int quiet = 0;

    for (int it = 0; it < opt.max_iterations && res.evaluations < opt.max_evaluations; ++it) {
        res.iterations = it + 1;
        double gmax = 0.0;
        for (double gi : g) gmax = std::max(gmax, std::abs(gi));
        if (gmax <= opt.gtol) {
            res.converged = true;
            break;
        }

        for (std::size_t i = 0; i < n; ++i) {
            double d = 0.0;
            for (std::size_t j = 0; j < n; ++j) d -= h[i * n + j] * g[j];
            dir[i] = d;
        }
        double slope = std::inner_product(dir.begin(), dir.end(), g.begin(), 0.0);
        if (!(slope < 0.0)) {
            reset_h();
            for (std::size_t i = 0; i < n; ++i) dir[i] = -g[i];
            slope = -std::inner_product(g.begin(), g.end(), g.begin(), 0.0);
        }

        double step = 1.0;
        double fn = kInf;
        bool accepted = false;
        for (int ls = 0; ls < 50; ++ls) {
            for (std::size_t i = 0; i < n; ++i) xn[i] = res.x[i] + step * dir[i];
            fn = safe_eval(f, xn);
            ++res.evaluations;
            if (fn <= res.value + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            // no descent along the quasi-Newton direction; restart once from
            // steepest descent, otherwise stop
            if (quiet > 0) break;
            reset_h();
            ++quiet;
            continue;
        }

        double step_norm = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = xn[i] - res.x[i];
            step_norm = std::max(step_norm, std::abs(s[i]));
        }
        const std::vector<double> gn = numerical_gradient(f, xn, opt.fd_step, &res.evaluations);
        for (std::size_t i = 0; i < n; ++i) y[i] = gn[i] - g[i];

        const bool tiny = small_change(res.value, fn, opt.ftol) || step_norm <= opt.xtol;
        res.x = xn;
        res.value = fn;
        g = gn;
        if (tiny) {
            if (++quiet >= 2) {
                res.converged = true;
                break;
            }
        } else {
            quiet = 0;
        }

        const double sy = std::inner_product(s.begin(), s.end(), y.begin(), 0.0);
        const double ss = std::inner_product(s.begin(), s.end(), s.begin(), 0.0);
        const double yy = std::inner_product(y.begin(), y.end(), y.begin(), 0.0);
        if (sy > 1e-12 * std::sqrt(ss * yy)) {
            for (std::size_t i = 0; i < n; ++i) {
                double v = 0.0;
                for (std::size_t j = 0; j < n; ++j) v += h[i * n + j] * y[j];
                hy[i] = v;
            }
            const double yhy = std::inner_product(y.begin(), y.end(), hy.begin(), 0.0);
            const double rho = 1.0 / sy;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    h[i * n + j] += rho * ((1.0 + rho * yhy) * s[i] * s[j] - hy[i] * s[j] - s[i] * hy[j]);
        }
    }
    return res;
}

}  // namespace nmd
