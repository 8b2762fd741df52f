#pragma once

#include <functional>
#include <vector>

namespace nmd {

// Objective to minimize. Non-finite values are treated as +infinity, so an
// objective may return NaN or inf outside its domain.
using Objective = std::function<double(const std::vector<double>&)>;

struct OptimOptions {
    double xtol = 1e-8;   // simplex diameter / step length
    double ftol = 1e-10;  // relative change of the objective
    double gtol = 1e-6;   // gradient infinity norm (BFGS only)
    double initial_step = 0.1;
    double fd_step = 1e-5;
    int max_evaluations = 20000;
    int max_iterations = 500;
};

struct OptimResult {
    std::vector<double> x;
    double value = 0.0;
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
};

// Derivative-free downhill simplex; deterministic given the start. The
// initial simplex steps by options.initial_step along each coordinate.
OptimResult nelder_mead(const Objective& f, const std::vector<double>& x0,
                        const OptimOptions& options = {});

// Quasi-Newton with central finite-difference gradients and a backtracking
// Armijo line search.
OptimResult bfgs(const Objective& f, const std::vector<double>& x0,
                 const OptimOptions& options = {});

std::vector<double> numerical_gradient(const Objective& f, const std::vector<double>& x,
                                       double step, int* evaluations = nullptr);

}  // namespace nmd
