#pragma once

#include <span>
#include <string>
#include <vector>

#include "nmd/error.hpp"
#include "nmd/levy_ou.hpp"
#include "nmd/panel.hpp"

namespace nmd {

struct FitConfig {
    NoiseFamily noise_family = NoiseFamily::Nig;
    bool enforce_signs = true;
    double param_tol = 1e-8;
    double objective_tol = 1e-10;
    int max_iterations = 20000;  // objective evaluations per optimizer run
    int restarts = 3;

    void validate() const;
};

// Least-squares start of the triangular system. Equation i regresses
// X_{k+1,i} on an intercept, the lags X_{k,1..i} and the residuals of the
// equations before it, which yields (a, B, S) together; Sigma_u is the
// residual covariance with divisor n - 4.
struct LeastSquaresStart {
    Vec3 a{};
    Mat3 B;
    Mat3 Sigma_u;
    Vec3 se_a{};  // standard errors of the intercepts
    Mat3 se_B;    // standard errors of the lower-triangular B entries
    std::size_t observations = 0;  // number of transitions n
};

struct CovarianceFactors {
    Mat3 S;  // unit lower triangular
    Vec3 sigma{};
};

struct StageDiagnostics {
    std::string name;
    double start_loglik = 0.0;
    double end_loglik = 0.0;
    int evaluations = 0;
    bool converged = false;
};

struct FitResult {
    Var1Params params;
    double loglik = 0.0;
    std::vector<Vec3> residuals;  // eps(t_k), k = 0..n-1
    Var1Params init;              // two-step starting point
    double init_loglik = 0.0;
    std::vector<StageDiagnostics> stages;
    bool converged = false;
};

class FitNotConverged : public ConvergenceError {
public:
    FitNotConverged(const std::string& what, FitResult best)
        : ConvergenceError(what), best_(std::move(best)) {}
    const FitResult& best() const { return best_; }

private:
    FitResult best_;
};

// Throws DataError for fewer than 30 transitions and SingularMatrixError for
// a (numerically) constant regressor.
LeastSquaresStart ols_init(const SeriesPanel& panel);

// Sigma_u = S diag(sigma^2) S'. Throws SingularMatrixError unless Sigma_u is
// symmetric positive definite.
CovarianceFactors decompose_covariance(const Mat3& sigma_u);

// eps(t_k) = S^{-1} (X_{k+1} - a - B X_k).
std::vector<Vec3> compute_residuals(const SeriesPanel& panel, const Vec3& a, const Mat3& B,
                                    const Mat3& S);

// Per-component log-likelihood terms.
double gaussian_loglik(std::span<const double> eps, double sigma);
// n log(alpha/pi) + n delta gamma + sum_k [beta delta tau_k - log c_k + log K1(alpha delta c_k)]
double nig_loglik(std::span<const double> eps, const NigParams& p);

// Log-likelihood of the panel. With require_stationary, a B with a diagonal
// entry outside (0, 1) raises NonStationaryError.
double loglik(const SeriesPanel& panel, const Var1Params& params, bool require_stationary = true);

// Two-step initialization followed by joint maximum likelihood.
// Throws FitNotConverged (carrying the best iterate) if no optimizer run
// converges within the configured restarts.
FitResult fit(const SeriesPanel& panel, const FitConfig& config);

}  // namespace nmd
