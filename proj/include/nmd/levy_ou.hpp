#pragma once

// Continuous-time OU model dX = -K (X - theta) dt + Sigma dL and its exact
// VAR(1) discretization X_{k+1} = a + B X_k + S eps_k.
//
// Component order: 0 = market rate, 1 = deposit rate (level or log),
// 2 = log volume. Time is measured in years; monthly data use dt = 1/12.

#include <array>
#include <string>

#include "nmd/linalg.hpp"
#include "nmd/nig.hpp"

namespace nmd {

inline constexpr double kMonthlyStep = 1.0 / 12.0;

enum class NoiseFamily { Gaussian, Nig };

std::string to_string(NoiseFamily family);
NoiseFamily parse_noise_family(const std::string& name);

struct OuParams {
    Mat3 K;      // lower triangular, 1/year
    Vec3 theta;  // long-run level
    Mat3 Sigma = Mat3::identity();  // lower triangular, unit diagonal

    // Throws DomainError on a non-triangular K or Sigma, or a Sigma
    // diagonal different from one. Stationarity is checked separately.
    void validate() const;
};

struct Var1Params {
    Vec3 a{};
    Mat3 B = Mat3::identity();
    Mat3 S = Mat3::identity();  // unit lower triangular (s21, s31, s32)
    Vec3 sigma{1.0, 1.0, 1.0};  // per-step noise standard deviations
    NoiseFamily family = NoiseFamily::Gaussian;
    std::array<NigParams, 3> nig{};  // meaningful iff family == Nig
    double dt = kMonthlyStep;

    // Structural checks: triangular B and S, unit diagonal of S, sigma > 0,
    // dt > 0, and for the NIG family valid laws with mean 0 and variance
    // sigma^2 (relative tolerance 1e-8). Throws DomainError.
    void validate() const;
    // The same checks without pinning the NIG moments (simulation accepts
    // externally supplied laws).
    void validate_structure() const;

    bool operator==(const Var1Params&) const = default;
};

// b21 > 0, b31 < 0, b32 > 0, s21 > 0, s31 < 0, s32 > 0.
inline constexpr std::array<int, 3> kSignPattern = {+1, -1, +1};  // (21, 31, 32)
bool satisfies_sign_pattern(const Var1Params& p);

struct DriftParams {
    Vec3 a{};
    Mat3 B;
};

struct OuDrift {
    Mat3 K;
    Vec3 theta{};
};

// B = exp(-K dt), a = (I - B) theta.
DriftParams ou_to_var1(const OuParams& p, double dt);

// K = -log(B) / dt, theta = (I - B)^{-1} a. Throws NonStationaryError when
// a diagonal entry of B is outside (0, 1).
OuDrift var1_to_ou(const Vec3& a, const Mat3& B, double dt);

// Covariance of the one-step innovation under a Brownian driver:
// vec(Sigma_u) = (K+K)^{-1} [I - exp(-(K+K) dt)] vec(Sigma Sigma').
// Throws SingularMatrixError if the Kronecker sum is singular.
Mat3 gaussian_step_covariance(const OuParams& p, double dt);

struct StationarityReport {
    bool stationary = false;
    Vec3 eigenvalues{};  // of K; for B, the diagonal entries of B
    std::string diagnostic;
};

// Eigenvalues of a triangular K are its diagonal; all must be > 0.
StationarityReport check_stationarity_drift(const Mat3& K);

// All diagonal entries of a triangular B must lie in (0, 1).
StationarityReport check_stationarity_transition(const Mat3& B);

}  // namespace nmd
