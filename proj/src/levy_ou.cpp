#include "nmd/levy_ou.hpp"

#include <cmath>
#include <sstream>

#include "nmd/error.hpp"

namespace nmd {

std::string to_string(NoiseFamily family) {
    return family == NoiseFamily::Gaussian ? "gaussian" : "nig";
}

NoiseFamily parse_noise_family(const std::string& name) {
    if (name == "gaussian") return NoiseFamily::Gaussian;
    if (name == "nig") return NoiseFamily::Nig;
    throw ConfigError("unknown noise family '" + name + "' (expected gaussian or nig)");
}

void OuParams::validate() const {
    if (!is_lower_triangular(K)) throw DomainError("OuParams: K must be lower triangular");
    if (!is_lower_triangular(Sigma))
        throw DomainError("OuParams: Sigma must be lower triangular");
    for (std::size_t i = 0; i < 3; ++i)
        if (Sigma(i, i) != 1.0) throw DomainError("OuParams: Sigma must have a unit diagonal");
}

void Var1Params::validate_structure() const {
    if (!(dt > 0.0)) throw DomainError("Var1Params: dt must be positive");
    if (!is_lower_triangular(B)) throw DomainError("Var1Params: B must be lower triangular");
    if (!is_lower_triangular(S)) throw DomainError("Var1Params: S must be lower triangular");
    for (std::size_t i = 0; i < 3; ++i) {
        if (S(i, i) != 1.0) throw DomainError("Var1Params: S must have a unit diagonal");
        if (!(sigma[i] > 0.0) || !std::isfinite(sigma[i]))
            throw DomainError("Var1Params: sigma must be positive");
    }
    if (family == NoiseFamily::Nig)
        for (const auto& law : nig) law.validate();
}

void Var1Params::validate() const {
    validate_structure();
    if (family == NoiseFamily::Nig) {
        for (std::size_t i = 0; i < 3; ++i) {
            const NigMoments m = nig_moments(nig[i]);
            const double var = sigma[i] * sigma[i];
            if (std::abs(m.mean) > 1e-8 * sigma[i] || std::abs(m.variance - var) > 1e-8 * var) {
                std::ostringstream msg;
                msg << "Var1Params: NIG law of component " << i + 1
                    << " must have mean 0 and variance sigma^2";
                throw DomainError(msg.str());
            }
        }
    }
}

bool satisfies_sign_pattern(const Var1Params& p) {
    const std::array<std::pair<int, int>, 3> idx = {{{1, 0}, {2, 0}, {2, 1}}};
    for (std::size_t k = 0; k < 3; ++k) {
        const auto [i, j] = idx[k];
        if (p.B(i, j) * kSignPattern[k] <= 0.0) return false;
        if (p.S(i, j) * kSignPattern[k] <= 0.0) return false;
    }
    return true;
}

DriftParams ou_to_var1(const OuParams& p, double dt) {
    p.validate();
    if (!(dt > 0.0)) throw DomainError("ou_to_var1: dt must be positive");
    DriftParams d;
    d.B = expm((-dt) * p.K);
    d.a = (Mat3::identity() - d.B) * p.theta;
    return d;
}

OuDrift var1_to_ou(const Vec3& a, const Mat3& B, double dt) {
    if (!(dt > 0.0)) throw DomainError("var1_to_ou: dt must be positive");
    if (!is_lower_triangular(B)) throw DomainError("var1_to_ou: B must be lower triangular");
    const StationarityReport rep = check_stationarity_transition(B);
    if (!rep.stationary) throw NonStationaryError("var1_to_ou: " + rep.diagnostic);
    OuDrift out;
    out.K = (-1.0 / dt) * logm_lower(B);
    out.theta = solve_lower(Mat3::identity() - B, a);
    return out;
}

Mat3 gaussian_step_covariance(const OuParams& p, double dt) {
    p.validate();
    if (!(dt > 0.0)) throw DomainError("gaussian_step_covariance: dt must be positive");
    const Mat9 ks = kronecker_sum(p.K);
    const Mat9 decay = Mat9::identity() - expm((-dt) * ks);
    const Vec<9> rhs = decay * vec(p.Sigma * p.Sigma.transpose());
    const Mat3 cov = unvec(solve(ks, rhs));
    return 0.5 * (cov + cov.transpose());
}

StationarityReport check_stationarity_drift(const Mat3& K) {
    StationarityReport rep;
    rep.eigenvalues = K.diag();
    rep.stationary = is_lower_triangular(K);
    std::ostringstream msg;
    if (!rep.stationary) msg << "K is not lower triangular; ";
    for (std::size_t i = 0; i < 3; ++i) {
        if (!(K(i, i) > 0.0)) {
            rep.stationary = false;
            msg << "eigenvalue K" << i + 1 << i + 1 << " = " << K(i, i) << " is not positive; ";
        }
    }
    rep.diagnostic = rep.stationary ? "stationary" : msg.str();
    return rep;
}

StationarityReport check_stationarity_transition(const Mat3& B) {
    StationarityReport rep;
    rep.eigenvalues = B.diag();
    rep.stationary = is_lower_triangular(B);
    std::ostringstream msg;
    if (!rep.stationary) msg << "B is not lower triangular; ";
    for (std::size_t i = 0; i < 3; ++i) {
        if (!(B(i, i) > 0.0 && B(i, i) < 1.0)) {
            rep.stationary = false;
            msg << "B" << i + 1 << i + 1 << " = " << B(i, i) << " is outside (0, 1); ";
        }
    }
    rep.diagnostic = rep.stationary ? "stationary" : msg.str();
    return rep;
}

}  // namespace nmd
