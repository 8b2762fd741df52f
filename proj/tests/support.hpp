#pragma once

// Helpers shared by the unit tests and the acceptance runner.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "nmd/levy_ou.hpp"
#include "nmd/panel.hpp"
#include "nmd/simulation.hpp"

namespace nmd::test {

inline std::string data_path(const std::string& name) { return std::string(NMD_DATA_DIR) + "/" + name; }

// One simulated path of length n as a state-only panel.
inline SeriesPanel synthetic_panel(const Var1Params& params, const Vec3& x0, std::size_t n, std::uint64_t seed,
                                   std::uint64_t stream = 0) {
    SimSpec spec;
    spec.params = params;
    spec.x0 = x0;
    spec.n_paths = 1;
    spec.horizon_steps = n - 1;
    spec.seed = seed;
    spec.stream = stream;
    spec.threads = 1;
    const PathEnsemble ens = simulate(spec);
    std::vector<Vec3> states(n);
    for (std::size_t k = 0; k < n; ++k) states[k] = {ens.state(0, k, 0), ens.state(0, k, 1), ens.state(0, k, 2)};
    return SeriesPanel::from_states(std::move(states), params.dt);
}

// Sample moments with standard errors from the empirical influence
// functions (delta method), valid whenever the eighth moment exists.
struct SampleMoments {
    double mean = 0, sd = 0, skewness = 0, excess_kurtosis = 0;
    double se_mean = 0, se_sd = 0, se_skewness = 0, se_excess_kurtosis = 0;
};

inline SampleMoments sample_moments(const std::vector<double>& x) {
    const double n = static_cast<double>(x.size());
    double mean = 0;
    for (double v : x) mean += v;
    mean /= n;
    double m2 = 0, m3 = 0, m4 = 0;
    for (double v : x) {
        const double d = v - mean, d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    SampleMoments s;
    s.mean = mean;
    s.sd = std::sqrt(m2);
    s.skewness = m3 / std::pow(m2, 1.5);
    s.excess_kurtosis = m4 / (m2 * m2) - 3.0;

    double v_sd = 0, v_skew = 0, v_kurt = 0;
    for (double v : x) {
        const double d = v - mean, d2 = d * d;
        const double if2 = d2 - m2;
        const double if3 = d2 * d - m3 - 3.0 * m2 * d;
        const double if4 = d2 * d2 - m4 - 4.0 * m3 * d;
        const double i_sd = if2 / (2.0 * s.sd);
        const double i_skew = if3 / std::pow(m2, 1.5) - 1.5 * m3 / std::pow(m2, 2.5) * if2;
        const double i_kurt = if4 / (m2 * m2) - 2.0 * m4 / (m2 * m2 * m2) * if2;
        v_sd += i_sd * i_sd;
        v_skew += i_skew * i_skew;
        v_kurt += i_kurt * i_kurt;
    }
    s.se_mean = s.sd / std::sqrt(n);
    s.se_sd = std::sqrt(v_sd) / n;
    s.se_skewness = std::sqrt(v_skew) / n;
    s.se_excess_kurtosis = std::sqrt(v_kurt) / n;
    return s;
}

}  // namespace nmd::test
