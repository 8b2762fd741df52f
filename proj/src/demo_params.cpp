#include "nmd/demo_params.hpp"

#include <cmath>

namespace nmd {

Var1Params demo_gaussian_params() {
    Var1Params p;
    p.family = NoiseFamily::Gaussian;
    p.a = {-0.000039, -0.114547, 0.047423};
    p.B = Mat3::from({0.988688, 0.0, 0.0, 1.734262, 0.986268, 0.0, -0.060261, 0.0, 0.996912});
    p.S = Mat3::from({1.0, 0.0, 0.0, 10.072156, 1.0, 0.0, -0.000031, 0.000004, 1.0});
    p.sigma = {0.002045, 0.055157, 0.019052};
    p.dt = kMonthlyStep;
    return p;
}

Var1Params demo_nig_params() {
    Var1Params p;
    p.family = NoiseFamily::Nig;
    p.a = {-0.000112, -0.074274, 0.062410};
    p.B = Mat3::from({0.996328, 0.0, 0.0, 1.130800, 0.992096, 0.0, -0.147520, 0.0, 0.995876});
    p.S = Mat3::from({1.0, 0.0, 0.0, 5.859505, 1.0, 0.0, -0.000246, 0.007663, 1.0});
    p.sigma = {0.002729, 0.059975, 0.019063};
    const NigParams published[3] = {
        {52.52986, -9.29901, 0.00037, 0.00007},
        {17.09158, -9.14173, 0.03709, 0.02348},
        {71.33072, 12.01585, 0.02483, -0.00424},
    };
    for (std::size_t i = 0; i < 3; ++i)
        p.nig[i] = expand_constrained({std::log(published[i].gamma()), published[i].beta, p.sigma[i]});
    p.dt = kMonthlyStep;
    return p;
}

NigParams demo_stressed_volume_law() { return {269.4450, -256.7294, 0.0027, 0.0086}; }

Vec3 demo_initial_state() { return {0.033, std::log(0.0125), std::log(7.0e5)}; }

}  // namespace nmd
