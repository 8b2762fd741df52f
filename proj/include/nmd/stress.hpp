#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "nmd/error.hpp"
#include "nmd/levy_ou.hpp"
#include "nmd/panel.hpp"

namespace nmd {

struct StressTarget {
    double outflow_fraction = 0.25;
    double alpha = 0.999;
    std::size_t horizon_steps = 6;
    std::size_t mc_paths = 20000;
    std::size_t confirm_paths = 100000;
    double tolerance = 0.005;          // on the confirmed RDO-bar
    double search_tolerance = 0.001;   // stopping rule of the search
    int max_iterations = 40;

    // Throws ConfigError.
    void validate() const;
};

struct StressTrial {
    double beta = 0.0;
    double rdo_bar = 0.0;
    std::size_t paths = 0;
};

struct StressResult {
    Var1Params params;       // calibrated parameters with the stressed volume law
    NigParams stressed;      // = params.nig[2]
    double calibrated_rdo_bar = 0.0;
    double achieved_rdo_bar = 0.0;  // confirmation run
    NigMoments step_moments;
    AnnualMoments annual;
    std::vector<StressTrial> trace;  // in evaluation order
};

class StressTargetUnreachable : public ConvergenceError {
public:
    StressTargetUnreachable(const std::string& what, double extremal)
        : ConvergenceError(what), extremal_(extremal) {}
    // Largest (or, for targets below the calibrated value, smallest) RDO-bar reached.
    double extremal_rdo_bar() const { return extremal_; }

private:
    double extremal_;
};

struct RdoOptions {
    std::size_t n_paths = 20000;
    std::uint64_t seed = 0;
    unsigned threads = 0;
};

// 1 - VaR_alpha(D(t_k + h) / D(t_k)) by conditional simulation from the
// observed state at t_k, on substream k.
double rdo(const Var1Params& params, const SeriesPanel& panel, std::size_t k, std::size_t h_steps,
           double alpha, const RdoOptions& options);

// Mean of rdo over k = 0..m with m = n - h and n the number of transitions.
double rdo_bar(const Var1Params& params, const SeriesPanel& panel, std::size_t h_steps, double alpha,
               const RdoOptions& options);

// rdo_bar at several confidence levels from the same simulations.
std::vector<double> rdo_bars(const Var1Params& params, const SeriesPanel& panel, std::size_t h_steps,
                             const std::vector<double>& alphas, const RdoOptions& options);

// Searches beta_3 <= calibrated beta_3 with gamma_3 fixed and (delta_3, mu_3)
// pinned to mean 0 and variance sigma_3^2, until RDO-bar hits the target.
// All trials share the same random numbers.
StressResult stress_calibrate(const Var1Params& calibrated, const SeriesPanel& panel,
                              const StressTarget& target, std::uint64_t seed, unsigned threads = 0);

}  // namespace nmd
