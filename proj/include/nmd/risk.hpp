#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "nmd/simulation.hpp"

namespace nmd {

// Empirical quantile of order q in (0, 1): the smallest order statistic d
// with at least a fraction q of the sample at or below d.
double empirical_quantile(std::vector<double> sample, double q);

// Lower empirical quantile: the smallest order statistic d with at least a
// fraction 1 - alpha of the sample at or below d. Requires 0.5 < alpha < 1
// and a non-empty sample.
double lower_quantile(std::vector<double> sample, double alpha);

struct TailMean {
    double value = 0.0;
    std::size_t tail_size = 0;
    std::string diagnostic;  // set when the tail is degenerate
};

// Mean of the sample points at or below the lower quantile (the quantile
// point itself included).
TailMean tail_mean(std::vector<double> sample, double alpha);

// VaR_alpha(D(t)) as a volume level. Throws DomainError for a step off the grid.
double var_volume(const PathEnsemble& ens, std::size_t step, double alpha);

double expected_shortfall(const PathEnsemble& ens, std::size_t step, double alpha);

// M(t) = min_{s <= t} D(s), path-major, n_paths x steps.
std::vector<double> running_min(const PathEnsemble& ens);

// Values of M(t) of every path at one step.
std::vector<double> running_min_at(const std::vector<double>& m, std::size_t steps, std::size_t step);

// TSL_alpha(t) = VaR_alpha(M(t)) / D(0) for every step.
std::vector<double> tsl(const PathEnsemble& ens, double alpha);

struct RiskOptions {
    std::vector<double> alphas = {0.95, 0.99};
    double es_alpha = 0.975;

    void validate() const;
};

struct RiskReport {
    std::vector<double> grid;                   // months
    double initial_volume = 0.0;                // D(0)
    std::vector<double> expected;               // E[D(t)]
    std::vector<double> alphas;
    std::vector<std::vector<double>> var;       // [alpha][step], volume levels
    std::vector<std::vector<double>> tsl;       // [alpha][step]
    double es_alpha = 0.975;
    std::vector<double> es;                     // ES of D(t)
    std::vector<double> tsl_es;                 // ES of M(t) / D(0)
};

RiskReport risk_report(const PathEnsemble& ens, const RiskOptions& options = {});

// Table of TSL-based measures at the horizons (in steps): columns
// VaR_95(M)/D0, VaR_99(M)/D0 and ES_97.5(M)/D0.
struct TslTableRow {
    std::size_t step = 0;
    double var95 = 0.0;
    double var99 = 0.0;
    double es975 = 0.0;
};

inline const std::vector<std::size_t> kTslTableSteps = {12, 36, 60, 120};

std::vector<TslTableRow> tsl_table(const PathEnsemble& ens,
                                   const std::vector<std::size_t>& steps = kTslTableSteps);

}  // namespace nmd
