// Writes a synthetic monthly panel simulated from the demo NIG parameters.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "nmd/demo_params.hpp"
#include "nmd/panel.hpp"
#include "nmd/simulation.hpp"

namespace {

std::string month_end(int year, int month) {
    static const int days[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    int d = days[month - 1];
    if (month == 2 && ((year % 4 == 0 && year % 100 != 0) || year % 400 == 0)) d = 29;
    std::ostringstream os;
    os << year << '-' << std::setw(2) << std::setfill('0') << month << '-' << std::setw(2) << d;
    return os.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generate the synthetic deposit panel"};
    std::string out = "data/synthetic_panel.csv";
    std::uint64_t seed = 20210331;
    std::size_t rows = 231;
    int start_year = 2002;
    app.add_option("--out", out, "output CSV path");
    app.add_option("--seed", seed, "random seed");
    app.add_option("--rows", rows, "number of monthly observations")->check(CLI::Range(2, 100000));
    app.add_option("--start-year", start_year, "first year (January)");
    CLI11_PARSE(app, argc, argv);

    nmd::SimSpec spec;
    spec.params = nmd::demo_nig_params();
    spec.x0 = nmd::demo_initial_state();
    spec.n_paths = 1;
    spec.horizon_steps = rows - 1;
    spec.seed = seed;
    spec.threads = 1;
    const nmd::PathEnsemble ens = nmd::simulate(spec);

    nmd::SeriesPanel panel;
    for (std::size_t k = 0; k < rows; ++k) {
        const int m = static_cast<int>(k);
        panel.dates.push_back(month_end(start_year + m / 12, m % 12 + 1));
        panel.market_rate.push_back(ens.state(0, k, 0));
        panel.deposit_rate.push_back(std::exp(ens.state(0, k, 1)));
        panel.volume.push_back(std::exp(ens.state(0, k, 2)));
        panel.states.push_back({ens.state(0, k, 0), ens.state(0, k, 1), ens.state(0, k, 2)});
    }

    std::ofstream file(out);
    if (!file) {
        std::cerr << "cannot write " << out << '\n';
        return 1;
    }
    file << "# synthetic panel, seed " << seed << ", rates in decimals, volume in EUR millions\n";
    nmd::write_panel_csv(panel, file);
    return 0;
}
