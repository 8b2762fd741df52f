#include <CLI11.hpp>

#include <iostream>

#include "nmd/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Non-maturing deposit model: estimation, projection, liquidity risk and stress calibration"};
    app.require_subcommand(1);

    std::string config;
    nmd::CliOverrides o;
    std::uint64_t seed = 0;
    std::size_t paths = 0;
    std::string out, family;
    unsigned threads = 0;

    struct Spec {
        const char* name;
        const char* help;
    };
    const Spec specs[] = {
        {"estimate", "fit the model to the input panel"},
        {"simulate", "project deposit volumes by Monte Carlo"},
        {"risk", "VaR, expected shortfall and term structure of liquidity"},
        {"stress", "calibrate the stressed volume noise"},
        {"report", "write a consolidated summary"},
    };
    for (const auto& s : specs) {
        CLI::App* sub = app.add_subcommand(s.name, s.help);
        sub->add_option("--config", config, "JSON run configuration")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "random seed");
        sub->add_option("--paths", paths, "number of Monte Carlo paths")->check(CLI::PositiveNumber);
        sub->add_option("--out", out, "output directory");
        sub->add_option("--family", family, "noise family")
            ->check(CLI::IsMember({"gaussian", "nig", "stressed"}));
        sub->add_option("--threads", threads, "worker threads (0: all cores)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : nmd::kExitConfig;
    }

    CLI::App* sub = app.get_subcommands().front();
    if (sub->count("--seed")) o.seed = seed;
    if (sub->count("--paths")) o.paths = paths;
    if (sub->count("--out")) o.out = out;
    if (sub->count("--family")) o.family = family;
    if (sub->count("--threads")) o.threads = threads;
    return nmd::run_command(sub->get_name(), config, o, std::cout, std::cerr);
}
