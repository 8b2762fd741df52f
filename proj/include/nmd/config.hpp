#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nmd/estimation.hpp"
#include "nmd/levy_ou.hpp"
#include "nmd/panel.hpp"
#include "nmd/simulation.hpp"
#include "nmd/stress.hpp"

namespace nmd {

inline constexpr const char* kToolVersion = "1.0.0";

struct RunConfig {
    std::string input;       // panel CSV as written in the config
    std::string input_path;  // resolved against the config file's directory
    std::string output_dir = "out";  // not part of the config hash
    NoiseFamily noise_family = NoiseFamily::Nig;
    RateTransform rate_transform = RateTransform::Log;
    std::optional<double> rate_floor;
    bool rates_in_percent = false;
    std::uint64_t seed = 1;
    std::size_t n_paths = 100000;
    std::size_t horizon = 120;
    std::vector<double> alphas = {0.95, 0.99};
    double es_alpha = 0.975;
    StateStorage storage = StateStorage::Full;
    unsigned threads = 0;  // not part of the config hash
    FitConfig estimation;
    StressTarget stress;
    std::vector<double> rdo_chart_alphas = {0.95, 0.99, 0.999};

    // Throws ConfigError.
    void validate() const;
};

// Parses and validates a JSON configuration. Unknown keys are rejected.
// Throws ConfigError.
RunConfig parse_config(const std::string& json_text, const std::string& base_dir = ".");
RunConfig load_config(const std::string& path);

// Canonical JSON of every field except the output directory and the
// worker count.
std::string canonical_config(const RunConfig& cfg);

// FNV-1a 64 of the canonical JSON, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

}  // namespace nmd
