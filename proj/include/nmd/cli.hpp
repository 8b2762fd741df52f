#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace nmd {

enum ExitCode : int {
    kExitOk = 0,
    kExitOther = 1,
    kExitConfig = 2,
    kExitData = 3,
    kExitConvergence = 4,
};

// Command-line values that take precedence over the config file.
struct CliOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> paths;
    std::optional<std::string> out;
    std::optional<std::string> family;  // gaussian | nig | stressed
    std::optional<unsigned> threads;
};

// Runs estimate | simulate | risk | stress | report and maps failures to
// exit codes. Progress goes to `log`, diagnostics to `err`.
int run_command(const std::string& command, const std::string& config_path, const CliOverrides& overrides,
                std::ostream& log, std::ostream& err);

}  // namespace nmd
