#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nmd/linalg.hpp"

namespace nmd {

enum class RateTransform { Level, Log };

std::string to_string(RateTransform t);
RateTransform parse_rate_transform(const std::string& name);

// Aligned monthly observations of (market rate, deposit rate, volume) and
// their model states X = (market rate, deposit rate or its log, log volume).
struct SeriesPanel {
    std::vector<std::string> dates;  // ISO-8601, strictly consecutive months
    std::vector<double> market_rate;  // decimal per annum
    std::vector<double> deposit_rate;  // decimal per annum, after flooring
    std::vector<double> volume;        // currency units, > 0
    std::vector<Vec3> states;
    RateTransform rate_transform = RateTransform::Log;
    std::optional<double> rate_floor;
    std::vector<std::size_t> floored_rows;  // rows where the floor was applied
    double dt = 1.0 / 12.0;

    std::size_t size() const { return states.size(); }
    std::size_t transitions() const { return states.empty() ? 0 : states.size() - 1; }

    // Panel holding only model states (synthetic data, tests).
    static SeriesPanel from_states(std::vector<Vec3> states, double dt = 1.0 / 12.0);
};

struct IngestOptions {
    RateTransform rate_transform = RateTransform::Log;
    std::optional<double> rate_floor;  // > 0 when set
    bool rates_in_percent = false;
};

// Expected header of the input CSV.
inline constexpr const char* kPanelHeader = "date,market_rate,deposit_rate,volume";

// Parses the CSV, validates the monthly grid, applies the transforms.
// Throws DataError with a specific message for: unreadable file, schema
// mismatch, unparsable field, duplicated month, missing month, unordered
// dates, non-positive volume, non-positive deposit rate under the log
// transform without a floor.
SeriesPanel ingest(const std::string& csv_path, const IngestOptions& options);
SeriesPanel ingest_stream(std::istream& in, const IngestOptions& options,
                          const std::string& source = "<stream>");

// Writes a panel in the input schema (used for the bundled synthetic data).
void write_panel_csv(const SeriesPanel& panel, std::ostream& out);

}  // namespace nmd
