#include "nmd/panel.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "nmd/error.hpp"

namespace nmd {

std::string to_string(RateTransform t) { return t == RateTransform::Log ? "log" : "level"; }

RateTransform parse_rate_transform(const std::string& name) {
    if (name == "log") return RateTransform::Log;
    if (name == "level") return RateTransform::Level;
    throw ConfigError("unknown rate transform '" + name + "' (expected level or log)");
}

SeriesPanel SeriesPanel::from_states(std::vector<Vec3> states, double dt) {
    SeriesPanel p;
    p.states = std::move(states);
    p.dt = dt;
    return p;
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(trim(field));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string where(const std::string& source, std::size_t line) {
    return source + ":" + std::to_string(line);
}

double parse_number(const std::string& s, const std::string& column, const std::string& loc) {
    if (s.empty()) throw DataError(loc + ": missing value in column '" + column + "'");
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v))
        throw DataError(loc + ": cannot parse '" + s + "' in column '" + column + "'");
    return v;
}

// Months since year 0 for "YYYY-MM" or "YYYY-MM-DD".
int parse_month_index(const std::string& s, const std::string& loc) {
    int y = 0, m = 0, d = 1;
    char sep1 = 0, sep2 = 0;
    std::istringstream in(s);
    in >> y >> sep1 >> m;
    bool ok = !in.fail() && sep1 == '-';
    if (ok && in.peek() != EOF) {
        in >> sep2 >> d;
        ok = !in.fail() && sep2 == '-' && in.peek() == EOF;
    }
    if (!ok || m < 1 || m > 12 || d < 1 || d > 31 || y < 1000 || y > 9999)
        throw DataError(loc + ": invalid date '" + s + "' (expected YYYY-MM-DD)");
    return y * 12 + (m - 1);
}

std::string month_label(int index) {
    std::ostringstream os;
    os << index / 12 << '-' << std::setw(2) << std::setfill('0') << index % 12 + 1;
    return os.str();
}

}  // namespace

SeriesPanel ingest_stream(std::istream& in, const IngestOptions& options,
                          const std::string& source) {
    if (options.rate_floor && !(*options.rate_floor > 0.0))
        throw ConfigError("rate floor must be positive");

    std::string line;
    std::size_t line_no = 0;
    std::string header;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        header = line;
        break;
    }
    if (header.empty()) throw DataError(source + ": empty file");
    std::string normalized;
    for (const auto& f : split_csv(header)) normalized += (normalized.empty() ? "" : ",") + f;
    if (normalized != kPanelHeader)
        throw DataError(where(source, line_no) + ": schema mismatch, expected header '" +
                        std::string(kPanelHeader) + "', got '" + header + "'");

    SeriesPanel panel;
    panel.rate_transform = options.rate_transform;
    panel.rate_floor = options.rate_floor;
    const double scale = options.rates_in_percent ? 0.01 : 1.0;
    int prev_month = -1;
    std::string prev_date;

    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const std::string loc = where(source, line_no);
        const auto fields = split_csv(line);
        if (fields.size() != 4)
            throw DataError(loc + ": schema mismatch, expected 4 fields, got " +
                            std::to_string(fields.size()));

        const int month = parse_month_index(fields[0], loc);
        if (prev_month >= 0) {
            if (month == prev_month)
                throw DataError(loc + ": duplicated month " + month_label(month) + " (date " +
                                fields[0] + ")");
            if (month < prev_month)
                throw DataError(loc + ": dates not increasing (" + fields[0] + " after " +
                                prev_date + ")");
            if (month > prev_month + 1)
                throw DataError(loc + ": missing month(s) between " + prev_date + " and " +
                                fields[0]);
        }
        prev_month = month;
        prev_date = fields[0];

        const double market = scale * parse_number(fields[1], "market_rate", loc);
        double deposit = scale * parse_number(fields[2], "deposit_rate", loc);
        const double vol = parse_number(fields[3], "volume", loc);
        if (!(vol > 0.0))
            throw DataError(loc + ": non-positive volume " + fields[3] + " (log transform)");
        if (options.rate_transform == RateTransform::Log) {
            if (!options.rate_floor && !(deposit > 0.0))
                throw DataError(loc + ": non-positive deposit rate " + fields[2] +
                                " under the log transform and no rate floor configured");
            if (options.rate_floor && deposit < *options.rate_floor) {
                panel.floored_rows.push_back(panel.dates.size());
                deposit = *options.rate_floor;
            }
        }

        panel.dates.push_back(fields[0]);
        panel.market_rate.push_back(market);
        panel.deposit_rate.push_back(deposit);
        panel.volume.push_back(vol);
        const double x2 = options.rate_transform == RateTransform::Log ? std::log(deposit) : deposit;
        panel.states.push_back({market, x2, std::log(vol)});
    }
    if (panel.states.size() < 2) throw DataError(source + ": need at least two observations");
    return panel;
}

SeriesPanel ingest(const std::string& csv_path, const IngestOptions& options) {
    std::ifstream in(csv_path);
    if (!in) throw DataError("cannot open input file '" + csv_path + "'");
    return ingest_stream(in, options, csv_path);
}

void write_panel_csv(const SeriesPanel& panel, std::ostream& out) {
    out << kPanelHeader << '\n';
    out << std::setprecision(17);
    for (std::size_t i = 0; i < panel.size(); ++i) {
        out << panel.dates[i] << ',' << panel.market_rate[i] << ',' << panel.deposit_rate[i] << ','
            << panel.volume[i] << '\n';
    }
}

}  // namespace nmd
