#include "nmd/io.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "nmd/error.hpp"

namespace nmd {

using json = nlohmann::json;

std::string csv_meta_line(const ArtifactMeta& meta) {
    return "# tool=nmd " + meta.tool_version + " seed=" + std::to_string(meta.seed) +
           " config_hash=" + meta.config_hash + "\n";
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

json mat_json(const Mat3& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < 3; ++i) rows.push_back({m(i, 0), m(i, 1), m(i, 2)});
    return rows;
}

json vec_json(const Vec3& v) { return {v[0], v[1], v[2]}; }

[[noreturn]] void bad(const std::string& source, const std::string& what) {
    throw DataError(source + ": malformed parameter file (" + what + ")");
}

double num(const json& j, const char* key, const std::string& source) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_number()) bad(source, std::string("missing number '") + key + "'");
    return it->get<double>();
}

Vec3 vec_from(const json& j, const char* key, const std::string& source) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_array() || it->size() != 3) bad(source, std::string("'") + key + "' must have 3 entries");
    Vec3 v;
    for (std::size_t i = 0; i < 3; ++i) {
        if (!(*it)[i].is_number()) bad(source, std::string("'") + key + "' must be numeric");
        v[i] = (*it)[i].get<double>();
    }
    return v;
}

Mat3 mat_from(const json& j, const char* key, const std::string& source) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_array() || it->size() != 3) bad(source, std::string("'") + key + "' must be 3x3");
    Mat3 m;
    for (std::size_t i = 0; i < 3; ++i) {
        const json& row = (*it)[i];
        if (!row.is_array() || row.size() != 3) bad(source, std::string("'") + key + "' must be 3x3");
        for (std::size_t k = 0; k < 3; ++k) {
            if (!row[k].is_number()) bad(source, std::string("'") + key + "' must be numeric");
            m(i, k) = row[k].get<double>();
        }
    }
    return m;
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(const std::string& in, std::size_t pos) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
    return v;
}

void put_fixed(std::string& out, const std::string& s, std::size_t width) {
    std::string f = s.substr(0, width);
    f.resize(width, '\0');
    out += f;
}

std::string get_fixed(const std::string& in, std::size_t pos, std::size_t width) {
    std::string s = in.substr(pos, width);
    const auto end = s.find('\0');
    return end == std::string::npos ? s : s.substr(0, end);
}

constexpr char kMagic[] = "NMDENS01";
constexpr std::size_t kHeaderSize = 8 + 16 + 8 + 16 + 8 + 8;

}  // namespace

std::string params_to_json(const ParamsFile& f) {
    const Var1Params& p = f.params;
    json j;
    j["meta"] = {{"tool_version", f.meta.tool_version}, {"seed", f.meta.seed}, {"config_hash", f.meta.config_hash}};
    j["label"] = f.label;
    j["family"] = to_string(p.family);
    j["dt"] = p.dt;
    j["a"] = vec_json(p.a);
    j["B"] = mat_json(p.B);
    j["S"] = mat_json(p.S);
    j["sigma"] = vec_json(p.sigma);
    if (p.family == NoiseFamily::Nig) {
        json laws = json::array();
        for (const auto& n : p.nig) {
            const NigMoments m = nig_moments(n);
            const int per_year = static_cast<int>(std::lround(1.0 / p.dt));
            const AnnualMoments am = annualize_moments(m.skewness, m.excess_kurtosis, per_year);
            laws.push_back({{"alpha", n.alpha},
                            {"beta", n.beta},
                            {"delta", n.delta},
                            {"mu", n.mu},
                            {"gamma", n.gamma()},
                            {"skewness", m.skewness},
                            {"excess_kurtosis", m.excess_kurtosis},
                            {"annual_skewness", am.skewness},
                            {"annual_excess_kurtosis", am.excess_kurtosis}});
        }
        j["nig"] = laws;
    } else {
        j["nig"] = nullptr;
    }
    try {
        const OuDrift ou = var1_to_ou(p.a, p.B, p.dt);
        j["continuous_time"] = {{"K", mat_json(ou.K)}, {"theta", vec_json(ou.theta)}};
    } catch (const NonStationaryError& e) {
        j["continuous_time"] = {{"error", e.what()}};
    }
    j["loglik"] = f.loglik;
    j["data"] = {{"observations", f.observations},
                 {"last_date", f.last_date},
                 {"last_state", vec_json(f.last_state)},
                 {"floored_rows", f.floored_rows}};
    return j.dump(2) + "\n";
}

ParamsFile params_from_json(const std::string& text, const std::string& source) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        bad(source, e.what());
    }
    if (!j.is_object()) bad(source, "not an object");
    ParamsFile f;
    try {
        const json& meta = j.at("meta");
        f.meta.tool_version = meta.at("tool_version").get<std::string>();
        f.meta.seed = meta.at("seed").get<std::uint64_t>();
        f.meta.config_hash = meta.at("config_hash").get<std::string>();
        f.label = j.at("label").get<std::string>();
        f.params.family = parse_noise_family(j.at("family").get<std::string>());
    } catch (const json::exception& e) {
        bad(source, e.what());
    } catch (const ConfigError& e) {
        bad(source, e.what());
    }
    Var1Params& p = f.params;
    p.dt = num(j, "dt", source);
    p.a = vec_from(j, "a", source);
    p.B = mat_from(j, "B", source);
    p.S = mat_from(j, "S", source);
    p.sigma = vec_from(j, "sigma", source);
    if (p.family == NoiseFamily::Nig) {
        const json& laws = j["nig"];
        if (!laws.is_array() || laws.size() != 3) bad(source, "'nig' must list three laws");
        for (std::size_t i = 0; i < 3; ++i)
            p.nig[i] = {num(laws[i], "alpha", source), num(laws[i], "beta", source), num(laws[i], "delta", source),
                        num(laws[i], "mu", source)};
    }
    f.loglik = num(j, "loglik", source);
    try {
        const json& d = j.at("data");
        f.observations = d.at("observations").get<std::size_t>();
        f.last_date = d.at("last_date").get<std::string>();
        f.floored_rows = d.at("floored_rows").get<std::vector<std::size_t>>();
        f.last_state = vec_from(d, "last_state", source);
    } catch (const json::exception& e) {
        bad(source, e.what());
    }
    try {
        p.validate_structure();
    } catch (const DomainError& e) {
        bad(source, e.what());
    }
    return f;
}

std::string encode_ensemble(const PathEnsemble& ens, const ArtifactMeta& meta) {
    std::string out;
    out.reserve(kHeaderSize + ens.n_paths() * ens.steps() * 8);
    out.append(kMagic, 8);
    put_fixed(out, meta.tool_version, 16);
    put_u64(out, meta.seed);
    put_fixed(out, meta.config_hash, 16);
    put_u64(out, ens.n_paths());
    put_u64(out, ens.steps());
    for (std::size_t p = 0; p < ens.n_paths(); ++p)
        for (std::size_t k = 0; k < ens.steps(); ++k) {
            const double v = ens.log_volume(p, k);
            std::uint64_t bits;
            std::memcpy(&bits, &v, 8);
            put_u64(out, bits);
        }
    return out;
}

std::pair<PathEnsemble, ArtifactMeta> decode_ensemble(const std::string& bytes, const std::string& source) {
    if (bytes.size() < kHeaderSize || bytes.compare(0, 8, kMagic) != 0)
        throw DataError(source + ": not an ensemble file");
    ArtifactMeta meta;
    meta.tool_version = get_fixed(bytes, 8, 16);
    meta.seed = get_u64(bytes, 24);
    meta.config_hash = get_fixed(bytes, 32, 16);
    const std::uint64_t n_paths = get_u64(bytes, 48);
    const std::uint64_t steps = get_u64(bytes, 56);
    if (steps < 2 || n_paths < 1 || (bytes.size() - kHeaderSize) / 8 / steps != n_paths ||
        (bytes.size() - kHeaderSize) % (8 * steps) != 0)
        throw DataError(source + ": truncated or inconsistent ensemble file");
    std::vector<double> data(n_paths * steps);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const std::uint64_t bits = get_u64(bytes, kHeaderSize + 8 * i);
        std::memcpy(&data[i], &bits, 8);
    }
    return {PathEnsemble::from_data(n_paths, steps - 1, StateStorage::VolumeOnly, {false, true, true}, std::move(data)),
            meta};
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void ArtifactSet::add(const std::string& name, std::string content) {
    files_.emplace_back(name, std::move(content));
}

std::vector<std::string> ArtifactSet::commit() {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw DataError("cannot create output directory '" + dir_ + "': " + ec.message());
    const std::string suffix = ".tmp." + std::to_string(::getpid());
    std::vector<std::string> temps, finals;
    auto cleanup = [&] {
        for (const auto& t : temps) fs::remove(t, ec);
    };
    for (const auto& [name, content] : files_) {
        const std::string final_path = (fs::path(dir_) / name).string();
        const std::string tmp = final_path + suffix;
        temps.push_back(tmp);
        finals.push_back(final_path);
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.close();
        if (!out) {
            cleanup();
            throw DataError("cannot write '" + final_path + "'");
        }
    }
    // Publish: move previous versions aside, rename the new files in, and
    // roll everything back if any step fails.
    const std::string backup_suffix = ".bak." + std::to_string(::getpid());
    std::vector<bool> backed_up(finals.size(), false);
    std::size_t published = 0;
    auto rollback = [&] {
        std::error_code ignore;
        for (std::size_t i = 0; i < published; ++i) fs::remove(finals[i], ignore);
        for (std::size_t i = 0; i < finals.size(); ++i)
            if (backed_up[i]) fs::rename(finals[i] + backup_suffix, finals[i], ignore);
        cleanup();
    };
    for (std::size_t i = 0; i < finals.size(); ++i) {
        if (fs::exists(finals[i], ec)) {
            fs::rename(finals[i], finals[i] + backup_suffix, ec);
            if (ec) {
                rollback();
                throw DataError("cannot replace '" + finals[i] + "': " + ec.message());
            }
            backed_up[i] = true;
        }
    }
    for (; published < temps.size(); ++published) {
        fs::rename(temps[published], finals[published], ec);
        if (ec) {
            const std::string msg = "cannot publish '" + finals[published] + "': " + ec.message();
            rollback();
            throw DataError(msg);
        }
    }
    for (std::size_t i = 0; i < finals.size(); ++i)
        if (backed_up[i]) fs::remove(finals[i] + backup_suffix, ec);
    files_.clear();
    return finals;
}

}  // namespace nmd
