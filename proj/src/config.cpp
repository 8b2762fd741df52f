#include "nmd/config.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "nmd/error.hpp"

namespace nmd {

using json = nlohmann::json;

namespace {

class ObjectReader {
public:
    ObjectReader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) throw ConfigError(where_ + " must be a JSON object");
    }

    void number(const char* key, double& out) {
        if (const json* v = take(key)) {
            if (!v->is_number()) fail(key, "a number");
            out = v->get<double>();
        }
    }
    template <class U>
    void count(const char* key, U& out) {
        if (const json* v = take(key)) {
            if (!v->is_number_integer() || v->get<long long>() < 0) fail(key, "a non-negative integer");
            out = static_cast<U>(v->get<unsigned long long>());
        }
    }
    void integer(const char* key, int& out) {
        if (const json* v = take(key)) {
            if (!v->is_number_integer()) fail(key, "an integer");
            out = v->get<int>();
        }
    }
    void boolean(const char* key, bool& out) {
        if (const json* v = take(key)) {
            if (!v->is_boolean()) fail(key, "true or false");
            out = v->get<bool>();
        }
    }
    void string(const char* key, std::string& out) {
        if (const json* v = take(key)) {
            if (!v->is_string()) fail(key, "a string");
            out = v->get<std::string>();
        }
    }
    void numbers(const char* key, std::vector<double>& out) {
        if (const json* v = take(key)) {
            if (!v->is_array()) fail(key, "an array of numbers");
            out.clear();
            for (const auto& e : *v) {
                if (!e.is_number()) fail(key, "an array of numbers");
                out.push_back(e.get<double>());
            }
        }
    }
    void optional_number(const char* key, std::optional<double>& out) {
        if (const json* v = take(key)) {
            if (v->is_null()) {
                out.reset();
                return;
            }
            if (!v->is_number()) fail(key, "a number or null");
            out = v->get<double>();
        }
    }
    const json* object(const char* key) { return take(key); }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + where_);
    }

private:
    const json* take(const char* key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }
    [[noreturn]] void fail(const char* key, const char* expected) const {
        throw ConfigError(where_ + "." + key + " must be " + expected);
    }

    const json& j_;
    std::string where_;
    std::set<std::string> seen_;
};

std::string resolve(const std::string& base_dir, const std::string& path) {
    if (path.empty()) return path;
    const std::filesystem::path p(path);
    if (p.is_absolute()) return path;
    return (std::filesystem::path(base_dir) / p).lexically_normal().string();
}

}  // namespace

void RunConfig::validate() const {
    if (input.empty()) throw ConfigError("config: 'input' (panel CSV path) is required");
    if (output_dir.empty()) throw ConfigError("config: 'output_dir' must not be empty");
    if (rate_floor && !(*rate_floor > 0.0)) throw ConfigError("config: 'rate_floor' must be positive");
    if (n_paths < 1) throw ConfigError("config: 'n_paths' must be >= 1");
    if (horizon < 1) throw ConfigError("config: 'horizon' must be >= 1");
    if (alphas.empty()) throw ConfigError("config: 'alphas' must not be empty");
    for (double a : alphas)
        if (!(a > 0.5 && a < 1.0)) throw ConfigError("config: 'alphas' entries must lie in (0.5, 1)");
    if (!(es_alpha > 0.5 && es_alpha < 1.0)) throw ConfigError("config: 'es_alpha' must lie in (0.5, 1)");
    for (double a : rdo_chart_alphas)
        if (!(a > 0.5 && a < 1.0)) throw ConfigError("config: 'rdo_chart_alphas' entries must lie in (0.5, 1)");
    estimation.validate();
    stress.validate();
}

RunConfig parse_config(const std::string& json_text, const std::string& base_dir) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    RunConfig c;
    ObjectReader r(j, "config");
    r.string("input", c.input);
    r.string("output_dir", c.output_dir);
    std::string family = to_string(c.noise_family);
    r.string("noise_family", family);
    c.noise_family = parse_noise_family(family);
    std::string rate = to_string(c.rate_transform);
    r.string("rate_transform", rate);
    c.rate_transform = parse_rate_transform(rate);
    std::string volume = "log";
    r.string("volume_transform", volume);
    if (volume != "log") throw ConfigError("config: 'volume_transform' must be \"log\"");
    r.optional_number("rate_floor", c.rate_floor);
    r.boolean("rates_in_percent", c.rates_in_percent);
    r.count("seed", c.seed);
    r.count("n_paths", c.n_paths);
    r.count("horizon", c.horizon);
    r.numbers("alphas", c.alphas);
    r.number("es_alpha", c.es_alpha);
    std::string storage = "full";
    r.string("storage", storage);
    if (storage == "full")
        c.storage = StateStorage::Full;
    else if (storage == "volume_only")
        c.storage = StateStorage::VolumeOnly;
    else
        throw ConfigError("config: 'storage' must be \"full\" or \"volume_only\"");
    r.count("threads", c.threads);
    r.numbers("rdo_chart_alphas", c.rdo_chart_alphas);

    if (const json* e = r.object("estimation")) {
        ObjectReader er(*e, "config.estimation");
        er.boolean("enforce_signs", c.estimation.enforce_signs);
        er.number("param_tol", c.estimation.param_tol);
        er.number("objective_tol", c.estimation.objective_tol);
        er.integer("max_evaluations", c.estimation.max_iterations);
        er.integer("restarts", c.estimation.restarts);
        er.finish();
    }
    if (const json* s = r.object("stress")) {
        ObjectReader sr(*s, "config.stress");
        sr.number("outflow_fraction", c.stress.outflow_fraction);
        sr.number("alpha", c.stress.alpha);
        sr.count("horizon", c.stress.horizon_steps);
        sr.count("mc_paths", c.stress.mc_paths);
        sr.count("confirm_paths", c.stress.confirm_paths);
        sr.number("tolerance", c.stress.tolerance);
        sr.number("search_tolerance", c.stress.search_tolerance);
        sr.integer("max_iterations", c.stress.max_iterations);
        sr.finish();
    }
    r.finish();
    c.estimation.noise_family = c.noise_family;
    c.input_path = resolve(base_dir, c.input);
    c.output_dir = resolve(base_dir, c.output_dir);
    c.validate();
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    const auto dir = std::filesystem::path(path).parent_path();
    return parse_config(ss.str(), dir.empty() ? "." : dir.string());
}

std::string canonical_config(const RunConfig& c) {
    json j;
    j["input"] = c.input;
    j["noise_family"] = to_string(c.noise_family);
    j["rate_transform"] = to_string(c.rate_transform);
    j["volume_transform"] = "log";
    j["rate_floor"] = c.rate_floor ? json(*c.rate_floor) : json(nullptr);
    j["rates_in_percent"] = c.rates_in_percent;
    j["seed"] = c.seed;
    j["n_paths"] = c.n_paths;
    j["horizon"] = c.horizon;
    j["alphas"] = c.alphas;
    j["es_alpha"] = c.es_alpha;
    j["storage"] = c.storage == StateStorage::Full ? "full" : "volume_only";
    j["rdo_chart_alphas"] = c.rdo_chart_alphas;
    j["estimation"] = {{"enforce_signs", c.estimation.enforce_signs},
                       {"param_tol", c.estimation.param_tol},
                       {"objective_tol", c.estimation.objective_tol},
                       {"max_evaluations", c.estimation.max_iterations},
                       {"restarts", c.estimation.restarts}};
    j["stress"] = {{"outflow_fraction", c.stress.outflow_fraction},
                   {"alpha", c.stress.alpha},
                   {"horizon", c.stress.horizon_steps},
                   {"mc_paths", c.stress.mc_paths},
                   {"confirm_paths", c.stress.confirm_paths},
                   {"tolerance", c.stress.tolerance},
                   {"search_tolerance", c.stress.search_tolerance},
                   {"max_iterations", c.stress.max_iterations}};
    return j.dump();
}

std::string config_hash(const RunConfig& cfg) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : canonical_config(cfg)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace nmd
