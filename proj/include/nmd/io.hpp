#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nmd/levy_ou.hpp"
#include "nmd/simulation.hpp"

namespace nmd {

struct ArtifactMeta {
    std::string tool_version;
    std::uint64_t seed = 0;
    std::string config_hash;
};

// "# tool=nmd <version> seed=<seed> config_hash=<hash>" plus a newline.
std::string csv_meta_line(const ArtifactMeta& meta);

// 17 significant digits, so that values survive a text round trip.
std::string fmt(double v);

// Fitted (or stressed) parameter set as stored on disk.
struct ParamsFile {
    ArtifactMeta meta;
    std::string label;  // gaussian, nig or stressed
    Var1Params params;
    double loglik = 0.0;            // 0 when not applicable
    std::size_t observations = 0;   // panel length
    Vec3 last_state{};              // projection start
    std::string last_date;
    std::vector<std::size_t> floored_rows;
};

// JSON document with the (a, B, S, sigma, NIG) block, the continuous-time
// (K, theta) block when B is stationary, and per-component NIG moments.
std::string params_to_json(const ParamsFile& f);
// Throws DataError on a malformed document.
ParamsFile params_from_json(const std::string& text, const std::string& source = "<params>");

// Binary log-volume ensemble:
//   8 bytes  magic "NMDENS01"
//   16 bytes tool version (NUL padded)
//   8 bytes  seed (little endian)
//   16 bytes config hash (ASCII hex)
//   8 bytes  n_paths, 8 bytes steps (horizon + 1)
//   n_paths * steps float64 log-volumes, path-major
std::string encode_ensemble(const PathEnsemble& ens, const ArtifactMeta& meta);
std::pair<PathEnsemble, ArtifactMeta> decode_ensemble(const std::string& bytes,
                                                      const std::string& source = "<ensemble>");

std::string read_file(const std::string& path);  // throws DataError

// Collects a command's outputs and publishes them together: every file is
// written to a temporary name first and renamed only once all writes have
// succeeded.
class ArtifactSet {
public:
    explicit ArtifactSet(std::string dir) : dir_(std::move(dir)) {}
    void add(const std::string& name, std::string content);
    // Returns the written paths.
    std::vector<std::string> commit();

private:
    std::string dir_;
    std::vector<std::pair<std::string, std::string>> files_;
};

}  // namespace nmd
