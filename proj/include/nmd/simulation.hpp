#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "nmd/levy_ou.hpp"

namespace nmd {

enum class StateStorage {
    Full,        // n_paths x (horizon + 1) x 3
    VolumeOnly,  // n_paths x (horizon + 1), log-volume only
};

struct SimSpec {
    Var1Params params;
    Vec3 x0{};
    std::size_t n_paths = 100000;
    std::size_t horizon_steps = 120;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    // true: the state component is the log of the observable level.
    // The volume component is always logged.
    std::array<bool, 3> log_transform = {false, true, true};
    bool noise_free = false;
    StateStorage storage = StateStorage::Full;
    unsigned threads = 0;  // 0: hardware concurrency

    // Throws DomainError.
    void validate() const;
};

struct SimDiagnostics {
    bool stationary = true;
    std::string message;
};

class PathEnsemble {
public:
    PathEnsemble(std::size_t n_paths, std::size_t horizon, StateStorage storage,
                 std::array<bool, 3> log_transform);

    std::size_t n_paths() const { return n_paths_; }
    std::size_t horizon() const { return horizon_; }
    std::size_t steps() const { return horizon_ + 1; }
    StateStorage storage() const { return storage_; }
    const std::array<bool, 3>& log_transform() const { return log_transform_; }
    const SimDiagnostics& diagnostics() const { return diagnostics_; }

    // Month index of each step, 0..horizon.
    std::vector<double> grid() const;

    // Throws DomainError for a component that is not stored.
    double state(std::size_t path, std::size_t step, std::size_t component) const;
    double log_volume(std::size_t path, std::size_t step) const;
    // D = exp(X3).
    double volume(std::size_t path, std::size_t step) const;
    // Observable value of a component: exp(X) for logged components.
    double level(std::size_t path, std::size_t step, std::size_t component) const;

    // Volumes of all paths at one step. Throws DomainError for a step off the grid.
    std::vector<double> volumes_at(std::size_t step) const;

    // Raw storage, path-major.
    const std::vector<double>& data() const { return data_; }

    // Rebuilds an ensemble from raw storage (deserialization).
    static PathEnsemble from_data(std::size_t n_paths, std::size_t horizon, StateStorage storage,
                                  std::array<bool, 3> log_transform, std::vector<double> data);

private:
    friend PathEnsemble simulate(const SimSpec& spec);
    std::size_t index(std::size_t path, std::size_t step) const;

    std::size_t n_paths_;
    std::size_t horizon_;
    StateStorage storage_;
    std::array<bool, 3> log_transform_;
    std::vector<double> data_;
    SimDiagnostics diagnostics_;
};

// Iterates X_{k+1} = a + B X_k + S eps_k from x0. Path p draws component i
// from the stream (seed, spec.stream, p, lane i), so the ensemble does not
// depend on the worker count and component draws are shared across
// parameter sets with the same seed.
PathEnsemble simulate(const SimSpec& spec);

// Samples D(t + h) / D(t) = exp(X3(t + h) - X3(t)) from the state x_t.
// Uses the same substreams as simulate with spec.stream = stream.
std::vector<double> conditional_simulate(const Var1Params& params, const Vec3& x_t,
                                         std::size_t h_steps, std::size_t n_paths,
                                         std::uint64_t seed, std::uint64_t stream = 0,
                                         unsigned threads = 0, bool noise_free = false);

// Resolves a requested worker count (0 = hardware concurrency, at least 1).
unsigned resolve_threads(unsigned requested);

// Runs body(begin, end) over [0, n) split into contiguous chunks, one per worker.
void parallel_for(std::size_t n, unsigned threads,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace nmd
