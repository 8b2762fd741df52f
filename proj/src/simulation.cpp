#include "nmd/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <thread>

#include "nmd/error.hpp"
#include "nmd/rng.hpp"

namespace nmd {

namespace {

// Draws eps(t_k) component by component, each from its own lane.
class NoiseSource {
public:
    NoiseSource(const Var1Params& p, bool noise_free) : family_(p.family), sigma_(p.sigma), off_(noise_free) {
        if (family_ == NoiseFamily::Nig)
            for (std::size_t i = 0; i < 3; ++i) samplers_[i].emplace(p.nig[i]);
    }

    double draw(std::size_t i, RandomStream& rng) const {
        if (off_) return 0.0;
        if (family_ == NoiseFamily::Nig) return (*samplers_[i])(rng);
        return sigma_[i] * rng.normal();
    }

private:
    NoiseFamily family_;
    Vec3 sigma_;
    bool off_;
    std::array<std::optional<NigSampler>, 3> samplers_;
};

struct PathStreams {
    std::array<RandomStream, 3> lanes;
    PathStreams(std::uint64_t seed, std::uint64_t stream, std::uint64_t path)
        : lanes{RandomStream(seed, stream, path, 0), RandomStream(seed, stream, path, 1),
                RandomStream(seed, stream, path, 2)} {}
};

inline Vec3 step(const Var1Params& p, const Vec3& x, const Vec3& eps) {
    return p.a + p.B * x + p.S * eps;
}

}  // namespace

void SimSpec::validate() const {
    params.validate_structure();
    if (n_paths < 1) throw DomainError("SimSpec: n_paths must be >= 1");
    if (horizon_steps < 1) throw DomainError("SimSpec: horizon_steps must be >= 1");
    if (!log_transform[2]) throw DomainError("SimSpec: the volume component must be log-transformed");
    for (double v : x0)
        if (!std::isfinite(v)) throw DomainError("SimSpec: x0 must be finite");
}

PathEnsemble::PathEnsemble(std::size_t n_paths, std::size_t horizon, StateStorage storage,
                           std::array<bool, 3> log_transform)
    : n_paths_(n_paths), horizon_(horizon), storage_(storage), log_transform_(log_transform) {
    const std::size_t width = storage == StateStorage::Full ? 3 : 1;
    data_.assign(n_paths * (horizon + 1) * width, 0.0);
}

PathEnsemble PathEnsemble::from_data(std::size_t n_paths, std::size_t horizon, StateStorage storage,
                                     std::array<bool, 3> log_transform, std::vector<double> data) {
    PathEnsemble e(0, horizon, storage, log_transform);
    const std::size_t width = storage == StateStorage::Full ? 3 : 1;
    if (data.size() != n_paths * (horizon + 1) * width)
        throw DomainError("PathEnsemble: data size does not match the dimensions");
    e.n_paths_ = n_paths;
    e.data_ = std::move(data);
    return e;
}

std::vector<double> PathEnsemble::grid() const {
    std::vector<double> g(steps());
    for (std::size_t k = 0; k < g.size(); ++k) g[k] = static_cast<double>(k);
    return g;
}

std::size_t PathEnsemble::index(std::size_t path, std::size_t step) const {
    if (path >= n_paths_) throw DomainError("PathEnsemble: path index out of range");
    if (step > horizon_) throw DomainError("PathEnsemble: step " + std::to_string(step) + " is off the grid");
    return path * (horizon_ + 1) + step;
}

double PathEnsemble::state(std::size_t path, std::size_t step, std::size_t component) const {
    if (component > 2) throw DomainError("PathEnsemble: component index out of range");
    const std::size_t i = index(path, step);
    if (storage_ == StateStorage::Full) return data_[3 * i + component];
    if (component != 2) throw DomainError("PathEnsemble: only log-volumes are stored");
    return data_[i];
}

double PathEnsemble::log_volume(std::size_t path, std::size_t step) const { return state(path, step, 2); }

double PathEnsemble::volume(std::size_t path, std::size_t step) const {
    return std::exp(log_volume(path, step));
}

double PathEnsemble::level(std::size_t path, std::size_t step, std::size_t component) const {
    const double x = state(path, step, component);
    return log_transform_[component] ? std::exp(x) : x;
}

std::vector<double> PathEnsemble::volumes_at(std::size_t step) const {
    if (step > horizon_) throw DomainError("PathEnsemble: step " + std::to_string(step) + " is off the grid");
    std::vector<double> v(n_paths_);
    for (std::size_t p = 0; p < n_paths_; ++p) v[p] = volume(p, step);
    return v;
}

unsigned resolve_threads(unsigned requested) {
    if (requested > 0) return requested;
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, unsigned threads,
                  const std::function<void(std::size_t, std::size_t)>& body) {
    const std::size_t workers = std::min<std::size_t>(resolve_threads(threads), std::max<std::size_t>(n, 1));
    if (workers <= 1) {
        body(0, n);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = std::min(n, w * chunk);
        const std::size_t end = std::min(n, begin + chunk);
        pool.emplace_back([&, w, begin, end] {
            try {
                body(begin, end);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

PathEnsemble simulate(const SimSpec& spec) {
    spec.validate();
    PathEnsemble ens(spec.n_paths, spec.horizon_steps, spec.storage, spec.log_transform);
    const auto report = check_stationarity_transition(spec.params.B);
    ens.diagnostics_.stationary = report.stationary;
    if (!report.stationary) ens.diagnostics_.message = "explosive projection: " + report.diagnostic;

    const NoiseSource noise(spec.params, spec.noise_free);
    const std::size_t width = spec.storage == StateStorage::Full ? 3 : 1;
    const std::size_t row = (spec.horizon_steps + 1) * width;
    double* out = ens.data_.data();

    parallel_for(spec.n_paths, spec.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t path = begin; path < end; ++path) {
            PathStreams rng(spec.seed, spec.stream, path);
            double* dst = out + path * row;
            Vec3 x = spec.x0;
            auto store = [&](std::size_t k) {
                if (width == 3) {
                    for (std::size_t i = 0; i < 3; ++i) dst[3 * k + i] = x[i];
                } else {
                    dst[k] = x[2];
                }
            };
            store(0);
            for (std::size_t k = 1; k <= spec.horizon_steps; ++k) {
                Vec3 eps;
                for (std::size_t i = 0; i < 3; ++i) eps[i] = noise.draw(i, rng.lanes[i]);
                x = step(spec.params, x, eps);
                store(k);
            }
        }
    });
    return ens;
}

std::vector<double> conditional_simulate(const Var1Params& params, const Vec3& x_t, std::size_t h_steps,
                                         std::size_t n_paths, std::uint64_t seed, std::uint64_t stream,
                                         unsigned threads, bool noise_free) {
    params.validate_structure();
    std::vector<double> ratio(n_paths, 1.0);
    if (h_steps == 0) return ratio;
    const NoiseSource noise(params, noise_free);
    parallel_for(n_paths, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t path = begin; path < end; ++path) {
            PathStreams rng(seed, stream, path);
            Vec3 x = x_t;
            for (std::size_t k = 0; k < h_steps; ++k) {
                Vec3 eps;
                for (std::size_t i = 0; i < 3; ++i) eps[i] = noise.draw(i, rng.lanes[i]);
                x = step(params, x, eps);
            }
            ratio[path] = std::exp(x[2] - x_t[2]);
        }
    });
    return ratio;
}

}  // namespace nmd
