#pragma once

#include <array>
#include <cstdint>

namespace nmd {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
// Maps a 128-bit counter and a 64-bit key to four 32-bit words.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

std::uint64_t splitmix64(std::uint64_t x);

// A reproducible random stream identified by (seed, stream, path, lane).
//
// Streams with distinct identifiers never share counter values, so paths can
// be generated in any order or on any thread and produce identical draws.
// The lane separates the noise components of one path, which keeps the
// draws for component i the same whatever happens to the other components
// (common random numbers across parameter sets).
//
// Not thread-safe; give each worker its own stream.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t stream, std::uint64_t path,
                 std::uint32_t lane = 0);

    // Uniform on the open interval (0, 1) with 53 random bits.
    double uniform();

    // Standard normal by the Box-Muller transform; draws come in pairs.
    double normal();

private:
    std::uint32_t next_word();

    std::array<std::uint32_t, 2> key_{};
    std::array<std::uint32_t, 4> counter_{};
    std::array<std::uint32_t, 4> block_{};
    int pos_ = 4;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace nmd
