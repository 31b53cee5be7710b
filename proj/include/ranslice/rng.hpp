#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace ranslice {

// Seeded pseudo-random stream. Distribution code is written out here rather
// than taken from <random> so that sequences do not depend on the standard
// library implementation.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    // Independent stream derived from a run seed and a stream name
    // ("mobility", "fading", "agent.intra.E.explore", ...).
    static Rng stream(std::uint64_t seed, std::string_view name);

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Unbiased integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n);

    double normal();

private:
    std::mt19937_64 engine_;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace ranslice
