#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

namespace gaitformer {

// Seeded generator with platform-independent draws. std::mt19937_64 output is
// fully specified by the standard; the distributions below are written out by
// hand because the standard library ones are implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n). n must be > 0.
    std::size_t below(std::size_t n);

    // Standard normal via Box-Muller.
    double normal();

    template <typename It>
    void shuffle(It first, It last) {
        const auto n = static_cast<std::size_t>(last - first);
        for (std::size_t i = n; i > 1; --i) {
            const std::size_t j = below(i);
            std::swap(first[i - 1], first[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

// 64-bit FNV-1a hash of a stream name.
std::uint64_t fnv1a64(std::string_view text);

// Seed for a named random stream: splitmix64(seed ^ fnv1a64(stream)).
// Every random stream in the project is derived from the run seed this way.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream);

} // namespace gaitformer
