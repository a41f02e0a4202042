#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace xspec {

// Identifier recorded in every output so a run can be replayed with the
// same streams. Bump the suffix whenever any sampling routine below changes.
inline constexpr std::string_view kRngAlgorithm =
    "mt19937_64+splitmix64-seeding;u01=53bit;normal=box-muller;index=rejection;shuffle=fisher-yates;v1";

std::uint64_t splitmix64(std::uint64_t x);

// Derives an independent stream seed from a master seed and a tag.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag);
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag);

// Seeded generator whose every sampling routine is defined here rather
// than by the standard library distributions, which are implementation
// defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on [0, 1).
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n), n > 0.
    std::uint64_t index(std::uint64_t n);

    double normal();
    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    template <typename T>
    void shuffle(std::span<T> values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(index(i));
            std::swap(values[i - 1], values[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace xspec
