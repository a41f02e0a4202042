#include "xspec/rng.hpp"

#include <cmath>
#include <numbers>

namespace xspec {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag) {
    return splitmix64(splitmix64(master) ^ splitmix64(tag + 0x632be59bd9b4e019ULL));
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view tag) {
    // FNV-1a
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : tag) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return derive_seed(master, h);
}

double Rng::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::index(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
        std::uint64_t x = engine_();
        if (x >= threshold) return x % n;
    }
}

double Rng::normal() {
    double u1 = 0.0;
    do {
        u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace xspec
