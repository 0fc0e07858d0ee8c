#include "gnnlab/rng.hpp"

#include <cmath>

namespace gnnlab {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t mix64(std::uint64_t x) {
    // splitmix64 finalizer
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBULL;
    x ^= x >> 31;
    return x;
}

std::uint64_t hash_name(std::string_view name) {
    std::uint64_t h = 0xCBF29CE484222325ULL; // FNV-1a
    for (unsigned char c : name) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

Rng::Rng(std::uint64_t seed) : key_(mix64(seed + kGolden)) {}

Rng::Rng(std::uint64_t seed, std::string_view stream) : Rng(seed) { key_ = mix64(key_ ^ hash_name(stream)); }

Rng Rng::split(std::string_view stream) const {
    return Rng(mix64(key_ ^ mix64(hash_name(stream))), 0, 0);
}

Rng Rng::split(std::uint64_t index) const {
    return Rng(mix64(key_ + mix64(index ^ 0xD1B54A32D192ED03ULL)), 0, 0);
}

Rng::result_type Rng::operator()() {
    return mix64(key_ + kGolden * ++counter_);
}

double Rng::uniform() {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::below(std::uint64_t bound) {
    if (bound == 0) return 0;
    const std::uint64_t limit = max() - max() % bound;
    std::uint64_t r;
    do {
        r = (*this)();
    } while (r >= limit);
    return r % bound;
}

double Rng::normal() {
    double u, v, s;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    return u * std::sqrt(-2.0 * std::log(s) / s);
}

} // namespace gnnlab
