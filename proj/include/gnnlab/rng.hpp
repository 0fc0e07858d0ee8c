#ifndef GNNLAB_RNG_HPP
#define GNNLAB_RNG_HPP

#include <cstdint>
#include <limits>
#include <string_view>

namespace gnnlab {

/// Counter-based generator: the n-th draw is a pure function of (key, n).
///
/// Streams are derived with split(), so every (seed, purpose) pair owns an
/// independent sequence and no generator state is ever shared between
/// consumers. Satisfies UniformRandomBitGenerator, so the standard
/// <random> distributions can sit on top of it.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed);
    Rng(std::uint64_t seed, std::string_view stream);

    /// Child stream keyed by a purpose name.
    [[nodiscard]] Rng split(std::string_view stream) const;
    /// Child stream keyed by an index (per-cell, per-draw sub-seeds).
    [[nodiscard]] Rng split(std::uint64_t index) const;

    result_type operator()();

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [0, bound) without modulo bias.
    std::uint64_t below(std::uint64_t bound);
    /// Standard normal via the polar method; no cached spare value.
    double normal();

    [[nodiscard]] std::uint64_t key() const { return key_; }
    [[nodiscard]] std::uint64_t counter() const { return counter_; }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

private:
    Rng(std::uint64_t key, std::uint64_t counter, int /*raw*/) : key_(key), counter_(counter) {}

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t x);
std::uint64_t hash_name(std::string_view name);

} // namespace gnnlab

#endif // GNNLAB_RNG_HPP
