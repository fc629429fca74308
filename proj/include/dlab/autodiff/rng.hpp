#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>

namespace dlab {

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

/// SplitMix64 finalizer; a bijection on 64-bit words.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Derives an independent seed for a named sub-stream.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label, std::uint64_t index = 0) noexcept;

/// Counter-based generator: output i is mix64(key + (i + 1) * golden).
/// Bit-identical on every platform; distributions are implemented here rather
/// than through <random>, whose distribution algorithms are unspecified.
class Rng {
public:
    explicit Rng(std::uint64_t seed) noexcept;

    /// Independent generator keyed by (this seed, label, index). Does not
    /// advance this generator.
    Rng stream(std::string_view label, std::uint64_t index = 0) const noexcept;

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t counter() const noexcept { return counter_; }

    std::uint64_t next_u64() noexcept;
    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept;
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
    /// Uniform integer on [0, n); n must be positive.
    std::uint64_t below(std::uint64_t n) noexcept;

    template <typename T>
    void shuffle(std::span<T> items) noexcept {
        for (std::size_t i = items.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::uint64_t seed_;
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace dlab
