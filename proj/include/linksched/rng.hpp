#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace linksched {

/// SplitMix64 finalizer; used to derive independent substream seeds.
constexpr std::uint64_t mix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Folds a key path (seed, stream id, ...) into one 64-bit seed.
constexpr std::uint64_t derive_seed(std::initializer_list<std::uint64_t> keys)
{
    std::uint64_t h = 0x6a09e667f3bcc909ULL;
    for (auto k : keys)
        h = mix64(h ^ mix64(k));
    return h;
}

/// Deterministic random stream. Bounded draws use rejection sampling on the
/// raw engine output so results do not depend on the standard library's
/// distribution implementations.
class RandomStream
{
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    /// Uniform integer on [0, bound).
    std::uint64_t below(std::uint64_t bound)
    {
        if (bound <= 1)
            return 0;
        const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
        std::uint64_t x;
        do
            x = engine_();
        while (x >= limit);
        return x % bound;
    }

    /// Uniform integer on [lo, hi].
    std::int64_t between(std::int64_t lo, std::int64_t hi)
    {
        return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
    }

private:
    std::mt19937_64 engine_;
};

} // namespace linksched
