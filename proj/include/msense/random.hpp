#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace msense {

/// splitmix64 finalizer; used to derive independent substream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seeded pseudo-random source. Draws are derived from raw engine output
/// only, so a given seed yields the same sequence on every platform.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(mix64(seed)) {}

    /// Substream keyed by (master, path...). Stable under reordering of work.
    static RandomStream derive(std::uint64_t master, std::initializer_list<std::uint64_t> path)
    {
        std::uint64_t s = mix64(master);
        for (auto k : path) {
            s = mix64(s ^ mix64(k + 0x632be59bd9b4e019ULL));
        }
        return RandomStream(s);
    }

    std::uint64_t next() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// True with probability p. p <= 0 never fires, p >= 1 always fires.
    bool bernoulli(double p) { return uniform() < p; }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n)
    {
        // Lemire-style rejection keeps the draw unbiased.
        const std::uint64_t limit = (~std::uint64_t{0} - n + 1) % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x < limit);
        return x % n;
    }

private:
    std::mt19937_64 engine_;
};

} // namespace msense
