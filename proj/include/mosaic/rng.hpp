#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace mosaic {

/// SplitMix64: small, fast, seedable bit generator (UniformRandomBitGenerator).
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit SplitMix64(std::uint64_t seed = 0) noexcept : state_(seed) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

using Rng = SplitMix64;

/// Mixes a stream tag into a seed so that independent consumers of one seed decorrelate.
[[nodiscard]] inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) noexcept {
    SplitMix64 g(seed ^ (tag * 0xd1b54a32d192ed03ULL));
    g();
    return g();
}

[[nodiscard]] inline double uniform(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

[[nodiscard]] inline double gaussian(Rng& rng, double sigma) {
    if (sigma == 0) return 0.0;
    return std::normal_distribution<double>(0.0, sigma)(rng);
}

[[nodiscard]] inline std::size_t uniform_index(Rng& rng, std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

}  // namespace mosaic
