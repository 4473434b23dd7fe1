#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace gt {

/// splitmix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Sub-seed for a named role: mix64(seed ^ fnv1a64(tag)).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) noexcept {
    return mix64(seed ^ fnv1a64(tag));
}

/// Counter-based word: a pure function of (seed, a, b), so any draw can be
/// regenerated without replaying a stream.
constexpr std::uint64_t counter_word(std::uint64_t seed, std::uint64_t a, std::uint64_t b) noexcept {
    return mix64(mix64(mix64(seed) ^ a) ^ (b * 0xd6e8feb86659fd93ULL));
}

/// Maps a word to a double in (0, 1], never 0 (safe for log).
inline double unit_open_left(std::uint64_t w) noexcept {
    return (static_cast<double>(w >> 11) + 1.0) * 0x1.0p-53;
}

/// Box-Muller (cosine branch) on two counter words.
double gaussian_at(std::uint64_t seed, std::uint64_t a, std::uint64_t b) noexcept;

/// The `index`-th standard normal vector of length `dim` from stream `seed`.
std::vector<float> gaussian_vector(std::uint64_t seed, std::uint64_t index, std::size_t dim);

/// Sequential splitmix64 generator for training-time sampling.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next() noexcept {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double normal() noexcept;

    /// Uniform integer in [0, n). Rejection sampling, no modulo bias.
    std::uint64_t below(std::uint64_t n) noexcept;

    template <typename T>
    void shuffle(std::span<T> items) noexcept {
        for (std::size_t i = items.size(); i > 1; --i) {
            auto j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::uint64_t state_;
};

} // namespace gt
