#include "gt/rng.hpp"

#include <cmath>
#include <numbers>

namespace gt {

double gaussian_at(std::uint64_t seed, std::uint64_t a, std::uint64_t b) noexcept {
    double u1 = unit_open_left(counter_word(seed, a, 2 * b));
    double u2 = unit_open_left(counter_word(seed, a, 2 * b + 1));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<float> gaussian_vector(std::uint64_t seed, std::uint64_t index, std::size_t dim) {
    std::vector<float> out(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        out[i] = static_cast<float>(gaussian_at(seed, index, i));
    }
    return out;
}

double SplitMix64::normal() noexcept {
    double u1 = unit_open_left(next());
    double u2 = unit_open_left(next());
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t SplitMix64::below(std::uint64_t n) noexcept {
    if (n <= 1) {
        return 0;
    }
    std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t w;
    do {
        w = next();
    } while (w >= limit);
    return w % n;
}

} // namespace gt
