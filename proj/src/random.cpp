#include "advhar/random.hpp"

#include <cmath>
#include <numbers>

namespace advhar {

RandomSource::RandomSource(std::uint64_t seed) : seed_(seed), engine_(seed) {}

std::uint64_t RandomSource::next_u64() { return engine_(); }

double RandomSource::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double RandomSource::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // 1 - u keeps the log argument in (0, 1].
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

std::size_t RandomSource::below(std::size_t bound) {
    // Lemire-style rejection keeps the result unbiased.
    const std::uint64_t limit = bound;
    const std::uint64_t threshold = (0 - limit) % limit;
    while (true) {
        const std::uint64_t r = engine_();
        if (r >= threshold) {
            return static_cast<std::size_t>(r % limit);
        }
    }
}

Tensor RandomSource::draw(Distribution dist, const Shape &shape) {
    Tensor out(shape);
    for (double &v : out.data()) {
        v = dist == Distribution::uniform ? uniform() : normal();
    }
    return out;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace advhar
