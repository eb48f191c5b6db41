#pragma once

#include "advhar/tensor.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace advhar {

enum class Distribution { uniform, standard_normal };

/// Seeded 64-bit generator. Floating-point conversions are done here rather than
/// through <random> distributions so sequences are identical on every standard library.
class RandomSource {
  public:
    explicit RandomSource(std::uint64_t seed = 0);

    std::uint64_t seed() const noexcept { return seed_; }

    std::uint64_t next_u64();
    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    /// Box-Muller; the second variate of each pair is cached.
    double normal();
    /// Uniform integer in [0, bound).
    std::size_t below(std::size_t bound);

    Tensor draw(Distribution dist, const Shape &shape);

    template <typename T>
    void shuffle(std::vector<T> &items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::swap(items[i - 1], items[below(i)]);
        }
    }

  private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// SplitMix64 finalizer; used to derive independent child seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace advhar
