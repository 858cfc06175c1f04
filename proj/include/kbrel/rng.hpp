#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace kbrel {

// splitmix64 finalizer; used to turn structured seed inputs into well-mixed
// 64-bit states so that nearby seeds do not produce correlated streams.
std::uint64_t mix64(std::uint64_t x);

// Folds a domain string and numeric qualifiers into a base seed.
// All sampling decisions in the project derive their seed through this so
// that a single run seed reproduces every draw.
std::uint64_t derive_seed(std::uint64_t base, std::string_view domain);
std::uint64_t derive_seed(std::uint64_t base, std::string_view domain,
                          std::uint64_t extra);
std::uint64_t derive_seed(std::uint64_t base, std::string_view domain,
                          std::string_view qualifier, std::uint64_t extra = 0);

// Deterministic RNG with portable sampling primitives. mt19937_64 is fully
// specified by the standard; the bounded-draw and shuffle algorithms are
// implemented here so outputs are identical across platforms and compilers
// (std::uniform_int_distribution and std::shuffle are not portable).
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next() { return gen_(); }

    // Unbiased draw in [0, n) via rejection sampling. n must be > 0.
    std::uint64_t next_below(std::uint64_t n);

    // Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        if (v.size() < 2) return;
        for (std::size_t i = v.size() - 1; i > 0; --i) {
            std::size_t j = static_cast<std::size_t>(next_below(i + 1));
            std::swap(v[i], v[j]);
        }
    }

    // k distinct indices drawn uniformly from [0, population) without
    // replacement (Floyd's algorithm). Order of the result is the insertion
    // order of the algorithm, deterministic for a given seed.
    std::vector<std::uint64_t> sample_indices(std::uint64_t population,
                                              std::uint64_t k);

  private:
    std::mt19937_64 gen_;
};

}  // namespace kbrel
