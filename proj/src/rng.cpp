#include "kbrel/rng.hpp"

#include <stdexcept>
#include <unordered_set>

namespace kbrel {

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

namespace {
std::uint64_t fold_bytes(std::uint64_t state, std::string_view bytes) {
    // FNV-1a over the string, mixed into the running state.
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return mix64(state ^ h);
}
}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::string_view domain) {
    return fold_bytes(mix64(base), domain);
}

std::uint64_t derive_seed(std::uint64_t base, std::string_view domain,
                          std::uint64_t extra) {
    return mix64(derive_seed(base, domain) ^ mix64(extra));
}

std::uint64_t derive_seed(std::uint64_t base, std::string_view domain,
                          std::string_view qualifier, std::uint64_t extra) {
    return mix64(fold_bytes(derive_seed(base, domain), qualifier) ^ mix64(extra));
}

std::uint64_t Rng::next_below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::next_below: n must be > 0");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = gen_();
    } while (x >= limit);
    return x % n;
}

std::vector<std::uint64_t> Rng::sample_indices(std::uint64_t population,
                                               std::uint64_t k) {
    if (k > population) {
        throw std::invalid_argument("Rng::sample_indices: k exceeds population");
    }
    std::vector<std::uint64_t> out;
    out.reserve(k);
    std::unordered_set<std::uint64_t> seen;
    for (std::uint64_t j = population - k; j < population; ++j) {
        std::uint64_t t = next_below(j + 1);
        if (seen.insert(t).second) {
            out.push_back(t);
        } else {
            seen.insert(j);
            out.push_back(j);
        }
    }
    return out;
}

}  // namespace kbrel
