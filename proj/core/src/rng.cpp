#include "gaensim/rng.hpp"

namespace gaensim {

uint64_t derive_seed(uint64_t master, std::string_view label, uint64_t index) {
    // FNV-1a over the label and index, mixed into the master seed with a
    // splitmix64 finalizer.
    uint64_t h = 14695981039346656037ull ^ master;
    for (char c : label) {
        h ^= static_cast<uint8_t>(c);
        h *= 1099511628211ull;
    }
    for (int i = 0; i < 8; ++i) {
        h ^= static_cast<uint8_t>(index >> (8 * i));
        h *= 1099511628211ull;
    }
    h += 0x9e3779b97f4a7c15ull;
    h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ull;
    h = (h ^ (h >> 27)) * 0x94d049bb133111ebull;
    return h ^ (h >> 31);
}

uint64_t uniform_u64(Rng& rng, uint64_t upper_exclusive) {
    if (upper_exclusive == 0) return 0;
    // Rejection sampling to avoid modulo bias.
    uint64_t limit = UINT64_MAX - UINT64_MAX % upper_exclusive;
    uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % upper_exclusive;
}

int64_t uniform_i64(Rng& rng, int64_t lo, int64_t hi_inclusive) {
    uint64_t span = static_cast<uint64_t>(hi_inclusive - lo) + 1;
    return lo + static_cast<int64_t>(uniform_u64(rng, span));
}

double uniform_real(Rng& rng, double lo, double hi) {
    double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return lo + unit * (hi - lo);
}

bool bernoulli(Rng& rng, double p) {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return uniform_real(rng, 0.0, 1.0) < p;
}

void fill_random(Rng& rng, std::span<uint8_t> out) {
    size_t i = 0;
    while (i < out.size()) {
        uint64_t x = rng();
        for (int b = 0; b < 8 && i < out.size(); ++b, ++i) {
            out[i] = static_cast<uint8_t>(x >> (8 * b));
        }
    }
}

}  // namespace gaensim
