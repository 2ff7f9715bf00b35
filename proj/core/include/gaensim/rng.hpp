#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace gaensim {

using Rng = std::mt19937_64;

/// Derives an independent stream seed from a master seed and a label, so
/// that every subsystem draws from its own reproducible sequence.
uint64_t derive_seed(uint64_t master, std::string_view label, uint64_t index = 0);

inline Rng make_stream(uint64_t master, std::string_view label, uint64_t index = 0) {
    return Rng(derive_seed(master, label, index));
}

// std::uniform_*_distribution is implementation-defined; these keep draws
// identical across standard libraries.
uint64_t uniform_u64(Rng& rng, uint64_t upper_exclusive);
int64_t uniform_i64(Rng& rng, int64_t lo, int64_t hi_inclusive);
double uniform_real(Rng& rng, double lo, double hi);
bool bernoulli(Rng& rng, double p);

void fill_random(Rng& rng, std::span<uint8_t> out);

}  // namespace gaensim
