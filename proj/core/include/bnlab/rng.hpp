#pragma once

#include <cstdint>
#include <random>

namespace bnlab {

// SplitMix64 step; used to derive independent substream seeds so that results
// do not depend on thread count or evaluation order.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                 std::uint64_t chunk = 0) {
    std::uint64_t s = master;
    std::uint64_t a = splitmix64(s);
    s ^= stream * 0xD1342543DE82EF95ULL + 0x2545F4914F6CDD1DULL;
    std::uint64_t b = splitmix64(s);
    s ^= chunk * 0x9E3779B97F4A7C15ULL + 0xDA942042E4DD58B5ULL;
    std::uint64_t c = splitmix64(s);
    return a ^ (b << 1) ^ (c >> 1);
}

inline std::mt19937_64 make_rng(std::uint64_t master, std::uint64_t stream,
                                std::uint64_t chunk = 0) {
    return std::mt19937_64(derive_seed(master, stream, chunk));
}

// Halton low-discrepancy point, component for prime base b, 1-based index.
inline double halton(std::uint64_t index, unsigned base) {
    double f = 1.0, r = 0.0;
    while (index > 0) {
        f /= base;
        r += f * static_cast<double>(index % base);
        index /= base;
    }
    return r;
}

inline unsigned nth_prime(unsigned i) {
    static const unsigned primes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29,
                                      31, 37, 41, 43, 47, 53, 59, 61, 67, 71};
    return primes[i % 20];
}

} // namespace bnlab
