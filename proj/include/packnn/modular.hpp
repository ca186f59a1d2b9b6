#pragma once

#include <cstdint>
#include <stdexcept>

namespace packnn {

inline uint64_t add_mod(uint64_t a, uint64_t b, uint64_t p) {
    uint64_t s = a + b;
    return s >= p ? s - p : s;
}

inline uint64_t sub_mod(uint64_t a, uint64_t b, uint64_t p) {
    return a >= b ? a - b : a + p - b;
}

inline uint64_t neg_mod(uint64_t a, uint64_t p) {
    return a == 0 ? 0 : p - a;
}

inline uint64_t mul_mod(uint64_t a, uint64_t b, uint64_t p) {
    return static_cast<uint64_t>(static_cast<unsigned __int128>(a) * b % p);
}

uint64_t pow_mod(uint64_t base, uint64_t exp, uint64_t p);

// Inverse of a modulo p for prime p; throws std::invalid_argument when a == 0 (mod p).
uint64_t inv_mod(uint64_t a, uint64_t p);

// Deterministic Miller-Rabin, valid for all 64-bit inputs.
bool is_prime_u64(uint64_t v);

// Smallest-witness primitive root of unity of the given power-of-two order in Z_p.
// Requires order | p - 1; throws std::invalid_argument otherwise or when p is not prime.
uint64_t find_root_of_unity(uint64_t p, uint64_t order);

inline bool is_power_of_two(uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

// floor(log2(v)) for v > 0.
inline uint32_t log2_exact(uint64_t v) {
    uint32_t r = 0;
    while (v > 1) { v >>= 1; ++r; }
    return r;
}

}  // namespace packnn
