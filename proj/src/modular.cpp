#include "packnn/modular.hpp"

namespace packnn {

uint64_t pow_mod(uint64_t base, uint64_t exp, uint64_t p) {
    uint64_t acc = 1 % p;
    base %= p;
    while (exp > 0) {
        if (exp & 1) acc = mul_mod(acc, base, p);
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    return acc;
}

uint64_t inv_mod(uint64_t a, uint64_t p) {
    a %= p;
    if (a == 0) throw std::invalid_argument("inv_mod: zero has no inverse");
    return pow_mod(a, p - 2, p);
}

bool is_prime_u64(uint64_t v) {
    if (v < 2) return false;
    for (uint64_t q : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        if (v % q == 0) return v == q;
    }
    uint64_t d = v - 1;
    int r = 0;
    while ((d & 1) == 0) { d >>= 1; ++r; }
    // This witness set is deterministic for all v < 2^64.
    for (uint64_t a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        uint64_t x = pow_mod(a, d, v);
        if (x == 1 || x == v - 1) continue;
        bool composite = true;
        for (int i = 0; i < r - 1; ++i) {
            x = mul_mod(x, x, v);
            if (x == v - 1) { composite = false; break; }
        }
        if (composite) return false;
    }
    return true;
}

uint64_t find_root_of_unity(uint64_t p, uint64_t order) {
    if (!is_prime_u64(p)) throw std::invalid_argument("find_root_of_unity: modulus is not prime");
    if (!is_power_of_two(order)) throw std::invalid_argument("find_root_of_unity: order must be a power of two");
    if ((p - 1) % order != 0) throw std::invalid_argument("find_root_of_unity: order does not divide p - 1");
    if (order == 1) return 1;
    uint64_t cofactor = (p - 1) / order;
    for (uint64_t base = 2; base < p; ++base) {
        uint64_t cand = pow_mod(base, cofactor, p);
        // cand has order dividing `order`; it is primitive iff cand^(order/2) == -1.
        if (pow_mod(cand, order / 2, p) == p - 1) return cand;
    }
    throw std::invalid_argument("find_root_of_unity: no generator found");
}

}  // namespace packnn
