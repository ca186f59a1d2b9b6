#include "packnn/ring.hpp"

#include <algorithm>
#include <stdexcept>

namespace packnn {

PrimeModulus PrimeModulus::create(uint64_t p, uint32_t n) {
    if (!is_power_of_two(n) || n < 2) throw std::invalid_argument("PrimeModulus: n must be a power of two >= 2");
    if (!is_prime_u64(p)) throw std::invalid_argument("PrimeModulus: p is not prime");
    if ((p - 1) % (2ull * n) != 0) throw std::invalid_argument("PrimeModulus: p != 1 (mod 2n)");
    return PrimeModulus{p, n};
}

CrtModulus CrtModulus::create(const std::vector<uint64_t>& ps, uint32_t n) {
    if (ps.empty()) throw std::invalid_argument("CrtModulus: empty prime list");
    CrtModulus m;
    m.composite = 1;
    for (uint64_t p : ps) {
        for (const auto& prev : m.primes) {
            if (prev.p == p) throw std::invalid_argument("CrtModulus: repeated prime");
        }
        m.primes.push_back(PrimeModulus::create(p, n));
        m.composite *= p;
    }
    return m;
}

NttTables NttTables::create(PrimeModulus pm) {
    NttTables t;
    t.pm_ = pm;
    uint32_t n = pm.n;
    t.psi_ = find_root_of_unity(pm.p, 2ull * n);
    t.omega_ = mul_mod(t.psi_, t.psi_, pm.p);
    t.omega_inv_ = inv_mod(t.omega_, pm.p);
    t.n_inv_ = inv_mod(n, pm.p);

    t.psi_pows_.resize(n);
    t.psi_inv_pows_.resize(n);
    uint64_t psi_inv = inv_mod(t.psi_, pm.p);
    uint64_t a = 1, b = 1;
    for (uint32_t i = 0; i < n; ++i) {
        t.psi_pows_[i] = a;
        t.psi_inv_pows_[i] = b;
        a = mul_mod(a, t.psi_, pm.p);
        b = mul_mod(b, psi_inv, pm.p);
    }

    t.bitrev_.resize(n);
    uint32_t bits = log2_exact(n);
    for (uint32_t i = 0; i < n; ++i) {
        uint32_t r = 0;
        for (uint32_t j = 0; j < bits; ++j) r |= ((i >> j) & 1u) << (bits - 1 - j);
        t.bitrev_[i] = r;
    }

    // Slot (b, j) evaluates at exponent (-1)^b * 3^j mod 2n; evaluation k holds
    // exponent 2k+1, so the slot map is ((e - 1) / 2).
    uint32_t half = n / 2;
    uint64_t two_n = 2ull * n;
    t.slot_to_eval_.resize(n);
    uint64_t g = 1;  // 3^j mod 2n
    for (uint32_t j = 0; j < half; ++j) {
        uint64_t e0 = g;
        uint64_t e1 = two_n - g;
        t.slot_to_eval_[j] = static_cast<uint32_t>((e0 - 1) / 2);
        t.slot_to_eval_[half + j] = static_cast<uint32_t>((e1 - 1) / 2);
        g = g * 3 % two_n;
    }
    return t;
}

void NttTables::dft(std::vector<uint64_t>& a, uint64_t root) const {
    // Iterative Cooley-Tukey: bit-reversed input, natural-order output
    // X[k] = sum_i a[i] * root^(ik).
    uint32_t n = pm_.n;
    uint64_t p = pm_.p;
    for (uint32_t i = 0; i < n; ++i) {
        uint32_t r = bitrev_[i];
        if (i < r) std::swap(a[i], a[r]);
    }
    for (uint32_t len = 2; len <= n; len <<= 1) {
        uint64_t wn = pow_mod(root, n / len, p);
        for (uint32_t blk = 0; blk < n; blk += len) {
            uint64_t w = 1;
            for (uint32_t i = 0; i < len / 2; ++i) {
                uint64_t u = a[blk + i];
                uint64_t v = mul_mod(a[blk + i + len / 2], w, p);
                a[blk + i] = add_mod(u, v, p);
                a[blk + i + len / 2] = sub_mod(u, v, p);
                w = mul_mod(w, wn, p);
            }
        }
    }
}

std::vector<uint64_t> NttTables::forward(std::span<const uint64_t> coeffs) const {
    uint32_t n = pm_.n;
    if (coeffs.size() != n) throw std::invalid_argument("ntt forward: bad length");
    std::vector<uint64_t> a(n);
    for (uint32_t i = 0; i < n; ++i) a[i] = mul_mod(coeffs[i], psi_pows_[i], pm_.p);
    dft(a, omega_);
    return a;
}

std::vector<uint64_t> NttTables::inverse(std::span<const uint64_t> evals) const {
    uint32_t n = pm_.n;
    if (evals.size() != n) throw std::invalid_argument("ntt inverse: bad length");
    std::vector<uint64_t> a(evals.begin(), evals.end());
    dft(a, omega_inv_);
    for (uint32_t i = 0; i < n; ++i) {
        a[i] = mul_mod(mul_mod(a[i], n_inv_, pm_.p), psi_inv_pows_[i], pm_.p);
    }
    return a;
}

RingElement poly_mul_negacyclic(const NttTables& t, const RingElement& a, const RingElement& b) {
    auto ea = t.forward(a.coeffs);
    auto eb = t.forward(b.coeffs);
    for (uint32_t i = 0; i < t.n(); ++i) ea[i] = mul_mod(ea[i], eb[i], t.p());
    return RingElement{t.inverse(ea)};
}

RingElement poly_add(const NttTables& t, const RingElement& a, const RingElement& b) {
    RingElement r;
    r.coeffs.resize(t.n());
    for (uint32_t i = 0; i < t.n(); ++i) r.coeffs[i] = add_mod(a.coeffs[i], b.coeffs[i], t.p());
    return r;
}

RingElement poly_scale(const NttTables& t, const RingElement& a, uint64_t s) {
    RingElement r;
    r.coeffs.resize(t.n());
    for (uint32_t i = 0; i < t.n(); ++i) r.coeffs[i] = mul_mod(a.coeffs[i], s, t.p());
    return r;
}

RingElement slot_encode(const NttTables& t, const SlotVector& s) {
    if (s.slots.size() != t.n()) throw std::invalid_argument("slot_encode: bad length");
    std::vector<uint64_t> evals(t.n());
    const auto& map = t.slot_to_eval();
    for (uint32_t i = 0; i < t.n(); ++i) evals[map[i]] = s.slots[i];
    return RingElement{t.inverse(evals)};
}

SlotVector slot_decode(const NttTables& t, const RingElement& e) {
    auto evals = t.forward(e.coeffs);
    SlotVector s;
    s.slots.resize(t.n());
    const auto& map = t.slot_to_eval();
    for (uint32_t i = 0; i < t.n(); ++i) s.slots[i] = evals[map[i]];
    return s;
}

RingElement galois_apply(const NttTables& t, const RingElement& e, uint64_t exponent) {
    uint32_t n = t.n();
    uint64_t two_n = 2ull * n;
    if (exponent % 2 == 0 || exponent >= two_n) throw std::invalid_argument("galois_apply: exponent must be odd in [1, 2n)");
    RingElement r;
    r.coeffs.assign(n, 0);
    for (uint32_t i = 0; i < n; ++i) {
        uint64_t idx = static_cast<uint64_t>(i) * exponent % two_n;
        uint64_t c = e.coeffs[i];
        if (idx < n) {
            r.coeffs[idx] = c;
        } else {
            r.coeffs[idx - n] = neg_mod(c, t.p());
        }
    }
    return r;
}

uint64_t galois_exponent_columns(uint32_t n, uint32_t k) {
    uint32_t half = n / 2;
    if (k >= half) throw std::invalid_argument("galois_exponent_columns: k out of range");
    uint64_t two_n = 2ull * n;
    // Right shift by k is the automorphism by 3^(-k) = 3^(ord - k), ord = n/2.
    uint64_t e = 1;
    uint64_t steps = (half - k) % half;
    for (uint64_t s = 0; s < steps; ++s) e = e * 3 % two_n;
    return e;
}

uint64_t galois_exponent_rows(uint32_t n) { return 2ull * n - 1; }

RingElement galois_rotate_columns(const NttTables& t, const RingElement& e, uint32_t k) {
    if (k == 0) return e;
    return galois_apply(t, e, galois_exponent_columns(t.n(), k));
}

RingElement galois_rotate_rows(const NttTables& t, const RingElement& e) {
    return galois_apply(t, e, galois_exponent_rows(t.n()));
}

std::vector<uint64_t> crt_split(const BigInt& x, std::span<const uint64_t> primes) {
    std::vector<uint64_t> r(primes.size());
    for (size_t i = 0; i < primes.size(); ++i) {
        BigInt m = x % primes[i];
        if (m < 0) m += primes[i];
        r[i] = static_cast<uint64_t>(m);
    }
    return r;
}

BigInt crt_join(std::span<const uint64_t> residues, std::span<const uint64_t> primes) {
    if (residues.size() != primes.size() || primes.empty()) throw std::invalid_argument("crt_join: size mismatch");
    for (size_t i = 0; i < primes.size(); ++i) {
        if (!is_prime_u64(primes[i])) throw std::invalid_argument("crt_join: nonprime modulus");
        for (size_t j = i + 1; j < primes.size(); ++j) {
            if (primes[i] == primes[j]) throw std::invalid_argument("crt_join: repeated prime");
        }
    }
    // Garner-style incremental reconstruction.
    BigInt x = residues[0];
    BigInt m = primes[0];
    for (size_t i = 1; i < primes.size(); ++i) {
        uint64_t p = primes[i];
        uint64_t m_mod_p = static_cast<uint64_t>(m % p);
        uint64_t x_mod_p = static_cast<uint64_t>(x % p);
        uint64_t delta = sub_mod(residues[i], x_mod_p, p);
        uint64_t k = mul_mod(delta, inv_mod(m_mod_p, p), p);
        x += m * k;
        m *= p;
    }
    return x;
}

BigInt center_mod(const BigInt& x, const BigInt& composite) {
    BigInt m = x % composite;
    if (m < 0) m += composite;
    if (m > (composite - 1) / 2) m -= composite;
    return m;
}

}  // namespace packnn
