#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "packnn/bigint.hpp"
#include "packnn/modular.hpp"

namespace packnn {

// Prime modulus paired with a ring degree n (a power of two). The congruence
// p == 1 (mod 2n) guarantees a primitive 2n-th root of unity, which is what
// makes the ring Z_p[x]/(x^n+1) split into n scalar slots.
struct PrimeModulus {
    uint64_t p = 0;
    uint32_t n = 0;

    static PrimeModulus create(uint64_t p, uint32_t n);
};

// Composite plaintext modulus: pairwise-distinct primes sharing one degree.
struct CrtModulus {
    std::vector<PrimeModulus> primes;
    BigInt composite = 0;

    static CrtModulus create(const std::vector<uint64_t>& ps, uint32_t n);

    // Largest representable magnitude under the centered signed embedding.
    BigInt capacity() const { return (composite - 1) / 2; }
    uint32_t degree() const { return primes.front().n; }
};

// Coefficient vector of a residue polynomial, length n, entries in [0, p).
struct RingElement {
    std::vector<uint64_t> coeffs;
};

// Slot values, length n, viewed as a 2 x (n/2) matrix: row b is slots
// [b*n/2, (b+1)*n/2).
struct SlotVector {
    std::vector<uint64_t> slots;
};

// Precomputed transform data for one (p, n) pair.
class NttTables {
public:
    static NttTables create(PrimeModulus pm);

    const PrimeModulus& modulus() const { return pm_; }
    uint64_t p() const { return pm_.p; }
    uint32_t n() const { return pm_.n; }
    uint64_t psi() const { return psi_; }

    // Evaluations of the polynomial at psi^(2k+1) for k = 0..n-1, natural order.
    std::vector<uint64_t> forward(std::span<const uint64_t> coeffs) const;
    std::vector<uint64_t> inverse(std::span<const uint64_t> evals) const;

    // slot index -> evaluation index under the generator-3 slot ordering:
    // slot (b, j) reads the evaluation at exponent (-1)^b * 3^j mod 2n.
    const std::vector<uint32_t>& slot_to_eval() const { return slot_to_eval_; }

private:
    PrimeModulus pm_;
    uint64_t psi_ = 0;        // primitive 2n-th root
    uint64_t omega_ = 0;      // psi^2, primitive n-th root
    uint64_t omega_inv_ = 0;
    uint64_t n_inv_ = 0;
    std::vector<uint64_t> psi_pows_;
    std::vector<uint64_t> psi_inv_pows_;
    std::vector<uint32_t> bitrev_;
    std::vector<uint32_t> slot_to_eval_;

    void dft(std::vector<uint64_t>& a, uint64_t root) const;
};

RingElement poly_mul_negacyclic(const NttTables& t, const RingElement& a, const RingElement& b);
RingElement poly_add(const NttTables& t, const RingElement& a, const RingElement& b);
RingElement poly_scale(const NttTables& t, const RingElement& a, uint64_t s);

RingElement slot_encode(const NttTables& t, const SlotVector& s);
SlotVector slot_decode(const NttTables& t, const RingElement& e);

// Applies x -> x^t for odd t in [1, 2n), folding x^n = -1 into coefficient signs.
RingElement galois_apply(const NttTables& t, const RingElement& e, uint64_t exponent);

// Cyclic right shift of both slot rows by k columns, 0 <= k < n/2.
RingElement galois_rotate_columns(const NttTables& t, const RingElement& e, uint32_t k);
// Swap of the two slot rows.
RingElement galois_rotate_rows(const NttTables& t, const RingElement& e);

// Automorphism exponents realizing the two rotations above.
uint64_t galois_exponent_columns(uint32_t n, uint32_t k);
uint64_t galois_exponent_rows(uint32_t n);

// Scalar residue CRT over pairwise-distinct primes.
std::vector<uint64_t> crt_split(const BigInt& x, std::span<const uint64_t> primes);
BigInt crt_join(std::span<const uint64_t> residues, std::span<const uint64_t> primes);

// Centered signed representative of x mod composite, in [-(c-1)/2, (c-1)/2].
BigInt center_mod(const BigInt& x, const BigInt& composite);

}  // namespace packnn
