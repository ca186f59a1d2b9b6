#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "packnn/message.hpp"
#include "packnn/ring.hpp"

namespace packnn {

enum class BackendKind { Slot, Ring };

const char* backend_name(BackendKind k);
BackendKind backend_from_name(const std::string& s);

// Shared immutable execution parameters: degree, modulus chain, depth budget,
// and which of the two value-identical backends carries the payloads.
class EvalContext {
public:
    EvalContext(BackendKind kind, uint32_t n, const std::vector<uint64_t>& primes,
                uint32_t max_depth = 8, bool corrupt_rotation = false);

    BackendKind kind() const { return kind_; }
    uint32_t n() const { return n_; }
    uint32_t half() const { return n_ / 2; }
    const CrtModulus& modulus() const { return modulus_; }
    const BigInt& capacity() const { return capacity_; }
    uint32_t max_depth() const { return max_depth_; }
    bool corrupt_rotation() const { return corrupt_rotation_; }
    const NttTables& tables(size_t prime_index) const { return tables_[prime_index]; }
    size_t prime_count() const { return modulus_.primes.size(); }

private:
    BackendKind kind_;
    uint32_t n_;
    CrtModulus modulus_;
    BigInt capacity_;
    uint32_t max_depth_;
    bool corrupt_rotation_;
    std::vector<NttTables> tables_;
};

// Counted operations over Messages. Counting lives here so both backends
// report identical tallies by construction; backends only differ in how the
// payload realizes each slot-level action.
class Evaluator {
public:
    explicit Evaluator(const EvalContext& cx) : cx_(&cx) {}

    const EvalContext& context() const { return *cx_; }
    OpCounters& counters() { return counters_; }
    const OpCounters& counters() const { return counters_; }

    // Encoding boundary: no operation counters involved.
    Message lift(std::span<const int64_t> values) const;
    Message lift_big(std::span<const BigInt> values) const;
    std::vector<BigInt> lower(const Message& m) const;

    Message add(const Message& a, const Message& b);
    Message add_plain(const Message& a, std::span<const int64_t> values);
    Message mul(const Message& a, const Message& b);
    Message mul_plain(const Message& a, std::span<const int64_t> values);
    Message mask(const Message& a, std::span<const uint8_t> bits);
    Message mul_scalar(const Message& a, int64_t s);

    // Cyclic column shift of both rows: positive k shifts right, negative
    // left; |k| < n/2. Counts one primitive rotation per set bit of |k|.
    Message rotate_columns(const Message& a, int64_t k);
    // Row swap; counts one row rotation.
    Message rotate_rows(const Message& a);
    // Arbitrary column shift counted as a single rotation, modeling a
    // dedicated rotation key for this amount.
    Message rotate_bundle(const Message& a, uint32_t amount);

    void note_live(uint64_t live) { counters_.note_live(live); }

    // Deterministic split/merge for data-parallel kernel loops.
    Evaluator fork() const { return Evaluator(*cx_); }
    void absorb(const Evaluator& child);

private:
    const EvalContext* cx_;
    OpCounters counters_;

    Message make_message(std::vector<std::vector<uint64_t>> limbs, uint32_t depth,
                         uint32_t plain_depth, BigInt magnitude) const;
    std::vector<std::vector<uint64_t>> plain_limbs(std::span<const int64_t> values) const;
    void check_magnitude(const BigInt& magnitude, const char* op) const;
    Message apply_columns_shift(const Message& a, uint32_t right_by) const;
};

}  // namespace packnn
