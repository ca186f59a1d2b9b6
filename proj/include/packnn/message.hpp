#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "packnn/bigint.hpp"

namespace packnn {

// Thrown when an operation would exceed the multiplicative depth budget.
class depth_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Thrown when a tracked magnitude bound would exceed the modulus capacity,
// i.e. the decoded integers could wrap.
class magnitude_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CounterDelta {
    uint64_t ct_ct_mul = 0;
    uint64_t ct_plain_mul = 0;
    uint64_t scalar_mul = 0;
    uint64_t mask_mul = 0;
    uint64_t add = 0;
    uint64_t rot_cols = 0;
    uint64_t rot_rows = 0;

    CounterDelta& operator+=(const CounterDelta& o) {
        ct_ct_mul += o.ct_ct_mul;
        ct_plain_mul += o.ct_plain_mul;
        scalar_mul += o.scalar_mul;
        mask_mul += o.mask_mul;
        add += o.add;
        rot_cols += o.rot_cols;
        rot_rows += o.rot_rows;
        return *this;
    }
    friend CounterDelta operator+(CounterDelta a, const CounterDelta& b) { return a += b; }
    friend bool operator==(const CounterDelta&, const CounterDelta&) = default;

    uint64_t rotations() const { return rot_cols + rot_rows; }
    std::string brief() const;
};

// Exact operation tallies plus the message-count high-water mark. The peak is
// maintained at plan-step boundaries by the executor, not inside kernels.
struct OpCounters {
    CounterDelta ops;
    uint64_t live_messages_peak = 0;

    void note_live(uint64_t live) {
        if (live > live_messages_peak) live_messages_peak = live;
    }
};

// One packed value: an opaque payload plus the bookkeeping that makes exact
// integer decoding checkable. Payload entries are per-prime length-n arrays;
// their meaning (slot values vs ring coefficients) belongs to the backend.
struct MessagePayload {
    std::vector<std::vector<uint64_t>> limbs;
};

struct Message {
    std::shared_ptr<const MessagePayload> payload;
    uint32_t depth = 0;        // ciphertext-ciphertext multiplications consumed
    uint32_t plain_depth = 0;  // plaintext multiplications consumed
    BigInt magnitude = 0;      // bound on |decoded value| in every slot
};

}  // namespace packnn
