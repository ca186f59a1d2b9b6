#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "packnn/bigint.hpp"
#include "packnn/ring.hpp"

namespace packnn::selfcheck {

// Reference implementations kept deliberately naive and independent of the
// transform/backend code paths they are used to check.

// Negacyclic product by direct double-loop accumulation with sign folding.
std::vector<uint64_t> schoolbook_negacyclic_mul(std::span<const uint64_t> a,
                                                std::span<const uint64_t> b,
                                                uint64_t p);

// Slot-domain rotations as explicit index permutations on the 2 x (n/2) view.
std::vector<uint64_t> rotate_slots_columns(std::span<const uint64_t> slots, uint32_t k);
std::vector<uint64_t> rotate_slots_rows(std::span<const uint64_t> slots);

// Exact integer mat-vec: out[r] = sum_c W[r][c] * v[c].
std::vector<BigInt> matvec_reference(const std::vector<std::vector<int64_t>>& w,
                                     std::span<const BigInt> v);

// Exact valid-region convolution of one map over a [channels][height][width]
// image with asymmetric zero padding.
std::vector<BigInt> conv2d_reference(std::span<const BigInt> image,
                                     uint32_t channels, uint32_t height, uint32_t width,
                                     std::span<const int64_t> weights,
                                     uint32_t win_h, uint32_t win_w,
                                     uint32_t stride_y, uint32_t stride_x,
                                     uint32_t pad_top, uint32_t pad_left,
                                     uint32_t pad_bottom, uint32_t pad_right);

struct SuiteResult {
    std::string name;
    uint64_t checks = 0;
    uint64_t failures = 0;
    std::string first_failure;

    bool passed() const { return failures == 0; }
};

struct VerifyOptions {
    uint32_t n = 256;
    std::vector<uint64_t> primes;
    uint64_t trials = 200;
    uint64_t seed = 1;
    bool corrupt_rotation = false;  // negative-control hook
};

// Dual-route suites. Each pits an implementation path against an independent
// oracle; results carry check and failure counts for reporting.
SuiteResult suite_batching_homomorphism(const VerifyOptions& opt);
SuiteResult suite_rotation_oracle(const VerifyOptions& opt);
SuiteResult suite_ntt_vs_schoolbook(const VerifyOptions& opt);
SuiteResult suite_backend_agreement(const VerifyOptions& opt);
SuiteResult suite_kernel_oracles(const VerifyOptions& opt);

std::vector<SuiteResult> run_all_suites(const VerifyOptions& opt);

}  // namespace packnn::selfcheck
