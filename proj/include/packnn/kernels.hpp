#pragma once

#include <functional>
#include <span>
#include <vector>

#include "packnn/representation.hpp"

namespace packnn {

// Plain row-major weight matrix; entries are produced on demand so large
// composite matrices never need materializing up front.
struct RowMajorWeights {
    uint64_t rows = 0;
    uint64_t cols = 0;
    std::function<int64_t(uint64_t row, uint64_t col)> at;
};

// Weights backed by an explicit matrix (rows of equal length).
RowMajorWeights weights_from(std::vector<std::vector<int64_t>> w);

// Power-of-two window a reduction over this layout must cover, from the
// slots as actually placed (the advisory pad is ignored). Layouts confined
// to slot row 0 reduce over pad_for(max slot + 1); anything touching row 1
// forces a full-message reduction.
uint64_t reduction_span(const Representation& rep, uint32_t n);

// --- exact cost models -----------------------------------------------------
// Executions must match these counter for counter; plans use them to predict.

CounterDelta dot_product_cost(uint32_t n, uint64_t span);
CounterDelta matvec_rowmajor_cost(uint32_t n, uint64_t span, uint64_t rows);
CounterDelta matvec_colmajor_cost(uint64_t cols);
CounterDelta matvec_stacked_cost(uint32_t n, uint64_t pad, uint32_t copies, uint64_t rows);
CounterDelta conv_rowmajor_cost(uint64_t maps, uint64_t windows);
CounterDelta square_cost(uint64_t messages);
CounterDelta simd_dense_cost(uint64_t nodes, uint64_t fan_in);
CounterDelta add_bias_cost(uint64_t messages);
CounterDelta mask_active_cost(uint64_t messages);

// --- kernels ---------------------------------------------------------------

// Worker threads the row-parallel kernels may use. Results and counters are
// identical for every setting; 0 and 1 both mean serial.
void set_kernel_threads(uint32_t threads);
uint32_t kernel_threads();

// One plain multiplication, then rotate-adds of sizes 1, 2, ..., span/2
// pulling sums toward slot 0 (a size of n/2 is the row swap). The exact dot
// product lands at slot 0 and fills every slot when span == n. w_by_slot is
// indexed by physical slot and must cover all n slots.
Message dot_product(Evaluator& ev, const Message& v, std::span<const int64_t> w_by_slot,
                    uint64_t span);

// One dot product per weight row against a single-message dense or
// interleaved vector, with the row's weights placed at the layout's slots
// (zeros elsewhere, which also squashes any dirty slots). Output: sparse,
// one message per row, value at slot 0, broadcast iff the span is full.
EncodedTensor matvec_rowmajor(Evaluator& ev, const EncodedTensor& x, const RowMajorWeights& W);

// Broadcast sparse input of k values: result = sum_i x_i * column_i, one
// plain multiplication per column and k-1 additions, as one dense message.
EncodedTensor matvec_colmajor(Evaluator& ev, const EncodedTensor& x, const RowMajorWeights& W);

// Stacked input filling the message with n/pad copies. Each call multiplies
// by a plain message holding one weight row per copy segment, then reduces
// toward segment ends; row c*copies + d lands at slot (d+1)*pad - 1 of call
// c's output message. Rows past the last are zero-padded, so their result
// slots are exactly zero. Non-result slots hold reduction garbage: the
// output is dirty and must be masked before combining.
EncodedTensor matvec_stacked_rowmajor(Evaluator& ev, const EncodedTensor& x,
                                      const RowMajorWeights& W);

// Weighted sum of the window messages per output map: every window position
// of a map computed at once with `windows` scalar multiplications and
// windows-1 additions. Output: one message per map, sharing the input's
// position layout.
EncodedTensor conv_rowmajor(Evaluator& ev, const EncodedTensor& x, const RowMajorWeights& W);

// Slot-wise square of every message; one ciphertext-ciphertext
// multiplication each. Representation (dirt included) is preserved.
EncodedTensor square_activation(Evaluator& ev, const EncodedTensor& x);

// Record-per-slot layout: node j = sum_i W(j, i) * feature_message_i, one
// scalar multiplication per weight. Output: one message per node.
EncodedTensor simd_dense(Evaluator& ev, const EncodedTensor& x, const RowMajorWeights& W);

// Adds plain biases with one plain addition per message: per value for
// single-message layouts, per message for sparse and record tensors.
// Broadcast sparse messages get the bias in every slot so they stay uniform.
EncodedTensor add_bias(Evaluator& ev, const EncodedTensor& x, const std::vector<int64_t>& bias);

}  // namespace packnn
