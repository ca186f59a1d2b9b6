#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "packnn/bigint.hpp"
#include "packnn/representation.hpp"

namespace packnn {

// Extent of a value tensor: channels x height x width. Flat indexing is
// channel-major, c*h*w + y*w + x. Dense outputs use {count, 1, 1}.
struct Shape3 {
    uint32_t c = 1, h = 1, w = 1;
    uint64_t values() const { return static_cast<uint64_t>(c) * h * w; }
    friend bool operator==(const Shape3&, const Shape3&) = default;
};

enum class LayerKind { Conv, AvgPool, Dense, Square, Softmax };

// One layer of a network description. Conv weights: one row per output map
// over the window volume in tap order (channel, dy, dx); Dense weights: one
// row per output over the flattened channel-major input. AvgPool divides by
// the window area. Softmax is an inference no-op allowed only at the end.
// An empty bias means zero.
struct LayerSpec {
    LayerKind kind = LayerKind::Dense;
    uint32_t win_h = 1, win_w = 1;
    uint32_t stride_h = 1, stride_w = 1;
    uint32_t pad_top = 0, pad_left = 0, pad_bottom = 0, pad_right = 0;
    uint32_t maps = 0;
    std::vector<std::vector<double>> weights;
    std::vector<double> bias;
};

LayerSpec conv_spec(uint32_t win_h, uint32_t win_w, uint32_t stride, uint32_t maps,
                    std::vector<std::vector<double>> weights, std::vector<double> bias = {});
// Same, with symmetric zero padding of (win-1)/2 on every border (odd windows).
LayerSpec conv_spec_padded(uint32_t win_h, uint32_t win_w, uint32_t stride, uint32_t maps,
                           std::vector<std::vector<double>> weights,
                           std::vector<double> bias = {});
LayerSpec avgpool_spec(uint32_t win, uint32_t stride);
LayerSpec dense_spec(std::vector<std::vector<double>> weights, std::vector<double> bias = {});
LayerSpec square_spec();
LayerSpec softmax_spec();

// Output extent of one layer; throws when the layer cannot follow `in`.
Shape3 layer_output_shape(const LayerSpec& l, Shape3 in);

// Shapes before every layer plus the final output: size net.size() + 1.
std::vector<Shape3> chain_shapes(const std::vector<LayerSpec>& net, Shape3 input);

// One affine stage of a collapsed network: either a strided window stencil
// (kept in window form so plans can pick window kernels) or an explicit
// row-major matrix over the flattened input.
struct LinearStage {
    bool is_conv = false;
    ConvGeometry geom;                         // window form only
    std::vector<std::vector<double>> weights;  // conv: maps x volume; dense: rows x cols
    std::vector<double> bias;                  // per output row, empty = zero
    Shape3 in_shape, out_shape;

    uint64_t rows() const { return weights.size(); }
    uint64_t cols() const { return weights.empty() ? 0 : weights[0].size(); }
};

// Alternating affine stages and squarings. squares_after[i] counts the
// squarings applied to stage i's output before the next stage.
struct CollapsedNetwork {
    Shape3 input;
    std::vector<LinearStage> stages;
    std::vector<uint32_t> squares_after;
    bool softmax_tail = false;
};

// Folds every maximal run of affine layers (conv, pool, dense) into a single
// stage: window-only runs compose into one strided window (averaging factors
// become stencil weights), runs containing a dense layer compose into one
// matrix. Throws when zero padding on a non-initial layer of a window run
// reads positions the composed window cannot reproduce.
CollapsedNetwork collapse_adjacent_linear(const std::vector<LayerSpec>& net, Shape3 input);

std::vector<double> forward_float(const std::vector<LayerSpec>& net, Shape3 input,
                                  const std::vector<double>& x);
std::vector<double> forward_float(const CollapsedNetwork& net, const std::vector<double>& x);

// Per-stage power-of-two weight scales (a single entry applies to every
// stage) and the bound on the integer input values.
struct QuantizationPolicy {
    std::vector<uint32_t> scale_bits;
    int64_t input_bound = 255;
};

struct QuantizedStage {
    bool is_conv = false;
    ConvGeometry geom;
    std::vector<std::vector<int64_t>> weights;
    std::vector<int64_t> bias;
    Shape3 in_shape, out_shape;
    uint32_t scale_bits = 0;
    // log2 of the factor between this stage's integer outputs and the float
    // network's values at the same point (biases are scaled to match).
    uint32_t value_exponent = 0;
    // Largest |value| this stage can emit, after its trailing squarings.
    BigInt bound = 0;

    uint64_t rows() const { return weights.size(); }
    uint64_t cols() const { return weights.empty() ? 0 : weights[0].size(); }
};

struct QuantizedNetwork {
    Shape3 input;
    std::vector<QuantizedStage> stages;
    std::vector<uint32_t> squares_after;
    bool softmax_tail = false;
    BigInt final_bound = 0;
};

// Round-to-nearest-even of v * 2^scale_bits.
int64_t quantize_value(double v, uint32_t scale_bits);

// Integer network with a propagated magnitude ledger: per coordinate,
// a linear stage bounds row r by sum_j |w_rj| * bound_j + |b_r| and a
// squaring squares the bound. With a prime list given, throws
// magnitude_error naming the first stage whose bound reaches the modulus
// capacity, along with the smallest sufficient prime set.
QuantizedNetwork quantize(const CollapsedNetwork& net, const QuantizationPolicy& policy,
                          const std::vector<uint64_t>& primes = {});

// Reference forward pass of the quantized network, exact in arbitrary
// precision. The oracle every packed execution must match.
std::vector<BigInt> forward_integer(const QuantizedNetwork& net,
                                    const std::vector<int64_t>& x);

}  // namespace packnn
