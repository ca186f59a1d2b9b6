#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "packnn/evaluator.hpp"

namespace packnn {

enum class RepKind { Dense, Sparse, Stacked, Interleaved, Convolution, Simd };

// Display name: "dense", "sparse", "stacked", "interleave", "convolution",
// "simd"; hybrids with a non-identity layout print as "convolution-interleave"
// or "stacked-interleave".
std::string rep_name(RepKind kind, bool hybrid = false);

// Describes how a logical vector of `length` values is laid out across the
// slots of one or more messages.
struct Representation {
    RepKind kind = RepKind::Dense;
    uint64_t length = 0;   // logical values represented
    uint64_t pad = 0;      // power-of-two span used by reductions (dense/stacked)
    uint32_t copies = 1;   // stacked: copies at stride pad
    bool broadcast = false;     // sparse: value present in every slot
    uint32_t value_slot = 0;    // sparse: slot holding the value otherwise
    uint32_t windows = 0;       // convolution: message count r
    // slot_of[i] = slot of logical value i (primary copy). Empty = identity.
    // For convolution this is the shared per-message window layout.
    std::vector<uint32_t> slot_of;
    bool dirty = false;  // unmapped slots may hold nonzero partial sums

    bool identity_layout() const;
    uint32_t slot(uint64_t i) const {
        return slot_of.empty() ? static_cast<uint32_t>(i) : slot_of[i];
    }
};

struct EncodedTensor {
    Representation rep;
    std::vector<Message> messages;
};

// Geometry of a strided window sweep over a (channels, height, width) input,
// with independent zero padding on each border.
struct ConvGeometry {
    uint32_t in_h = 0, in_w = 0, channels = 1;
    uint32_t win_h = 1, win_w = 1;
    uint32_t stride_h = 1, stride_w = 1;
    uint32_t pad_top = 0, pad_left = 0, pad_bottom = 0, pad_right = 0;

    uint32_t out_h() const;
    uint32_t out_w() const;
    uint32_t positions() const { return out_h() * out_w(); }
    uint32_t window_volume() const { return channels * win_h * win_w; }
    // Source flat index (c*in_h*in_w + y*in_w + x) for window offset j at
    // window position w, or nullopt when the tap falls in the zero padding.
    std::optional<uint32_t> tap(uint32_t j, uint32_t w) const;
};

uint64_t pad_for(uint64_t length);

// --- encoders -------------------------------------------------------------

EncodedTensor encode_dense(Evaluator& ev, const std::vector<int64_t>& v);

// Image laid out line after line with a fixed row stride (>= width); the
// margin slots stay zero. Used by plans that later mask windows out of the
// message: a wider stride gives the window grids room to interleave.
EncodedTensor encode_dense_image(Evaluator& ev, const std::vector<int64_t>& image,
                                 const ConvGeometry& g, uint32_t row_stride);

EncodedTensor encode_sparse(Evaluator& ev, const std::vector<int64_t>& v, bool broadcast = true);

// r = window-volume messages; message j holds the tap under window offset j
// at slot layout(w) for every window position w. With row_split the
// positions are divided between the two slot-matrix rows so that many maps
// can later be combined with uniform column rotations.
EncodedTensor encode_convolution(Evaluator& ev, const std::vector<int64_t>& image,
                                 const ConvGeometry& g, bool row_split = false);

// One message per feature; slot i of message j = feature j of record i.
EncodedTensor encode_simd(Evaluator& ev, const std::vector<std::vector<int64_t>>& records);

// --- decoding -------------------------------------------------------------

// Logical values, by representation metadata. Multi-message part tensors
// (convolution windows, per-call matvec outputs) decode part-major: each
// message's values at the shared layout, concatenated.
std::vector<BigInt> decode(Evaluator& ev, const EncodedTensor& t);

// Reconstructs the source image of a convolution tensor from the window
// taps (first occurrence of each input position wins).
std::vector<BigInt> decode_convolution_image(Evaluator& ev, const EncodedTensor& t,
                                             const ConvGeometry& g);

// --- converters -----------------------------------------------------------

// Doubling builder: log2(copies) rotate-adds at shifts pad, 2*pad, ...;
// the final shift of n/2 is the row swap. Requires the layout confined to
// slot-matrix row 0 and injective mod pad.
EncodedTensor stack_copies(Evaluator& ev, const EncodedTensor& t, uint32_t copies);

// Rotate part i by offsets[i] columns and sum into one message. Active slot
// sets are tracked through the actual rotations and must stay disjoint.
// part_length values of part i become logical indices i*part_length + j;
// logical_limit (0 = none) truncates the combined length, and the dropped
// tail slots must be zero by construction.
EncodedTensor combine_to_one(Evaluator& ev, const EncodedTensor& parts,
                             const std::vector<uint32_t>& offsets, uint64_t logical_limit = 0);

// Zeroes every slot outside the layout with one 0/1-mask multiplication per
// message, clearing the dirty flag. Required before combining parts whose
// unmapped slots hold reduction garbage.
EncodedTensor mask_active(Evaluator& ev, const EncodedTensor& t);

// Broadcast sparse inputs only: one mask multiplication per part places part
// i's value at slot targets[i] (defaults to 0,1,2,...), then everything sums
// into a single dense-layout message.
EncodedTensor sparse_to_dense(Evaluator& ev, const EncodedTensor& t,
                              const std::vector<uint32_t>& targets = {});

// LoLa-Dense front end: r 0/1-mask multiplications carve the window grids
// out of a strided dense image, then per-message rotations align every grid
// to the shared layout base(a,b) = stride_slots(g, row_stride). The result
// is a convolution tensor with an interleaved (hybrid) window layout.
EncodedTensor dense_to_convolution(Evaluator& ev, const EncodedTensor& d,
                                   const ConvGeometry& g, uint32_t row_stride);

// Window-grid base slots for a row_stride image layout: base(a,b) =
// row_stride*stride_h*a + stride_w*b over the output grid.
std::vector<uint32_t> window_grid_slots(const ConvGeometry& g, uint32_t row_stride);

// Smallest row stride >= in_w such that `maps` shifted copies of the window
// grid fit disjointly with all slots distinct mod pad; also returns the
// shifts. Throws if none exists up to the search bound.
struct MaskPacking {
    uint32_t row_stride;
    std::vector<uint32_t> map_shifts;
};
MaskPacking find_mask_packing(const ConvGeometry& g, uint32_t maps, uint64_t pad, uint32_t n);

// Shifts for combining `maps` compact convolution outputs: parts at offsets
// maps_stride apart. Returns part offsets {0, s, 2s, ...}.
std::vector<uint32_t> uniform_offsets(uint32_t parts, uint32_t stride);

}  // namespace packnn
