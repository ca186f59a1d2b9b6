#include "packnn/plan.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>
#include <string>

namespace packnn {

namespace {

void require(bool cond, const std::string& what) {
    if (!cond) throw std::invalid_argument(what);
}

uint32_t log2_exact(uint64_t v) {
    uint32_t k = 0;
    while ((uint64_t{1} << k) < v) ++k;
    return k;
}

CounterDelta counter_sub(const CounterDelta& a, const CounterDelta& b) {
    CounterDelta d;
    d.ct_ct_mul = a.ct_ct_mul - b.ct_ct_mul;
    d.ct_plain_mul = a.ct_plain_mul - b.ct_plain_mul;
    d.scalar_mul = a.scalar_mul - b.scalar_mul;
    d.mask_mul = a.mask_mul - b.mask_mul;
    d.add = a.add - b.add;
    d.rot_cols = a.rot_cols - b.rot_cols;
    d.rot_rows = a.rot_rows - b.rot_rows;
    return d;
}

const QuantizedStage& stage_at(const QuantizedNetwork& net, size_t k) {
    if (k >= net.stages.size())
        throw std::invalid_argument("plan does not match this network");
    return net.stages[k];
}

// Bias per flattened output value; empty stage bias means zeros. Window
// stages carry one bias per map, shared by every window position.
std::vector<int64_t> output_bias(const QuantizedStage& s) {
    std::vector<int64_t> b(s.out_shape.values(), 0);
    if (s.bias.empty()) return b;
    if (s.is_conv) {
        const uint64_t positions = s.geom.positions();
        for (uint64_t i = 0; i < b.size(); ++i) b[i] = s.bias[i / positions];
    } else {
        for (uint64_t i = 0; i < s.bias.size() && i < b.size(); ++i) b[i] = s.bias[i];
    }
    return b;
}

// Window-stage weights as one row per map over the window volume.
RowMajorWeights window_rows(const QuantizedStage& s) {
    return {s.rows(), s.cols(),
            [&s](uint64_t m, uint64_t j) { return s.weights[m][j]; }};
}

// Any stage as a flat row-major matrix over the flattened input. Window
// stages compute entries from the geometry, so the matrix never needs
// materializing.
RowMajorWeights matrix_rows(const QuantizedStage& s) {
    if (!s.is_conv) {
        return {s.rows(), s.cols(),
                [&s](uint64_t r, uint64_t c) { return s.weights[r][c]; }};
    }
    const ConvGeometry g = s.geom;
    const uint64_t positions = g.positions();
    const uint64_t plane = static_cast<uint64_t>(g.in_h) * g.in_w;
    return {s.out_shape.values(), s.in_shape.values(),
            [&s, g, positions, plane](uint64_t row, uint64_t col) -> int64_t {
                const uint64_t m = row / positions;
                const uint32_t pos = static_cast<uint32_t>(row % positions);
                const int64_t oy = pos / g.out_w();
                const int64_t ox = pos % g.out_w();
                const uint64_t cin = col / plane;
                const int64_t y = static_cast<int64_t>((col % plane) / g.in_w);
                const int64_t x = static_cast<int64_t>(col % g.in_w);
                const int64_t dy = y - (oy * g.stride_h - g.pad_top);
                const int64_t dx = x - (ox * g.stride_w - g.pad_left);
                if (dy < 0 || dy >= g.win_h || dx < 0 || dx >= g.win_w) return 0;
                const uint64_t j = (cin * g.win_h + static_cast<uint64_t>(dy)) * g.win_w +
                                   static_cast<uint64_t>(dx);
                return s.weights[m][j];
            }};
}

bool identity_slots(const std::vector<uint32_t>& slots) {
    for (size_t i = 0; i < slots.size(); ++i)
        if (slots[i] != i) return false;
    return true;
}

// Display shape and representation name of a tensor: "count x dim rep".
// Sparse and record tensors show one value per message; stacked shows the
// duplicated width.
struct Probe {
    uint64_t count = 0;
    uint64_t dim = 0;
    std::string rep;
};

Probe probe_of(const EncodedTensor& t) {
    Probe p;
    p.count = t.messages.size();
    switch (t.rep.kind) {
        case RepKind::Sparse: p.dim = 1; break;
        case RepKind::Simd: p.dim = t.rep.copies; break;
        case RepKind::Stacked: p.dim = t.rep.length * t.rep.copies; break;
        default: p.dim = t.rep.length; break;
    }
    p.rep = rep_name(t.rep.kind, !t.rep.identity_layout());
    return p;
}

using StepFn = std::function<EncodedTensor(Evaluator&, const QuantizedNetwork&, const EncodedTensor&)>;

void add_step(InferencePlan& plan, uint64_t in_count, uint64_t in_dim, std::string in_rep,
              std::string op, const CounterDelta& predicted, StepFn run) {
    PlanStep st;
    st.op = std::move(op);
    st.in_count = in_count;
    st.in_dim = in_dim;
    st.in_rep = std::move(in_rep);
    st.predicted = predicted;
    st.run = std::move(run);
    plan.live_entering.push_back(in_count);
    plan.predicted_total += predicted;
    plan.steps.push_back(std::move(st));
}

std::string count_text(uint64_t v) { return std::to_string(v); }

// Shared validation for the three-stage window-front networks the lola
// strategies expect: window stage, matrix, matrix, squaring after the first
// two stages only.
void require_lola_shape(const QuantizedNetwork& net) {
    require(net.stages.size() == 3, "strategy expects three linear stages");
    require(net.squares_after.size() == 3, "malformed network");
    require(net.squares_after[0] == 1 && net.squares_after[1] == 1 && net.squares_after[2] == 0,
            "strategy expects squarings after the first and second stages only");
    require(net.stages[0].is_conv, "strategy expects a window first stage");
    require(!net.stages[2].is_conv, "strategy expects a matrix final stage");
}

CounterDelta combine_cost(const std::vector<uint32_t>& offsets, bool with_bias) {
    CounterDelta d;
    for (uint32_t o : offsets)
        if (o != 0) d.rot_cols += 1;
    d.add = offsets.size() - 1 + (with_bias ? 1 : 0);
    return d;
}

CounterDelta stack_cost(uint32_t copies, bool fills_message) {
    // Doubling shifts pad, 2*pad, ...; the last one is the row swap exactly
    // when the copies fill the message.
    CounterDelta d;
    const uint32_t steps = log2_exact(copies);
    d.add = steps;
    d.rot_rows = fills_message ? 1 : 0;
    d.rot_cols = steps - d.rot_rows;
    return d;
}

CounterDelta sparse_to_dense_cost(uint64_t values) {
    CounterDelta d;
    d.mask_mul = values;
    d.ct_plain_mul = values;
    d.add = values - 1;
    return d;
}

// Steps shared by lola-mnist and lola-dense-mnist from the first squaring
// onward: square, stack to fill the message, stacked row-major products,
// mask and recombine, square, final row-major products.
void add_lola_tail(InferencePlan& plan, uint32_t n, uint64_t combined, const std::string& vec_rep,
                   bool hybrid_stack, uint64_t r1, uint64_t r2) {
    const uint64_t pad = pad_for(combined);
    require(2 * pad <= n, "stacked layer wider than the message degree");
    const uint32_t copies = static_cast<uint32_t>(n / pad);
    const uint64_t calls = (r1 + copies - 1) / copies;

    add_step(plan, 1, combined, vec_rep, "square", square_cost(1),
             [](Evaluator& ev, const QuantizedNetwork&, const EncodedTensor& x) {
                 return square_activation(ev, x);
             });

    add_step(plan, 1, combined, vec_rep, "stack " + count_text(copies) + " copies",
             stack_cost(copies, true),
             [copies](Evaluator& ev, const QuantizedNetwork&, const EncodedTensor& x) {
                 return stack_copies(ev, x, copies);
             });

    add_step(plan, 1, combined * copies, rep_name(RepKind::Stacked, hybrid_stack),
             "stacked row-major products, " + count_text(calls) + " calls of " +
                 count_text(copies) + " rows",
             matvec_stacked_cost(n, pad, copies, r1),
             [](Evaluator& ev, const QuantizedNetwork& net, const EncodedTensor& x) {
                 return matvec_stacked_rowmajor(ev, x, matrix_rows(stage_at(net, 1)));
             });

    const std::vector<uint32_t> call_offsets = uniform_offsets(static_cast<uint32_t>(calls), 1);
    CounterDelta recombine = mask_active_cost(calls);
    recombine += combine_cost(call_offsets, true);
    add_step(plan, calls, copies, rep_name(RepKind::Interleaved),
             "mask and combine " + count_text(calls) + " messages into one", recombine,
             [call_offsets, r1](Evaluator& ev, const QuantizedNetwork& net, const EncodedTensor& x) {
                 EncodedTensor t = mask_active(ev, x);
                 t = combine_to_one(ev, t, call_offsets, r1);
                 return add_bias(ev, t, output_bias(stage_at(net, 1)));
             });

    add_step(plan, 1, r1, rep_name(RepKind::Interleaved), "square", square_cost(1),
             [](Evaluator& ev, const QuantizedNetwork&, const EncodedTensor& x) {
                 return square_activation(ev, x);
             });

    // Reduction span of the recombined layout: call k keeps its rows
    // end-anchored on pad boundaries, shifted by the call index. Small
    // second stages can stay inside slot row 0.
    const uint32_t half = n / 2;
    uint64_t max_slot = 0;
    for (uint64_t d = 0; d < r1; ++d) {
        const uint64_t base = (d % copies + 1) * pad - 1;
        const uint64_t slot = base / half * half + (base % half + d / copies) % half;
        max_slot = std::max(max_slot, slot);
    }
    const uint64_t fc_span = max_slot < half ? pad_for(max_slot + 1) : n;
    CounterDelta fc = matvec_rowmajor_cost(n, fc_span, r2);
    fc += add_bias_cost(r2);
    add_step(plan, 1, r1, rep_name(RepKind::Interleaved),
             "row-major products, " + count_text(r2) + " rows", fc,
             [](Evaluator& ev, const QuantizedNetwork& net, const EncodedTensor& x) {
                 EncodedTensor t = matvec_rowmajor(ev, x, matrix_rows(stage_at(net, 2)));
                 return add_bias(ev, t, output_bias(stage_at(net, 2)));
             });
}

void build_lola_mnist(InferencePlan& plan, const QuantizedNetwork& net, uint32_t n) {
    require_lola_shape(net);
    const QuantizedStage& s0 = net.stages[0];
    require(!net.stages[1].is_conv, "strategy expects a matrix second stage");
    const ConvGeometry g = s0.geom;
    const uint64_t p = g.positions();
    const uint64_t v = g.window_volume();
    const uint64_t maps = s0.rows();
    const uint64_t combined = maps * p;
    require(net.stages[1].cols() == combined, "second stage does not match the window outputs");
    const uint64_t r1 = net.stages[1].rows();
    require(net.stages[2].cols() == r1, "final stage does not match the second");
    const uint64_t r2 = net.stages[2].rows();
    require(combined >= 2, "strategy needs at least two window outputs");
    require(combined <= n / 2, "combined window outputs do not fit slot row 0");

    plan.in_kind = RepKind::Convolution;
    plan.in_messages = v;
    plan.in_length = p;
    plan.input_values = s0.in_shape.values();
    plan.encode_input = [g](Evaluator& ev, const std::vector<int64_t>& x) {
        return encode_convolution(ev, x, g, false);
    };

    add_step(plan, v, p, rep_name(RepKind::Convolution),
             "weighted sum of window messages per map", conv_rowmajor_cost(maps, v),
             [](Evaluator& ev, const QuantizedNetwork& net0, const EncodedTensor& x) {
                 return conv_rowmajor(ev, x, window_rows(stage_at(net0, 0)));
             });

    const std::vector<uint32_t> offsets =
        uniform_offsets(static_cast<uint32_t>(maps), static_cast<uint32_t>(p));
    add_step(plan, maps, p, rep_name(RepKind::Dense),
             "combine " + count_text(maps) + " messages into one", combine_cost(offsets, true),
             [offsets](Evaluator& ev, const QuantizedNetwork& net0, const EncodedTensor& x) {
                 EncodedTensor t = combine_to_one(ev, x, offsets);
                 return add_bias(ev, t, output_bias(stage_at(net0, 0)));
             });

    add_lola_tail(plan, n, combined, rep_name(RepKind::Dense), false, r1, r2);

    plan.depth_needed = 2;
    plan.out_count = 1;  // the classic table shows the output as one row of scores
    plan.out_dim = r2;
    plan.out_rep = rep_name(RepKind::Sparse);
    plan.live_entering.push_back(r2);
}

void build_lola_dense_mnist(InferencePlan& plan, const QuantizedNetwork& net, uint32_t n) {
    require_lola_shape(net);
    const QuantizedStage& s0 = net.stages[0];
    require(!net.stages[1].is_conv, "strategy expects a matrix second stage");
    const ConvGeometry g = s0.geom;
    const uint64_t p = g.positions();
    const uint64_t v = g.window_volume();
    const uint64_t maps = s0.rows();
    const uint64_t combined = maps * p;
    require(net.stages[1].cols() == combined, "second stage does not match the window outputs");
    const uint64_t r1 = net.stages[1].rows();
    require(net.stages[2].cols() == r1, "final stage does not match the second");
    const uint64_t r2 = net.stages[2].rows();
    require(combined >= 2, "strategy needs at least two window outputs");

    const uint64_t pad = pad_for(combined);
    require(2 * pad <= n, "stacked layer wider than the message degree");
    // May throw when no stride packs the shifted window grids disjointly.
    const MaskPacking packing = find_mask_packing(g, static_cast<uint32_t>(maps), pad, n);
    const std::vector<uint32_t> base = window_grid_slots(g, packing.row_stride);

    plan.in_kind = RepKind::Dense;
    plan.in_messages = 1;
    plan.in_length = static_cast<uint64_t>(g.channels) * g.in_h * packing.row_stride;
    plan.input_values = s0.in_shape.values();
    const uint32_t row_stride = packing.row_stride;
    plan.encode_input = [g, row_stride](Evaluator& ev, const std::vector<int64_t>& x) {
        return encode_dense_image(ev, x, g, row_stride);
    };

    CounterDelta carve;
    carve.mask_mul = v;
    carve.ct_plain_mul = v;
    carve.rot_cols = v - 1;  // the top-left tap of channel 0 is already aligned
    add_step(plan, 1, plan.input_values, rep_name(RepKind::Dense),
             "mask input to create " + count_text(v) + " messages", carve,
             [g, row_stride](Evaluator& ev, const QuantizedNetwork&, const EncodedTensor& x) {
                 return dense_to_convolution(ev, x, g, row_stride);
             });

    const bool grid_identity = identity_slots(base);
    add_step(plan, v, p, rep_name(RepKind::Convolution, !grid_identity),
             "weighted sum of window messages per map", conv_rowmajor_cost(maps, v),
             [](Evaluator& ev, const QuantizedNetwork& net0, const EncodedTensor& x) {
                 return conv_rowmajor(ev, x, window_rows(stage_at(net0, 0)));
             });

    const std::vector<uint32_t> shifts = packing.map_shifts;
    add_step(plan, maps, p,
             rep_name(grid_identity ? RepKind::Dense : RepKind::Interleaved),
             "combine " + count_text(maps) + " messages into one", combine_cost(shifts, true),
             [shifts](Evaluator& ev, const QuantizedNetwork& net0, const EncodedTensor& x) {
                 EncodedTensor t = combine_to_one(ev, x, shifts);
                 return add_bias(ev, t, output_bias(stage_at(net0, 0)));
             });

    // Combined layout: grid slots shifted per map; identity essentially
    // never, but compute it honestly for the display.
    std::vector<uint32_t> combined_slots(combined);
    const uint32_t half = n / 2;
    for (uint64_t m = 0; m < maps; ++m)
        for (uint64_t w = 0; w < p; ++w)
            combined_slots[m * p + w] = (base[w] + shifts[m]) % half;
    const bool combined_identity = identity_slots(combined_slots);
    const std::string vec_rep =
        rep_name(combined_identity ? RepKind::Dense : RepKind::Interleaved);

    add_lola_tail(plan, n, combined, vec_rep, !combined_identity, r1, r2);

    plan.depth_needed = 2;
    plan.out_count = r2;
    plan.out_dim = 1;
    plan.out_rep = rep_name(RepKind::Sparse);
    plan.live_entering.push_back(r2);
}

void build_lola_cifar(InferencePlan& plan, const QuantizedNetwork& net, uint32_t n,
                      const PlanOptions& opt) {
    require_lola_shape(net);
    const QuantizedStage& s0 = net.stages[0];
    const QuantizedStage& s1 = net.stages[1];
    const ConvGeometry g = s0.geom;
    const uint64_t p = g.positions();
    const uint64_t v = g.window_volume();
    const uint64_t maps = s0.rows();
    const uint64_t combined = maps * p;
    require(p >= 2, "strategy needs at least two window positions per map");
    if (s1.is_conv) {
        const uint64_t matrix_size =
            static_cast<uint64_t>(s1.geom.window_volume()) * s1.rows();
        require(matrix_size > opt.window_matrix_threshold,
                "interior window stage below the matrix threshold has no packed route");
    }
    require(s1.is_conv ? s1.in_shape.values() == combined : s1.cols() == combined,
            "second stage does not match the window outputs");
    const uint64_t mid = s1.out_shape.values();
    require(net.stages[2].cols() == mid, "final stage does not match the second");
    const uint64_t r2 = net.stages[2].rows();
    const uint32_t half = n / 2;
    const uint32_t split = static_cast<uint32_t>((p + 1) / 2);
    require(maps * split <= half, "combined map outputs do not fit the slot rows");
    require(mid <= n, "second stage outputs do not fit one message");
    // The split layout places position `split` at slot half, so it is the
    // identity exactly when split == half (then the combine degenerates too).
    const bool split_identity = split == half;
    const std::string part_rep =
        rep_name(split_identity ? RepKind::Dense : RepKind::Interleaved);
    const std::string vec_rep =
        rep_name(split_identity && maps == 1 ? RepKind::Dense : RepKind::Interleaved);

    plan.in_kind = RepKind::Convolution;
    plan.in_messages = v;
    plan.in_length = p;
    plan.input_values = s0.in_shape.values();
    plan.encode_input = [g](Evaluator& ev, const std::vector<int64_t>& x) {
        return encode_convolution(ev, x, g, true);
    };

    add_step(plan, v, p, rep_name(RepKind::Convolution, !split_identity),
             "weighted sum of window messages per map", conv_rowmajor_cost(maps, v),
             [](Evaluator& ev, const QuantizedNetwork& net0, const EncodedTensor& x) {
                 return conv_rowmajor(ev, x, window_rows(stage_at(net0, 0)));
             });

    const std::vector<uint32_t> offsets = uniform_offsets(static_cast<uint32_t>(maps), split);
    add_step(plan, maps, p, part_rep,
             "combine " + count_text(maps) + " messages into one", combine_cost(offsets, true),
             [offsets](Evaluator& ev, const QuantizedNetwork& net0, const EncodedTensor& x) {
                 EncodedTensor t = combine_to_one(ev, x, offsets);
                 return add_bias(ev, t, output_bias(stage_at(net0, 0)));
             });

    add_step(plan, 1, combined, vec_rep, "square", square_cost(1),
             [](Evaluator& ev, const QuantizedNetwork&, const EncodedTensor& x) {
                 return square_activation(ev, x);
             });

    // The split layout touches both slot rows, so every product reduces over
    // the full message and the outputs broadcast.
    CounterDelta mv = matvec_rowmajor_cost(n, n, mid);
    mv += add_bias_cost(mid);
    add_step(plan, 1, combined, vec_rep,
             "row-major products, " + count_text(mid) + " rows", mv,
             [](Evaluator& ev, const QuantizedNetwork& net0, const EncodedTensor& x) {
                 EncodedTensor t = matvec_rowmajor(ev, x, matrix_rows(stage_at(net0, 1)));
                 return add_bias(ev, t, output_bias(stage_at(net0, 1)));
             });

    add_step(plan, mid, 1, rep_name(RepKind::Sparse),
             "place sparse values into one dense message", sparse_to_dense_cost(mid),
             [](Evaluator& ev, const QuantizedNetwork&, const EncodedTensor& x) {
                 return sparse_to_dense(ev, x);
             });

    add_step(plan, 1, mid, rep_name(RepKind::Dense), "square", square_cost(1),
             [](Evaluator& ev, const QuantizedNetwork&, const EncodedTensor& x) {
                 return square_activation(ev, x);
             });

    const uint64_t span = mid <= half ? pad_for(mid) : n;
    CounterDelta fc = matvec_rowmajor_cost(n, span, r2);
    fc += add_bias_cost(r2);
    add_step(plan, 1, mid, rep_name(RepKind::Dense),
             "row-major products, " + count_text(r2) + " rows", fc,
             [](Evaluator& ev, const QuantizedNetwork& net0, const EncodedTensor& x) {
                 EncodedTensor t = matvec_rowmajor(ev, x, matrix_rows(stage_at(net0, 2)));
                 return add_bias(ev, t, output_bias(stage_at(net0, 2)));
             });

    plan.depth_needed = 2;
    plan.out_count = r2;
    plan.out_dim = 1;
    plan.out_rep = rep_name(RepKind::Sparse);
    plan.live_entering.push_back(r2);
}

void build_cryptonets_simd(InferencePlan& plan, const QuantizedNetwork& net) {
    require(!net.stages.empty(), "empty network");
    require(net.squares_after.size() == net.stages.size(), "malformed network");

    plan.in_kind = RepKind::Simd;
    plan.in_messages = net.stages[0].in_shape.values();
    plan.in_length = plan.in_messages;
    plan.input_values = plan.in_messages;
    plan.encode_input = [](Evaluator& ev, const std::vector<int64_t>& x) {
        return encode_simd(ev, {x});
    };

    uint32_t depth = 0;
    for (size_t k = 0; k < net.stages.size(); ++k) {
        const uint64_t fan_in = net.stages[k].in_shape.values();
        const uint64_t nodes = net.stages[k].out_shape.values();
        CounterDelta d = simd_dense_cost(nodes, fan_in);
        d += add_bias_cost(nodes);
        add_step(plan, fan_in, 1, rep_name(RepKind::Simd),
                 "per-value weighted sums, " + count_text(nodes) + " outputs", d,
                 [k](Evaluator& ev, const QuantizedNetwork& net0, const EncodedTensor& x) {
                     EncodedTensor t = simd_dense(ev, x, matrix_rows(stage_at(net0, k)));
                     return add_bias(ev, t, output_bias(stage_at(net0, k)));
                 });
        for (uint32_t q = 0; q < net.squares_after[k]; ++q) {
            add_step(plan, nodes, 1, rep_name(RepKind::Simd), "square every message",
                     square_cost(nodes),
                     [](Evaluator& ev, const QuantizedNetwork&, const EncodedTensor& x) {
                         return square_activation(ev, x);
                     });
            depth += 1;
        }
    }

    plan.depth_needed = depth;
    plan.out_count = net.stages.back().out_shape.values();
    plan.out_dim = 1;
    plan.out_rep = rep_name(RepKind::Simd);
    plan.live_entering.push_back(plan.out_count);
}

void build_linear_features(InferencePlan& plan, const QuantizedNetwork& net, uint32_t n) {
    require(net.stages.size() == 1 && !net.stages[0].is_conv,
            "strategy expects a single matrix stage");
    require(net.squares_after.size() == 1 && net.squares_after[0] == 0,
            "strategy expects no squarings");
    const uint64_t cols = net.stages[0].cols();
    const uint64_t rows = net.stages[0].rows();
    require(cols <= n, "feature vector does not fit one message");

    plan.in_kind = RepKind::Dense;
    plan.in_messages = 1;
    plan.in_length = cols;
    plan.input_values = cols;
    plan.encode_input = [](Evaluator& ev, const std::vector<int64_t>& x) {
        return encode_dense(ev, x);
    };

    const uint64_t span = cols <= n / 2 ? pad_for(cols) : n;
    CounterDelta d = matvec_rowmajor_cost(n, span, rows);
    d += add_bias_cost(rows);
    add_step(plan, 1, cols, rep_name(RepKind::Dense),
             "row-major products, " + count_text(rows) + " rows", d,
             [](Evaluator& ev, const QuantizedNetwork& net0, const EncodedTensor& x) {
                 EncodedTensor t = matvec_rowmajor(ev, x, matrix_rows(stage_at(net0, 0)));
                 return add_bias(ev, t, output_bias(stage_at(net0, 0)));
             });

    plan.depth_needed = 0;
    plan.out_count = rows;
    plan.out_dim = 1;
    plan.out_rep = rep_name(RepKind::Sparse);
    plan.live_entering.push_back(rows);
}

}  // namespace

const char* strategy_name(Strategy s) {
    switch (s) {
        case Strategy::LolaMnist: return "lola-mnist";
        case Strategy::LolaDenseMnist: return "lola-dense-mnist";
        case Strategy::LolaCifar: return "lola-cifar";
        case Strategy::CryptonetsSimd: return "cryptonets-simd";
        case Strategy::LinearFeatures: return "linear-features";
    }
    return "?";
}

Strategy strategy_from_name(const std::string& name) {
    for (Strategy s : all_strategies())
        if (name == strategy_name(s)) return s;
    throw std::invalid_argument("unknown strategy: " + name);
}

std::vector<Strategy> all_strategies() {
    return {Strategy::LolaMnist, Strategy::LolaDenseMnist, Strategy::LolaCifar,
            Strategy::CryptonetsSimd, Strategy::LinearFeatures};
}

uint32_t default_degree(Strategy s) {
    switch (s) {
        case Strategy::LolaMnist: return 8192;
        case Strategy::LolaDenseMnist: return 16384;
        case Strategy::LolaCifar: return 16384;
        case Strategy::CryptonetsSimd: return 8192;
        case Strategy::LinearFeatures: return 8192;
    }
    return 8192;
}

std::vector<uint64_t> default_primes() { return {2148728833, 2148794369, 2149810177}; }

uint64_t InferencePlan::predicted_peak() const {
    uint64_t peak = 0;
    for (uint64_t v : live_entering) peak = std::max(peak, v);
    return peak;
}

InferencePlan build_plan(const QuantizedNetwork& net, Strategy s, const PlanOptions& opt) {
    InferencePlan plan;
    plan.strategy = s;
    plan.n = opt.n ? opt.n : default_degree(s);
    require(plan.n >= 4 && (plan.n & (plan.n - 1)) == 0, "degree must be a power of two");
    switch (s) {
        case Strategy::LolaMnist: build_lola_mnist(plan, net, plan.n); break;
        case Strategy::LolaDenseMnist: build_lola_dense_mnist(plan, net, plan.n); break;
        case Strategy::LolaCifar: build_lola_cifar(plan, net, plan.n, opt); break;
        case Strategy::CryptonetsSimd: build_cryptonets_simd(plan, net); break;
        case Strategy::LinearFeatures: build_linear_features(plan, net, plan.n); break;
    }
    return plan;
}

ExecutionResult execute(const InferencePlan& plan, const EncodedTensor& input,
                        const QuantizedNetwork& net, Evaluator& ev) {
    if (plan.depth_needed > ev.context().max_depth())
        throw depth_error("plan needs depth " + std::to_string(plan.depth_needed) +
                          " but the budget allows " + std::to_string(ev.context().max_depth()));
    if (input.rep.kind != plan.in_kind || input.messages.size() != plan.in_messages ||
        input.rep.length != plan.in_length)
        throw std::invalid_argument("input tensor does not match the plan's first step");

    ExecutionResult res;
    uint64_t peak = input.messages.size();
    ev.note_live(peak);
    EncodedTensor cur = input;
    for (size_t i = 0; i < plan.steps.size(); ++i) {
        const PlanStep& st = plan.steps[i];
        if (i > 0) {
            const Probe pr = probe_of(cur);
            if (pr.count != st.in_count || pr.dim != st.in_dim || pr.rep != st.in_rep)
                throw std::logic_error("plan row diverged before step: " + st.op);
        }
        const CounterDelta before = ev.counters().ops;
        cur = st.run(ev, net, cur);
        const CounterDelta spent = counter_sub(ev.counters().ops, before);
        if (!(spent == st.predicted))
            throw std::logic_error("operation count diverged at step: " + st.op);
        peak = std::max<uint64_t>(peak, cur.messages.size());
        ev.note_live(cur.messages.size());
        res.report.per_step.push_back(spent);
        res.report.total += spent;
    }

    res.report.live_messages_peak = peak;
    for (const Message& m : cur.messages)
        res.report.depth_consumed = std::max(res.report.depth_consumed, m.depth);
    res.scores = decode(ev, cur);
    return res;
}

uint32_t predict(const std::vector<BigInt>& scores) {
    if (scores.empty()) throw std::invalid_argument("no scores");
    size_t best = 0;
    for (size_t i = 1; i < scores.size(); ++i)
        if (scores[i] > scores[best]) best = i;
    return static_cast<uint32_t>(best);
}

}  // namespace packnn
