#include "packnn/representation.hpp"

#include <algorithm>
#include <stdexcept>

namespace packnn {

namespace {

// Column rotation by a signed amount within the slot-matrix rows; counts as
// one rotation. Data must not need to cross between rows.
Message bundle_signed(Evaluator& ev, const Message& m, int64_t shift) {
    const uint32_t half = ev.context().half();
    int64_t a = shift % static_cast<int64_t>(half);
    if (a < 0) a += half;
    return ev.rotate_bundle(m, static_cast<uint32_t>(a));
}

uint32_t shifted_slot(uint32_t slot, uint32_t offset, uint32_t half) {
    const uint32_t row = slot / half;
    const uint32_t col = slot % half;
    return row * half + (col + offset) % half;
}

void require(bool cond, const char* what) {
    if (!cond) throw std::invalid_argument(what);
}

}  // namespace

std::string rep_name(RepKind kind, bool hybrid) {
    switch (kind) {
        case RepKind::Dense: return "dense";
        case RepKind::Sparse: return "sparse";
        case RepKind::Stacked: return hybrid ? "stacked-interleave" : "stacked";
        case RepKind::Interleaved: return "interleave";
        case RepKind::Convolution: return hybrid ? "convolution-interleave" : "convolution";
        case RepKind::Simd: return "simd";
    }
    return "?";
}

bool Representation::identity_layout() const {
    if (slot_of.empty()) return true;
    for (size_t i = 0; i < slot_of.size(); ++i)
        if (slot_of[i] != i) return false;
    return true;
}

uint32_t ConvGeometry::out_h() const {
    const uint32_t padded = in_h + pad_top + pad_bottom;
    require(padded >= win_h, "window taller than padded input");
    return (padded - win_h) / stride_h + 1;
}

uint32_t ConvGeometry::out_w() const {
    const uint32_t padded = in_w + pad_left + pad_right;
    require(padded >= win_w, "window wider than padded input");
    return (padded - win_w) / stride_w + 1;
}

std::optional<uint32_t> ConvGeometry::tap(uint32_t j, uint32_t w) const {
    const uint32_t c = j / (win_h * win_w);
    const uint32_t dy = (j / win_w) % win_h;
    const uint32_t dx = j % win_w;
    const uint32_t a = w / out_w();
    const uint32_t b = w % out_w();
    const int64_t y = static_cast<int64_t>(a) * stride_h + dy - pad_top;
    const int64_t x = static_cast<int64_t>(b) * stride_w + dx - pad_left;
    if (y < 0 || x < 0 || y >= in_h || x >= in_w) return std::nullopt;
    return c * in_h * in_w + static_cast<uint32_t>(y) * in_w + static_cast<uint32_t>(x);
}

uint64_t pad_for(uint64_t length) {
    require(length > 0, "empty vector");
    uint64_t p = 1;
    while (p < length) p <<= 1;
    return p;
}

EncodedTensor encode_dense(Evaluator& ev, const std::vector<int64_t>& v) {
    require(v.size() <= ev.context().n(), "vector longer than slot count");
    EncodedTensor t;
    t.rep.kind = RepKind::Dense;
    t.rep.length = v.size();
    t.rep.pad = pad_for(v.size());
    t.messages.push_back(ev.lift(v));
    return t;
}

EncodedTensor encode_dense_image(Evaluator& ev, const std::vector<int64_t>& image,
                                 const ConvGeometry& g, uint32_t row_stride) {
    require(row_stride >= g.in_w, "row stride narrower than image");
    require(image.size() == static_cast<size_t>(g.channels) * g.in_h * g.in_w,
            "image size does not match geometry");
    const uint64_t span = static_cast<uint64_t>(g.channels) * g.in_h * row_stride;
    require(span <= ev.context().n(), "strided image exceeds slot count");
    std::vector<int64_t> slots(span, 0);
    for (uint32_t c = 0; c < g.channels; ++c)
        for (uint32_t y = 0; y < g.in_h; ++y)
            for (uint32_t x = 0; x < g.in_w; ++x)
                slots[static_cast<uint64_t>(c) * g.in_h * row_stride + static_cast<uint64_t>(y) * row_stride + x] =
                    image[static_cast<uint64_t>(c) * g.in_h * g.in_w + static_cast<uint64_t>(y) * g.in_w + x];
    EncodedTensor t;
    t.rep.kind = RepKind::Dense;
    t.rep.length = span;
    t.rep.pad = pad_for(span);
    t.messages.push_back(ev.lift(slots));
    return t;
}

EncodedTensor encode_sparse(Evaluator& ev, const std::vector<int64_t>& v, bool broadcast) {
    EncodedTensor t;
    t.rep.kind = RepKind::Sparse;
    t.rep.length = v.size();
    t.rep.broadcast = broadcast;
    t.rep.value_slot = 0;
    const uint32_t n = ev.context().n();
    for (int64_t x : v) {
        if (broadcast) {
            std::vector<int64_t> all(n, x);
            t.messages.push_back(ev.lift(all));
        } else {
            std::vector<int64_t> one{x};
            t.messages.push_back(ev.lift(one));
        }
    }
    return t;
}

EncodedTensor encode_convolution(Evaluator& ev, const std::vector<int64_t>& image,
                                 const ConvGeometry& g, bool row_split) {
    require(image.size() == static_cast<size_t>(g.channels) * g.in_h * g.in_w,
            "image size does not match geometry");
    const uint32_t n = ev.context().n();
    const uint32_t half = n / 2;
    const uint32_t positions = g.positions();
    const uint32_t r = g.window_volume();
    require(positions <= n, "more window positions than slots");

    std::vector<uint32_t> layout(positions);
    if (row_split) {
        const uint32_t split = (positions + 1) / 2;
        require(split <= half && positions - split <= half, "row split overflow");
        for (uint32_t w = 0; w < positions; ++w)
            layout[w] = w < split ? w : half + (w - split);
    } else {
        for (uint32_t w = 0; w < positions; ++w) layout[w] = w;
    }

    EncodedTensor t;
    t.rep.kind = RepKind::Convolution;
    t.rep.length = positions;
    t.rep.windows = r;
    if (row_split) t.rep.slot_of = layout;
    for (uint32_t j = 0; j < r; ++j) {
        std::vector<int64_t> slots(n, 0);
        for (uint32_t w = 0; w < positions; ++w) {
            auto src = g.tap(j, w);
            slots[layout[w]] = src ? image[*src] : 0;
        }
        t.messages.push_back(ev.lift(slots));
    }
    return t;
}

EncodedTensor encode_simd(Evaluator& ev, const std::vector<std::vector<int64_t>>& records) {
    require(!records.empty(), "no records");
    const size_t features = records[0].size();
    require(records.size() <= ev.context().n(), "more records than slots");
    for (const auto& rec : records)
        require(rec.size() == features, "ragged records");
    EncodedTensor t;
    t.rep.kind = RepKind::Simd;
    t.rep.length = features;
    t.rep.copies = static_cast<uint32_t>(records.size());
    for (size_t j = 0; j < features; ++j) {
        std::vector<int64_t> slots(records.size());
        for (size_t i = 0; i < records.size(); ++i) slots[i] = records[i][j];
        t.messages.push_back(ev.lift(slots));
    }
    return t;
}

std::vector<BigInt> decode(Evaluator& ev, const EncodedTensor& t) {
    switch (t.rep.kind) {
        case RepKind::Dense:
        case RepKind::Interleaved:
        case RepKind::Stacked:
        case RepKind::Convolution: {
            // Multi-message tensors are part lists sharing one layout; values
            // come out part-major.
            require(!t.messages.empty(), "empty tensor");
            std::vector<BigInt> out;
            out.reserve(t.messages.size() * t.rep.length);
            for (const auto& m : t.messages) {
                auto slots = ev.lower(m);
                for (uint64_t i = 0; i < t.rep.length; ++i) out.push_back(slots[t.rep.slot(i)]);
            }
            return out;
        }
        case RepKind::Sparse: {
            require(t.messages.size() == t.rep.length, "one message per value expected");
            std::vector<BigInt> out(t.rep.length);
            for (uint64_t i = 0; i < t.rep.length; ++i) {
                auto slots = ev.lower(t.messages[i]);
                out[i] = slots[t.rep.broadcast ? 0 : t.rep.value_slot];
            }
            return out;
        }
        case RepKind::Simd: {
            std::vector<BigInt> out;
            out.reserve(static_cast<size_t>(t.rep.copies) * t.messages.size());
            std::vector<std::vector<BigInt>> cols;
            cols.reserve(t.messages.size());
            for (const auto& m : t.messages) cols.push_back(ev.lower(m));
            for (uint32_t i = 0; i < t.rep.copies; ++i)
                for (const auto& col : cols) out.push_back(col[i]);
            return out;
        }
    }
    throw std::invalid_argument("unknown representation");
}

EncodedTensor stack_copies(Evaluator& ev, const EncodedTensor& t, uint32_t copies) {
    require(t.messages.size() == 1, "stacking expects a single message");
    require(t.rep.kind == RepKind::Dense || t.rep.kind == RepKind::Interleaved,
            "stacking expects a dense or interleaved layout");
    require(!t.rep.dirty, "stacking would duplicate dirty slots");
    require(copies >= 1 && is_power_of_two(copies), "copies must be a power of two");
    const uint32_t n = ev.context().n();
    const uint32_t half = n / 2;
    const uint64_t pad = t.rep.pad ? t.rep.pad : pad_for(t.rep.length);
    require(pad * copies <= n, "copies do not fit the message");

    // Layout must sit in row 0 and hit each residue class mod pad at most
    // once, so the shifted copies interleave without collision.
    std::vector<char> cls(pad, 0);
    for (uint64_t i = 0; i < t.rep.length; ++i) {
        const uint32_t s = t.rep.slot(i);
        require(s < half, "stacking layout must stay in slot row 0");
        require(!cls[s % pad], "layout collides with itself mod pad");
        cls[s % pad] = 1;
    }

    EncodedTensor out;
    out.rep = t.rep;
    out.rep.kind = RepKind::Stacked;
    out.rep.pad = pad;
    out.rep.copies = copies;
    Message m = t.messages[0];
    for (uint64_t shift = pad; shift < pad * copies; shift <<= 1) {
        Message moved = shift == half ? ev.rotate_rows(m)
                                      : ev.rotate_bundle(m, static_cast<uint32_t>(shift));
        m = ev.add(m, moved);
    }
    out.messages.push_back(std::move(m));
    return out;
}

EncodedTensor combine_to_one(Evaluator& ev, const EncodedTensor& parts,
                             const std::vector<uint32_t>& offsets, uint64_t logical_limit) {
    require(!parts.messages.empty(), "nothing to combine");
    require(offsets.size() == parts.messages.size(), "one offset per part required");
    require(!parts.rep.dirty, "combining dirty parts would mix garbage");
    const uint32_t n = ev.context().n();
    const uint32_t half = n / 2;
    const uint64_t per_part = parts.rep.length;

    uint64_t total = per_part * parts.messages.size();
    if (logical_limit) {
        require(logical_limit <= total, "limit exceeds combined length");
        total = logical_limit;
    }

    std::vector<char> used(n, 0);
    std::vector<uint32_t> slot_of(total);
    for (size_t p = 0; p < parts.messages.size(); ++p) {
        for (uint64_t j = 0; j < per_part; ++j) {
            const uint64_t idx = p * per_part + j;
            const uint32_t s = shifted_slot(parts.rep.slot(j), offsets[p], half);
            require(!used[s], "combined parts collide");
            used[s] = 1;
            // Slots past the logical limit carry values that are zero by
            // construction; they claim no layout entry but still may not
            // land on a live slot.
            if (idx < total) slot_of[idx] = s;
        }
    }

    Message acc = offsets[0] ? ev.rotate_bundle(parts.messages[0], offsets[0]) : parts.messages[0];
    for (size_t p = 1; p < parts.messages.size(); ++p) {
        Message moved = offsets[p] ? ev.rotate_bundle(parts.messages[p], offsets[p]) : parts.messages[p];
        acc = ev.add(acc, moved);
    }

    EncodedTensor out;
    out.rep.kind = RepKind::Interleaved;
    out.rep.length = total;
    out.rep.pad = pad_for(total);
    out.rep.slot_of = std::move(slot_of);
    if (out.rep.identity_layout()) {
        out.rep.kind = RepKind::Dense;
        out.rep.slot_of.clear();
    }
    out.messages.push_back(std::move(acc));
    return out;
}

EncodedTensor sparse_to_dense(Evaluator& ev, const EncodedTensor& t,
                              const std::vector<uint32_t>& targets) {
    require(t.rep.kind == RepKind::Sparse, "expected a sparse tensor");
    require(t.rep.broadcast, "only broadcast sparse values can be re-slotted");
    const uint32_t n = ev.context().n();
    std::vector<uint32_t> where = targets;
    if (where.empty()) {
        where.resize(t.rep.length);
        for (uint64_t i = 0; i < t.rep.length; ++i) where[i] = static_cast<uint32_t>(i);
    }
    require(where.size() == t.rep.length, "one target slot per value required");
    std::vector<char> seen(n, 0);
    for (uint32_t s : where) {
        require(s < n, "target slot out of range");
        require(!seen[s], "duplicate target slot");
        seen[s] = 1;
    }

    Message acc;
    for (uint64_t i = 0; i < t.rep.length; ++i) {
        std::vector<uint8_t> bits(n, 0);
        bits[where[i]] = 1;
        Message picked = ev.mask(t.messages[i], bits);
        acc = i == 0 ? picked : ev.add(acc, picked);
    }

    EncodedTensor out;
    out.rep.kind = RepKind::Interleaved;
    out.rep.length = t.rep.length;
    out.rep.pad = pad_for(t.rep.length);
    out.rep.slot_of = std::move(where);
    if (out.rep.identity_layout()) {
        out.rep.kind = RepKind::Dense;
        out.rep.slot_of.clear();
    }
    out.messages.push_back(std::move(acc));
    return out;
}

EncodedTensor mask_active(Evaluator& ev, const EncodedTensor& t) {
    require(t.rep.kind == RepKind::Dense || t.rep.kind == RepKind::Interleaved,
            "masking expects a dense or interleaved layout");
    require(!t.messages.empty() && t.rep.length > 0, "nothing to mask");
    const uint32_t n = ev.context().n();
    std::vector<uint8_t> bits(n, 0);
    for (uint64_t i = 0; i < t.rep.length; ++i) bits[t.rep.slot(i)] = 1;
    EncodedTensor out;
    out.rep = t.rep;
    out.rep.dirty = false;
    for (const auto& m : t.messages) out.messages.push_back(ev.mask(m, bits));
    return out;
}

std::vector<BigInt> decode_convolution_image(Evaluator& ev, const EncodedTensor& t,
                                             const ConvGeometry& g) {
    require(t.rep.kind == RepKind::Convolution, "expected a convolution tensor");
    require(t.messages.size() == g.window_volume(), "message count does not match geometry");
    std::vector<BigInt> image(static_cast<size_t>(g.channels) * g.in_h * g.in_w, 0);
    std::vector<char> written(image.size(), 0);
    for (uint32_t j = 0; j < t.messages.size(); ++j) {
        auto slots = ev.lower(t.messages[j]);
        for (uint32_t w = 0; w < g.positions(); ++w) {
            auto src = g.tap(j, w);
            if (!src || written[*src]) continue;
            image[*src] = slots[t.rep.slot(w)];
            written[*src] = 1;
        }
    }
    return image;
}

std::vector<uint32_t> window_grid_slots(const ConvGeometry& g, uint32_t row_stride) {
    const uint32_t oh = g.out_h(), ow = g.out_w();
    std::vector<uint32_t> base(static_cast<size_t>(oh) * ow);
    for (uint32_t a = 0; a < oh; ++a)
        for (uint32_t b = 0; b < ow; ++b)
            base[static_cast<size_t>(a) * ow + b] = a * g.stride_h * row_stride + b * g.stride_w;
    return base;
}

EncodedTensor dense_to_convolution(Evaluator& ev, const EncodedTensor& d,
                                   const ConvGeometry& g, uint32_t row_stride) {
    require(d.messages.size() == 1 && d.rep.kind == RepKind::Dense,
            "mask source must be a single dense message");
    const uint32_t n = ev.context().n();
    const uint32_t half = n / 2;
    const uint32_t r = g.window_volume();
    const uint32_t positions = g.positions();
    const auto base = window_grid_slots(g, row_stride);

    EncodedTensor out;
    out.rep.kind = RepKind::Convolution;
    out.rep.length = positions;
    out.rep.windows = r;
    out.rep.slot_of = base;

    for (uint32_t j = 0; j < r; ++j) {
        const uint32_t c = j / (g.win_h * g.win_w);
        const uint32_t dy = (j / g.win_w) % g.win_h;
        const uint32_t dx = j % g.win_w;
        const int64_t offset = static_cast<int64_t>(c) * g.in_h * row_stride +
                               (static_cast<int64_t>(dy) - g.pad_top) * row_stride +
                               (static_cast<int64_t>(dx) - g.pad_left);
        std::vector<uint8_t> bits(n, 0);
        bool any = false;
        for (uint32_t w = 0; w < positions; ++w) {
            if (!g.tap(j, w)) continue;  // tap in the zero padding
            const int64_t s = base[w] + offset;
            require(s >= 0 && s < half, "masked window leaves slot row 0");
            bits[static_cast<uint32_t>(s)] = 1;
            any = true;
        }
        require(any, "window offset reads only padding");
        Message picked = ev.mask(d.messages[0], bits);
        out.messages.push_back(offset != 0 ? bundle_signed(ev, picked, -offset)
                                           : std::move(picked));
    }
    return out;
}

MaskPacking find_mask_packing(const ConvGeometry& g, uint32_t maps, uint64_t pad, uint32_t n) {
    const uint32_t half = n / 2;
    for (uint32_t stride = g.in_w; stride <= g.in_w + 256; ++stride) {
        const uint64_t span = static_cast<uint64_t>(g.channels) * g.in_h * stride;
        if (span > half) break;  // wider strides only grow the footprint
        const auto base = window_grid_slots(g, stride);
        const uint32_t top = *std::max_element(base.begin(), base.end());

        std::vector<char> self(pad, 0);
        bool injective = true;
        for (uint32_t s : base) {
            if (self[s % pad]) {
                injective = false;
                break;
            }
            self[s % pad] = 1;
        }
        if (!injective) continue;

        std::vector<char> used(pad, 0);
        std::vector<uint32_t> shifts;
        for (uint64_t s = 0; s < pad && shifts.size() < maps; ++s) {
            if (top + s >= half) break;  // keep every shifted grid in row 0
            bool ok = true;
            for (uint32_t b : base) {
                if (used[(b + s) % pad]) {
                    ok = false;
                    break;
                }
            }
            if (!ok) continue;
            for (uint32_t b : base) used[(b + s) % pad] = 1;
            shifts.push_back(static_cast<uint32_t>(s));
        }
        if (shifts.size() == maps) return {stride, std::move(shifts)};
    }
    throw std::invalid_argument("no row stride packs the window grids disjointly");
}

std::vector<uint32_t> uniform_offsets(uint32_t parts, uint32_t stride) {
    std::vector<uint32_t> out(parts);
    for (uint32_t i = 0; i < parts; ++i) out[i] = i * stride;
    return out;
}

}  // namespace packnn
