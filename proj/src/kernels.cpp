#include "packnn/kernels.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <stdexcept>
#include <thread>

#include "packnn/modular.hpp"

namespace packnn {

namespace {

void require(bool cond, const char* what) {
    if (!cond) throw std::invalid_argument(what);
}

uint32_t stages_of(uint64_t span) {
    return static_cast<uint32_t>(std::countr_zero(span));
}

// Rotate-add ladder of sizes 1, 2, ..., span/2. toward_low pulls sums down
// to slot 0 (window [s, s+span)); otherwise sums accumulate at window ends
// (window (s-span, s]). A size of n/2 is the row swap.
Message reduce_rotate_add(Evaluator& ev, Message m, uint64_t span, bool toward_low) {
    const uint32_t half = ev.context().half();
    for (uint64_t size = 1; size < span; size <<= 1) {
        Message moved = size == half ? ev.rotate_rows(m)
                                     : ev.rotate_columns(m, toward_low
                                                                ? -static_cast<int64_t>(size)
                                                                : static_cast<int64_t>(size));
        m = ev.add(m, moved);
    }
    return m;
}

std::atomic<uint32_t> g_kernel_threads{1};

}  // namespace

void set_kernel_threads(uint32_t threads) { g_kernel_threads.store(threads == 0 ? 1 : threads); }

uint32_t kernel_threads() { return g_kernel_threads.load(); }

RowMajorWeights weights_from(std::vector<std::vector<int64_t>> w) {
    RowMajorWeights W;
    W.rows = w.size();
    W.cols = w.empty() ? 0 : w[0].size();
    for (const auto& row : w) require(row.size() == W.cols, "ragged weight rows");
    auto data = std::make_shared<const std::vector<std::vector<int64_t>>>(std::move(w));
    W.at = [data](uint64_t r, uint64_t c) { return (*data)[r][c]; };
    return W;
}

uint64_t reduction_span(const Representation& rep, uint32_t n) {
    require(rep.length > 0, "empty layout");
    const uint32_t half = n / 2;
    uint32_t max_slot = 0;
    for (uint64_t i = 0; i < rep.length; ++i) max_slot = std::max(max_slot, rep.slot(i));
    require(max_slot < n, "layout slot out of range");
    return max_slot < half ? pad_for(max_slot + 1) : n;
}

CounterDelta dot_product_cost(uint32_t n, uint64_t span) {
    const uint32_t stages = stages_of(span);
    CounterDelta d;
    d.ct_plain_mul = 1;
    d.rot_rows = (span == n && stages > 0) ? 1 : 0;
    d.rot_cols = stages - d.rot_rows;
    d.add = stages;
    return d;
}

CounterDelta matvec_rowmajor_cost(uint32_t n, uint64_t span, uint64_t rows) {
    CounterDelta one = dot_product_cost(n, span);
    CounterDelta d;
    d.ct_plain_mul = rows * one.ct_plain_mul;
    d.rot_cols = rows * one.rot_cols;
    d.rot_rows = rows * one.rot_rows;
    d.add = rows * one.add;
    return d;
}

CounterDelta matvec_colmajor_cost(uint64_t cols) {
    CounterDelta d;
    d.ct_plain_mul = cols;
    d.add = cols ? cols - 1 : 0;
    return d;
}

CounterDelta matvec_stacked_cost(uint32_t n, uint64_t pad, uint32_t copies, uint64_t rows) {
    const uint64_t calls = (rows + copies - 1) / copies;
    const uint32_t stages = stages_of(pad);
    CounterDelta d;
    d.ct_plain_mul = calls;
    d.rot_rows = (pad == n && stages > 0) ? calls : 0;
    d.rot_cols = calls * stages - d.rot_rows;
    d.add = calls * stages;
    return d;
}

CounterDelta conv_rowmajor_cost(uint64_t maps, uint64_t windows) {
    CounterDelta d;
    d.scalar_mul = maps * windows;
    d.add = windows ? maps * (windows - 1) : 0;
    return d;
}

CounterDelta square_cost(uint64_t messages) {
    CounterDelta d;
    d.ct_ct_mul = messages;
    return d;
}

CounterDelta simd_dense_cost(uint64_t nodes, uint64_t fan_in) {
    CounterDelta d;
    d.scalar_mul = nodes * fan_in;
    d.add = fan_in ? nodes * (fan_in - 1) : 0;
    return d;
}

CounterDelta add_bias_cost(uint64_t messages) {
    CounterDelta d;
    d.add = messages;
    return d;
}

CounterDelta mask_active_cost(uint64_t messages) {
    CounterDelta d;
    d.mask_mul = messages;
    d.ct_plain_mul = messages;
    return d;
}

Message dot_product(Evaluator& ev, const Message& v, std::span<const int64_t> w_by_slot,
                    uint64_t span) {
    const uint32_t n = ev.context().n();
    require(span >= 1 && is_power_of_two(span) && span <= n, "bad reduction span");
    require(w_by_slot.size() == n, "weights must cover every slot");
    Message m = ev.mul_plain(v, w_by_slot);
    return reduce_rotate_add(ev, std::move(m), span, true);
}

EncodedTensor matvec_rowmajor(Evaluator& ev, const EncodedTensor& x, const RowMajorWeights& W) {
    require(x.messages.size() == 1, "row-major multiply expects a single message");
    require(x.rep.kind == RepKind::Dense || x.rep.kind == RepKind::Interleaved,
            "row-major multiply expects a dense or interleaved vector");
    require(W.at && W.rows >= 1, "missing weights");
    require(W.cols == x.rep.length, "weight columns do not match vector length");
    const uint32_t n = ev.context().n();
    const uint64_t span = reduction_span(x.rep, n);

    EncodedTensor out;
    out.rep.kind = RepKind::Sparse;
    out.rep.length = W.rows;
    out.rep.broadcast = span == n;
    out.rep.value_slot = 0;
    out.rep.dirty = !out.rep.broadcast;
    const uint64_t rows = W.rows;
    const uint32_t threads = std::min<uint64_t>(kernel_threads(), rows);
    if (threads <= 1) {
        std::vector<int64_t> w(n);
        for (uint64_t row = 0; row < rows; ++row) {
            std::fill(w.begin(), w.end(), 0);
            for (uint64_t i = 0; i < W.cols; ++i) w[x.rep.slot(i)] = W.at(row, i);
            out.messages.push_back(dot_product(ev, x.messages[0], w, span));
        }
        return out;
    }

    // Each worker owns a forked evaluator and a contiguous row chunk; the
    // forks are absorbed in chunk order, so counters and output do not
    // depend on the thread count.
    out.messages.resize(rows);
    std::vector<Evaluator> forks;
    forks.reserve(threads);
    for (uint32_t t = 0; t < threads; ++t) forks.push_back(ev.fork());
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (uint32_t t = 0; t < threads; ++t) {
        const uint64_t lo = rows * t / threads;
        const uint64_t hi = rows * (t + 1) / threads;
        pool.emplace_back([&, t, lo, hi] {
            std::vector<int64_t> w(n);
            for (uint64_t row = lo; row < hi; ++row) {
                std::fill(w.begin(), w.end(), 0);
                for (uint64_t i = 0; i < W.cols; ++i) w[x.rep.slot(i)] = W.at(row, i);
                out.messages[row] = dot_product(forks[t], x.messages[0], w, span);
            }
        });
    }
    for (auto& worker : pool) worker.join();
    for (const auto& forked : forks) ev.absorb(forked);
    return out;
}

EncodedTensor matvec_colmajor(Evaluator& ev, const EncodedTensor& x, const RowMajorWeights& W) {
    require(x.rep.kind == RepKind::Sparse && x.rep.broadcast,
            "column-major multiply expects a broadcast sparse vector");
    require(x.messages.size() == x.rep.length && x.rep.length >= 1, "bad sparse tensor");
    require(W.at && W.cols == x.rep.length, "weight columns do not match vector length");
    const uint32_t n = ev.context().n();
    require(W.rows >= 1 && W.rows <= n, "row count must fit one message");

    Message acc;
    std::vector<int64_t> col(n);
    for (uint64_t i = 0; i < W.cols; ++i) {
        std::fill(col.begin(), col.end(), 0);
        for (uint64_t j = 0; j < W.rows; ++j) col[j] = W.at(j, i);
        Message term = ev.mul_plain(x.messages[i], col);
        acc = i == 0 ? std::move(term) : ev.add(acc, term);
    }

    EncodedTensor out;
    out.rep.kind = RepKind::Dense;
    out.rep.length = W.rows;
    out.rep.pad = pad_for(W.rows);
    out.messages.push_back(std::move(acc));
    return out;
}

EncodedTensor matvec_stacked_rowmajor(Evaluator& ev, const EncodedTensor& x,
                                      const RowMajorWeights& W) {
    require(x.rep.kind == RepKind::Stacked && x.messages.size() == 1,
            "stacked multiply expects a single stacked message");
    require(W.at && W.rows >= 1, "missing weights");
    require(W.cols == x.rep.length, "weight columns do not match vector length");
    const uint32_t n = ev.context().n();
    const uint64_t pad = x.rep.pad;
    const uint32_t copies = x.rep.copies;
    require(pad >= 2 && is_power_of_two(pad), "bad stacked pad");
    require(static_cast<uint64_t>(copies) * pad == n, "stacked vector must fill the message");

    // Every pad-wide segment holds one copy of each value at the slot class
    // slot_of(i) mod pad, so row d of a call goes to segment d by class.
    std::vector<char> cls(pad, 0);
    for (uint64_t i = 0; i < x.rep.length; ++i) {
        const uint32_t c = x.rep.slot(i) & (pad - 1);
        require(!cls[c], "stacked layout collides mod pad");
        cls[c] = 1;
    }

    const uint64_t calls = (W.rows + copies - 1) / copies;
    EncodedTensor out;
    out.rep.kind = RepKind::Interleaved;
    out.rep.length = copies;
    out.rep.pad = pad_for(copies);
    out.rep.dirty = true;
    out.rep.slot_of.resize(copies);
    for (uint32_t d = 0; d < copies; ++d)
        out.rep.slot_of[d] = static_cast<uint32_t>((d + 1) * pad - 1);

    std::vector<int64_t> w(n);
    for (uint64_t c = 0; c < calls; ++c) {
        std::fill(w.begin(), w.end(), 0);
        for (uint32_t d = 0; d < copies; ++d) {
            const uint64_t row = c * copies + d;
            if (row >= W.rows) break;
            for (uint64_t i = 0; i < W.cols; ++i)
                w[d * pad + (x.rep.slot(i) & (pad - 1))] = W.at(row, i);
        }
        Message m = ev.mul_plain(x.messages[0], w);
        out.messages.push_back(reduce_rotate_add(ev, std::move(m), pad, false));
    }
    return out;
}

EncodedTensor conv_rowmajor(Evaluator& ev, const EncodedTensor& x, const RowMajorWeights& W) {
    require(x.rep.kind == RepKind::Convolution, "expected a convolution tensor");
    require(x.messages.size() == x.rep.windows && x.rep.windows >= 1,
            "window count does not match messages");
    require(W.at && W.rows >= 1, "missing weights");
    require(W.cols == x.rep.windows, "weight columns do not match window count");

    EncodedTensor out;
    out.rep.kind = RepKind::Interleaved;
    out.rep.length = x.rep.length;
    out.rep.pad = pad_for(x.rep.length);
    out.rep.slot_of = x.rep.slot_of;
    if (out.rep.identity_layout()) {
        out.rep.kind = RepKind::Dense;
        out.rep.slot_of.clear();
    }
    for (uint64_t map = 0; map < W.rows; ++map) {
        Message acc = ev.mul_scalar(x.messages[0], W.at(map, 0));
        for (uint64_t j = 1; j < W.cols; ++j)
            acc = ev.add(acc, ev.mul_scalar(x.messages[j], W.at(map, j)));
        out.messages.push_back(std::move(acc));
    }
    return out;
}

EncodedTensor square_activation(Evaluator& ev, const EncodedTensor& x) {
    require(!x.messages.empty(), "empty tensor");
    EncodedTensor out;
    out.rep = x.rep;
    for (const auto& m : x.messages) out.messages.push_back(ev.mul(m, m));
    return out;
}

EncodedTensor simd_dense(Evaluator& ev, const EncodedTensor& x, const RowMajorWeights& W) {
    require(x.rep.kind == RepKind::Simd, "expected a record tensor");
    require(x.messages.size() == x.rep.length && x.rep.length >= 1, "bad record tensor");
    require(W.at && W.rows >= 1, "missing weights");
    require(W.cols == x.rep.length, "weight columns do not match feature count");

    EncodedTensor out;
    out.rep = x.rep;
    out.rep.length = W.rows;
    for (uint64_t node = 0; node < W.rows; ++node) {
        Message acc = ev.mul_scalar(x.messages[0], W.at(node, 0));
        for (uint64_t i = 1; i < W.cols; ++i)
            acc = ev.add(acc, ev.mul_scalar(x.messages[i], W.at(node, i)));
        out.messages.push_back(std::move(acc));
    }
    return out;
}

EncodedTensor add_bias(Evaluator& ev, const EncodedTensor& x, const std::vector<int64_t>& bias) {
    require(!x.messages.empty(), "empty tensor");
    const uint32_t n = ev.context().n();
    EncodedTensor out;
    out.rep = x.rep;
    if (x.rep.kind == RepKind::Sparse) {
        require(bias.size() == x.messages.size(), "one bias per message required");
        std::vector<int64_t> b(n);
        for (size_t i = 0; i < x.messages.size(); ++i) {
            std::fill(b.begin(), b.end(), 0);
            if (x.rep.broadcast)
                std::fill(b.begin(), b.end(), bias[i]);
            else
                b[x.rep.value_slot] = bias[i];
            out.messages.push_back(ev.add_plain(x.messages[i], b));
        }
        return out;
    }
    if (x.rep.kind == RepKind::Simd) {
        require(bias.size() == x.messages.size(), "one bias per message required");
        std::vector<int64_t> b(n);
        for (size_t i = 0; i < x.messages.size(); ++i) {
            std::fill(b.begin(), b.end(), 0);
            for (uint32_t r = 0; r < x.rep.copies; ++r) b[r] = bias[i];
            out.messages.push_back(ev.add_plain(x.messages[i], b));
        }
        return out;
    }
    require(x.messages.size() == 1, "per-value bias needs a single message");
    require(bias.size() == x.rep.length, "one bias per value required");
    std::vector<int64_t> b(n, 0);
    for (uint64_t i = 0; i < x.rep.length; ++i) b[x.rep.slot(i)] = bias[i];
    out.messages.push_back(ev.add_plain(x.messages[0], b));
    return out;
}

}  // namespace packnn
