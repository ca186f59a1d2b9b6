#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "doctest.h"
#include "packnn/kernels.hpp"

using namespace packnn;

namespace {

const std::vector<uint64_t> kPrimes{998244353, 1004535809};

std::vector<int64_t> to_i64(const std::vector<BigInt>& v) {
    std::vector<int64_t> out(v.size());
    for (size_t i = 0; i < v.size(); ++i) out[i] = static_cast<int64_t>(v[i]);
    return out;
}

CounterDelta delta_of(Evaluator& ev, const CounterDelta& b) {
    CounterDelta d = ev.counters().ops;
    d.ct_ct_mul -= b.ct_ct_mul;
    d.ct_plain_mul -= b.ct_plain_mul;
    d.scalar_mul -= b.scalar_mul;
    d.mask_mul -= b.mask_mul;
    d.add -= b.add;
    d.rot_cols -= b.rot_cols;
    d.rot_rows -= b.rot_rows;
    return d;
}

// schoolbook W x for the oracle side
std::vector<int64_t> matmul(const std::vector<std::vector<int64_t>>& w,
                            const std::vector<int64_t>& x) {
    std::vector<int64_t> out(w.size(), 0);
    for (size_t r = 0; r < w.size(); ++r)
        for (size_t c = 0; c < x.size(); ++c) out[r] += w[r][c] * x[c];
    return out;
}

std::vector<std::vector<int64_t>> random_matrix(std::mt19937& rng, size_t rows, size_t cols,
                                                int64_t lo = -9, int64_t hi = 9) {
    std::uniform_int_distribution<int64_t> d(lo, hi);
    std::vector<std::vector<int64_t>> w(rows, std::vector<int64_t>(cols));
    for (auto& row : w)
        for (auto& v : row) v = d(rng);
    return w;
}

std::vector<int64_t> random_vector(std::mt19937& rng, size_t len, int64_t lo = -9,
                                   int64_t hi = 9) {
    std::uniform_int_distribution<int64_t> d(lo, hi);
    std::vector<int64_t> v(len);
    for (auto& x : v) x = d(rng);
    return v;
}

}  // namespace

TEST_CASE("reduction span follows the layout, not the advisory pad") {
    Representation dense;
    dense.length = 845;
    dense.pad = 4;  // deliberately wrong
    CHECK(reduction_span(dense, 8192) == 1024);

    Representation tight;
    tight.length = 4096;
    CHECK(reduction_span(tight, 8192) == 4096);

    Representation spread;
    spread.length = 3;
    spread.slot_of = {0, 5, 100};
    CHECK(reduction_span(spread, 8192) == 128);

    Representation both_rows;
    both_rows.length = 2;
    both_rows.slot_of = {0, 5000};
    CHECK(reduction_span(both_rows, 8192) == 8192);
}

TEST_CASE("dot product of a full message broadcasts the sum everywhere") {
    EvalContext cx(BackendKind::Slot, 4, kPrimes);
    Evaluator ev(cx);
    Message v = ev.lift(std::vector<int64_t>{1, 2, 3, 4});
    std::vector<int64_t> w{1, 1, 1, 1};
    CounterDelta before = ev.counters().ops;
    Message r = dot_product(ev, v, w, 4);
    CHECK(to_i64(ev.lower(r)) == std::vector<int64_t>{10, 10, 10, 10});
    CounterDelta d = delta_of(ev, before);
    CHECK(d.ct_plain_mul == 1);
    CHECK(d.rot_cols == 1);
    CHECK(d.rot_rows == 1);  // the size-2 step is the row swap
    CHECK(d.add == 2);
    CHECK(d == dot_product_cost(4, 4));
}

TEST_CASE("dot product with a unit weight vector picks out one value") {
    EvalContext cx(BackendKind::Slot, 8, kPrimes);
    Evaluator ev(cx);
    Message v = ev.lift(std::vector<int64_t>{7, -3, 5, 2});
    std::vector<int64_t> w(8, 0);
    w[1] = 1;
    Message r = dot_product(ev, v, w, 4);
    CHECK(static_cast<int64_t>(ev.lower(r)[0]) == -3);
}

TEST_CASE("padded dot product lands at slot 0 with the pinned cost") {
    EvalContext cx(BackendKind::Slot, 8192, {998244353});
    Evaluator ev(cx);
    std::vector<int64_t> v(4096), w(8192, 0);
    for (size_t i = 0; i < v.size(); ++i) {
        v[i] = static_cast<int64_t>(i % 23) - 11;
        w[i] = static_cast<int64_t>(i % 17) - 8;
    }
    int64_t want = 0;
    for (size_t i = 0; i < v.size(); ++i) want += v[i] * w[i];
    Message m = ev.lift(v);
    CounterDelta before = ev.counters().ops;
    Message r = dot_product(ev, m, w, 4096);
    CounterDelta d = delta_of(ev, before);
    CHECK(d.ct_plain_mul == 1);
    CHECK(d.rot_cols == 12);
    CHECK(d.rot_rows == 0);
    CHECK(d.add == 12);
    CHECK(static_cast<int64_t>(ev.lower(r)[0]) == want);
}

TEST_CASE("row-major matvec on an identity matrix routes values to slot 0") {
    EvalContext cx(BackendKind::Slot, 8, kPrimes);
    Evaluator ev(cx);
    auto x = encode_dense(ev, {4, -6});
    auto out = matvec_rowmajor(ev, x, weights_from({{1, 0}, {0, 1}}));
    CHECK(out.rep.kind == RepKind::Sparse);
    CHECK(out.rep.length == 2);
    CHECK_FALSE(out.rep.broadcast);
    CHECK(out.rep.dirty);
    CHECK(to_i64(decode(ev, out)) == std::vector<int64_t>{4, -6});
}

TEST_CASE("row-major matvec matches the schoolbook oracle on both backends") {
    std::mt19937 rng(20240817);
    for (BackendKind kind : {BackendKind::Slot, BackendKind::Ring}) {
        EvalContext cx(kind, 128, kPrimes);
        for (int trial = 0; trial < 40; ++trial) {
            Evaluator ev(cx);
            const size_t k = 1 + rng() % 64;
            const size_t r = 1 + rng() % 16;
            auto w = random_matrix(rng, r, k);
            auto x = random_vector(rng, k);
            auto t = encode_dense(ev, x);
            CounterDelta before = ev.counters().ops;
            auto out = matvec_rowmajor(ev, t, weights_from(w));
            CHECK(delta_of(ev, before) ==
                  matvec_rowmajor_cost(128, reduction_span(t.rep, 128), r));
            CHECK(to_i64(decode(ev, out)) == matmul(w, x));
        }
    }
}

TEST_CASE("row-major matvec follows an interleaved layout") {
    std::mt19937 rng(7);
    EvalContext cx(BackendKind::Slot, 64, kPrimes);
    for (int trial = 0; trial < 30; ++trial) {
        Evaluator ev(cx);
        const size_t k = 1 + rng() % 20;
        const size_t r = 1 + rng() % 8;
        // random injective slot assignment across both rows
        std::vector<uint32_t> slots(64);
        std::iota(slots.begin(), slots.end(), 0);
        std::shuffle(slots.begin(), slots.end(), rng);
        slots.resize(k);
        auto x = random_vector(rng, k);
        std::vector<int64_t> phys(64, 0);
        for (size_t i = 0; i < k; ++i) phys[slots[i]] = x[i];
        EncodedTensor t;
        t.rep.kind = RepKind::Interleaved;
        t.rep.length = k;
        t.rep.slot_of = slots;
        t.messages.push_back(ev.lift(phys));
        auto w = random_matrix(rng, r, k);
        auto out = matvec_rowmajor(ev, t, weights_from(w));
        CHECK(to_i64(decode(ev, out)) == matmul(w, x));
        if (out.rep.broadcast) {
            auto all = to_i64(ev.lower(out.messages[0]));
            for (int64_t s : all) CHECK(s == matmul(w, x)[0]);
        }
    }
}

TEST_CASE("row-major matvec squashes garbage outside the layout") {
    EvalContext cx(BackendKind::Slot, 8, kPrimes);
    Evaluator ev(cx);
    // values (3, 4) at slots 0, 1 plus garbage at slots 2..7
    EncodedTensor t;
    t.rep.kind = RepKind::Dense;
    t.rep.length = 2;
    t.rep.pad = 2;
    t.rep.dirty = true;
    t.messages.push_back(ev.lift(std::vector<int64_t>{3, 4, 99, -99, 55, 44, 33, 22}));
    auto out = matvec_rowmajor(ev, t, weights_from({{2, 5}}));
    CHECK(static_cast<int64_t>(ev.lower(out.messages[0])[0]) == 26);
}

TEST_CASE("column-major matvec sums scaled columns into one dense message") {
    EvalContext cx(BackendKind::Slot, 8, kPrimes);
    Evaluator ev(cx);
    auto x = encode_sparse(ev, {3, -2});
    CounterDelta before = ev.counters().ops;
    auto out = matvec_colmajor(ev, x, weights_from({{1, 0}, {0, 1}, {4, 5}}));
    CounterDelta d = delta_of(ev, before);
    CHECK(d.ct_plain_mul == 2);
    CHECK(d.add == 1);
    CHECK(d.rotations() == 0);
    CHECK(d == matvec_colmajor_cost(2));
    CHECK(out.rep.kind == RepKind::Dense);
    CHECK_FALSE(out.rep.dirty);
    CHECK(to_i64(decode(ev, out)) == std::vector<int64_t>{3, -2, 2});
    // slots past the row count stay zero
    CHECK(static_cast<int64_t>(ev.lower(out.messages[0])[3]) == 0);
}

TEST_CASE("column-major matvec matches the schoolbook oracle on both backends") {
    std::mt19937 rng(20240818);
    for (BackendKind kind : {BackendKind::Slot, BackendKind::Ring}) {
        EvalContext cx(kind, 64, kPrimes);
        for (int trial = 0; trial < 30; ++trial) {
            Evaluator ev(cx);
            const size_t k = 1 + rng() % 12;
            const size_t r = 1 + rng() % 50;
            auto w = random_matrix(rng, r, k);
            auto x = random_vector(rng, k);
            auto t = encode_sparse(ev, x);
            CounterDelta before = ev.counters().ops;
            auto out = matvec_colmajor(ev, t, weights_from(w));
            CHECK(delta_of(ev, before) == matvec_colmajor_cost(k));
            CHECK(to_i64(decode(ev, out)) == matmul(w, x));
        }
    }
    EvalContext cx(BackendKind::Slot, 8, kPrimes);
    Evaluator ev(cx);
    auto narrow = encode_sparse(ev, {1, 2}, false);
    CHECK_THROWS_AS(matvec_colmajor(ev, narrow, weights_from({{1, 1}})), std::invalid_argument);
}

TEST_CASE("stacked matvec reproduces the 2x2 worked example") {
    EvalContext cx(BackendKind::Slot, 4, kPrimes);
    Evaluator ev(cx);
    auto v = stack_copies(ev, encode_dense(ev, {5, 7}), 2);
    CounterDelta before = ev.counters().ops;
    auto out = matvec_stacked_rowmajor(ev, v, weights_from({{1, 2}, {3, 4}}));
    CounterDelta d = delta_of(ev, before);
    CHECK(d.ct_plain_mul == 1);
    CHECK(d.rot_cols == 1);
    CHECK(d.add == 1);
    CHECK(d == matvec_stacked_cost(4, 2, 2, 2));
    CHECK(out.messages.size() == 1);
    CHECK(out.rep.slot_of == std::vector<uint32_t>{1, 3});
    CHECK(out.rep.dirty);
    auto slots = to_i64(ev.lower(out.messages[0]));
    CHECK(slots[1] == 1 * 5 + 2 * 7);   // second entry, first row's result
    CHECK(slots[3] == 3 * 5 + 4 * 7);   // fourth entry, second row's result
    CHECK(to_i64(decode(ev, out)) == std::vector<int64_t>{19, 43});
}

TEST_CASE("stacked matvec covers 16 rows in two calls at 64 slots") {
    std::mt19937 rng(99);
    for (BackendKind kind : {BackendKind::Slot, BackendKind::Ring}) {
        EvalContext cx(kind, 64, kPrimes);
        for (int trial = 0; trial < 25; ++trial) {
            Evaluator ev(cx);
            auto w = random_matrix(rng, 16, 8);
            auto x = random_vector(rng, 8);
            auto v = stack_copies(ev, encode_dense(ev, x), 8);
            CounterDelta before = ev.counters().ops;
            auto out = matvec_stacked_rowmajor(ev, v, weights_from(w));
            CHECK(out.messages.size() == 2);
            CHECK(delta_of(ev, before) == matvec_stacked_cost(64, 8, 8, 16));
            CHECK(to_i64(decode(ev, out)) == matmul(w, x));
        }
    }
}

TEST_CASE("stacked matvec zero-pads rows past the matrix") {
    std::mt19937 rng(123);
    EvalContext cx(BackendKind::Slot, 32, kPrimes);
    Evaluator ev(cx);
    auto w = random_matrix(rng, 5, 4);  // 5 rows on 8 copies: one call, 3 spare
    auto x = random_vector(rng, 4);
    auto v = stack_copies(ev, encode_dense(ev, x), 8);
    auto out = matvec_stacked_rowmajor(ev, v, weights_from(w));
    CHECK(out.messages.size() == 1);
    auto got = to_i64(decode(ev, out));
    auto want = matmul(w, x);
    want.resize(8, 0);  // spare rows read exactly zero
    CHECK(got == want);
    CHECK_THROWS_AS(matvec_stacked_rowmajor(ev, encode_dense(ev, x), weights_from(w)),
                    std::invalid_argument);
    auto short_stack = stack_copies(ev, encode_dense(ev, x), 4);  // 16 of 32 slots
    CHECK_THROWS_AS(matvec_stacked_rowmajor(ev, short_stack, weights_from(w)),
                    std::invalid_argument);
}

TEST_CASE("per-map window combination matches a direct convolution") {
    EvalContext cx(BackendKind::Slot, 8, kPrimes);
    Evaluator ev(cx);
    ConvGeometry g;
    g.in_h = 4;
    g.in_w = 4;
    g.win_h = 2;
    g.win_w = 2;
    g.stride_h = 2;
    g.stride_w = 2;
    std::vector<int64_t> image(16);
    std::iota(image.begin(), image.end(), 1);
    auto x = encode_convolution(ev, image, g);
    CounterDelta before = ev.counters().ops;
    auto out = conv_rowmajor(ev, x, weights_from({{1, 1, 1, 1}}));
    CounterDelta d = delta_of(ev, before);
    CHECK(d.scalar_mul == 4);
    CHECK(d.add == 3);
    CHECK(d == conv_rowmajor_cost(1, 4));
    // 2x2 block sums of a 4x4 image counted 1..16
    CHECK(to_i64(decode(ev, out)) == std::vector<int64_t>{14, 22, 46, 54});
    CHECK(out.rep.kind == RepKind::Dense);
    CHECK_FALSE(out.rep.dirty);
}

TEST_CASE("window combination with a unit weight row returns one tap message") {
    EvalContext cx(BackendKind::Slot, 8, kPrimes);
    Evaluator ev(cx);
    ConvGeometry g;
    g.in_h = 4;
    g.in_w = 4;
    g.win_h = 2;
    g.win_w = 2;
    g.stride_h = 2;
    g.stride_w = 2;
    std::vector<int64_t> image(16);
    std::iota(image.begin(), image.end(), 1);
    auto x = encode_convolution(ev, image, g);
    auto out = conv_rowmajor(ev, x, weights_from({{1, 0, 0, 0}}));
    // equals the first window message: the top-left tap of each position
    CHECK(to_i64(decode(ev, out)) == std::vector<int64_t>{1, 3, 9, 11});
}

TEST_CASE("window combination matches a sliding-window oracle on both backends") {
    std::mt19937 rng(20240819);
    for (BackendKind kind : {BackendKind::Slot, BackendKind::Ring}) {
        EvalContext cx(kind, 64, kPrimes);
        for (int trial = 0; trial < 20; ++trial) {
            Evaluator ev(cx);
            ConvGeometry g;
            g.in_h = 5;
            g.in_w = 6;
            g.channels = 1 + rng() % 2;
            g.win_h = 1 + rng() % 3;
            g.win_w = 1 + rng() % 3;
            g.stride_h = 1 + rng() % 2;
            g.stride_w = 1 + rng() % 2;
            g.pad_top = g.pad_left = g.pad_bottom = g.pad_right = rng() % 2;
            if (g.positions() > 32) continue;
            const uint32_t maps = 1 + rng() % 4;
            auto image = random_vector(rng, g.channels * 30);
            auto w = random_matrix(rng, maps, g.window_volume());
            auto x = encode_convolution(ev, image, g);
            CounterDelta before = ev.counters().ops;
            auto out = conv_rowmajor(ev, x, weights_from(w));
            CHECK(delta_of(ev, before) == conv_rowmajor_cost(maps, g.window_volume()));
            // oracle: direct strided convolution over the padded image
            std::vector<int64_t> want;
            for (uint32_t m = 0; m < maps; ++m)
                for (uint32_t pos = 0; pos < g.positions(); ++pos) {
                    int64_t acc = 0;
                    for (uint32_t j = 0; j < g.window_volume(); ++j) {
                        auto src = g.tap(j, pos);
                        if (src) acc += w[m][j] * image[*src];
                    }
                    want.push_back(acc);
                }
            CHECK(to_i64(decode(ev, out)) == want);
        }
    }
}

TEST_CASE("squaring squares every slot and costs one multiplication per message") {
    EvalContext cx(BackendKind::Slot, 8, kPrimes);
    Evaluator ev(cx);
    auto t = encode_dense(ev, {-2, 3, 0});
    CounterDelta before = ev.counters().ops;
    auto out = square_activation(ev, t);
    CounterDelta d = delta_of(ev, before);
    CHECK(d.ct_ct_mul == 1);
    CHECK(d == square_cost(1));
    CHECK(to_i64(decode(ev, out)) == std::vector<int64_t>{4, 9, 0});
    CHECK(out.messages[0].depth == 1);

    auto sp = encode_sparse(ev, {2, -5, 6});
    before = ev.counters().ops;
    auto sq = square_activation(ev, sp);
    CHECK(delta_of(ev, before) == square_cost(3));
    CHECK(to_i64(decode(ev, sq)) == std::vector<int64_t>{4, 25, 36});
}

TEST_CASE("record-per-slot dense layer multiplies every record at once") {
    EvalContext cx(BackendKind::Slot, 8, kPrimes);
    Evaluator ev(cx);
    std::vector<std::vector<int64_t>> records{{1, 2}, {3, 4}, {5, 6}};
    auto x = encode_simd(ev, records);
    CounterDelta before = ev.counters().ops;
    auto out = simd_dense(ev, x, weights_from({{1, 1}, {2, -1}, {0, 3}}));
    CounterDelta d = delta_of(ev, before);
    CHECK(d.scalar_mul == 6);
    CHECK(d.add == 3);
    CHECK(d == simd_dense_cost(3, 2));
    CHECK(out.rep.copies == 3);
    CHECK(out.messages.size() == 3);
    // record-major: each record's 3 node outputs in turn
    CHECK(to_i64(decode(ev, out)) ==
          std::vector<int64_t>{3, 0, 6, 7, 2, 12, 11, 4, 18});
}

TEST_CASE("biases add once per message and respect layouts") {
    EvalContext cx(BackendKind::Slot, 8, kPrimes);
    Evaluator ev(cx);

    auto dense = encode_dense(ev, {1, 2, 3});
    CounterDelta before = ev.counters().ops;
    auto out = add_bias(ev, dense, {10, 20, 30});
    CHECK(delta_of(ev, before).add == 1);
    CHECK(delta_of(ev, before) == add_bias_cost(1));
    CHECK(to_i64(decode(ev, out)) == std::vector<int64_t>{11, 22, 33});

    auto sparse = encode_sparse(ev, {5, 6});
    before = ev.counters().ops;
    auto sp = add_bias(ev, sparse, {-1, 4});
    CHECK(delta_of(ev, before).add == 2);
    CHECK(to_i64(decode(ev, sp)) == std::vector<int64_t>{4, 10});
    // broadcast preserved: every slot carries value + bias
    CHECK(to_i64(ev.lower(sp.messages[0])) == std::vector<int64_t>(8, 4));

    std::vector<std::vector<int64_t>> records{{1, 2}, {3, 4}};
    auto simd = encode_simd(ev, records);
    before = ev.counters().ops;
    auto sb = add_bias(ev, simd, {100, 200});
    CHECK(delta_of(ev, before).add == 2);
    CHECK(to_i64(decode(ev, sb)) == std::vector<int64_t>{101, 202, 103, 204});
    // record slots only: the unused tail stays zero
    CHECK(static_cast<int64_t>(ev.lower(sb.messages[0])[2]) == 0);

    CHECK_THROWS_AS(add_bias(ev, dense, {1, 2}), std::invalid_argument);
    CHECK_THROWS_AS(add_bias(ev, sparse, {1}), std::invalid_argument);
}

TEST_CASE("masking to the layout clears garbage and the dirty flag") {
    EvalContext cx(BackendKind::Slot, 8, kPrimes);
    Evaluator ev(cx);
    EncodedTensor t;
    t.rep.kind = RepKind::Interleaved;
    t.rep.length = 2;
    t.rep.slot_of = {1, 3};
    t.rep.dirty = true;
    t.messages.push_back(ev.lift(std::vector<int64_t>{9, 4, 9, 7, 9, 9, 9, 9}));
    CounterDelta before = ev.counters().ops;
    auto out = mask_active(ev, t);
    CounterDelta d = delta_of(ev, before);
    CHECK(d.mask_mul == 1);
    CHECK(d.ct_plain_mul == 1);
    CHECK(d == mask_active_cost(1));
    CHECK_FALSE(out.rep.dirty);
    CHECK(to_i64(ev.lower(out.messages[0])) == std::vector<int64_t>{0, 4, 0, 7, 0, 0, 0, 0});
}

TEST_CASE("stack, multiply, mask, and combine reproduce a 100-row dense layer") {
    std::mt19937 rng(20240820);
    EvalContext cx(BackendKind::Slot, 8192, kPrimes);
    Evaluator ev(cx);
    auto x = random_vector(rng, 845, -3, 3);
    auto w1 = random_matrix(rng, 100, 845, -3, 3);

    auto dense = encode_dense(ev, x);
    CounterDelta before = ev.counters().ops;
    auto stacked = stack_copies(ev, dense, 8);
    CounterDelta d_stack = delta_of(ev, before);
    CHECK(d_stack.rot_cols == 2);
    CHECK(d_stack.rot_rows == 1);
    CHECK(d_stack.add == 3);

    before = ev.counters().ops;
    auto parts = matvec_stacked_rowmajor(ev, stacked, weights_from(w1));
    CHECK(parts.messages.size() == 13);
    CHECK(delta_of(ev, before) == matvec_stacked_cost(8192, 1024, 8, 100));

    // dirty parts cannot be combined directly
    CHECK_THROWS_AS(combine_to_one(ev, parts, uniform_offsets(13, 1)), std::invalid_argument);

    before = ev.counters().ops;
    auto masked = mask_active(ev, parts);
    CHECK(delta_of(ev, before) == mask_active_cost(13));

    before = ev.counters().ops;
    auto merged = combine_to_one(ev, masked, uniform_offsets(13, 1), 100);
    CounterDelta d_comb = delta_of(ev, before);
    CHECK(d_comb.rot_cols == 12);
    CHECK(d_comb.add == 12);
    CHECK(merged.rep.length == 100);
    CHECK(to_i64(decode(ev, merged)) == matmul(w1, x));

    // follow through the tail of the pipeline: square then a 10-row layer
    auto squared = square_activation(ev, merged);
    auto sq = matmul(w1, x);
    for (auto& v : sq) v *= v;
    CHECK(to_i64(decode(ev, squared)) == sq);

    auto w2 = random_matrix(rng, 10, 100, -3, 3);
    CHECK(reduction_span(squared.rep, 8192) == 8192);  // layout spans both rows
    before = ev.counters().ops;
    auto scores = matvec_rowmajor(ev, squared, weights_from(w2));
    CounterDelta d_out = delta_of(ev, before);
    CHECK(d_out == matvec_rowmajor_cost(8192, 8192, 10));
    CHECK(d_out.rot_rows == 10);
    CHECK(scores.rep.broadcast);
    CHECK_FALSE(scores.rep.dirty);
    CHECK(to_i64(decode(ev, scores)) == matmul(w2, sq));
}

TEST_CASE("linear kernels leave ciphertext depth untouched") {
    EvalContext cx(BackendKind::Slot, 16, kPrimes);
    Evaluator ev(cx);
    auto x = encode_dense(ev, {1, 2, 3});
    auto out = matvec_rowmajor(ev, x, weights_from({{1, 1, 1}}));
    CHECK(out.messages[0].depth == 0);
    CHECK(out.messages[0].plain_depth == 1);
    auto sq = square_activation(ev, out);
    CHECK(sq.messages[0].depth == 1);
}
