#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "packnn/layers.hpp"
#include "packnn/message.hpp"

using namespace packnn;

namespace {

bool close_rel(double a, double b, double tol = 1e-9) {
    return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

std::vector<std::vector<double>> random_rows(std::mt19937& rng, size_t rows, size_t cols) {
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    std::vector<std::vector<double>> w(rows, std::vector<double>(cols));
    for (auto& row : w)
        for (auto& v : row) v = d(rng);
    return w;
}

std::vector<double> random_vec(std::mt19937& rng, size_t len, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> d(lo, hi);
    std::vector<double> v(len);
    for (auto& x : v) x = d(rng);
    return v;
}

}  // namespace

TEST_CASE("shape chaining and layer validation") {
    std::mt19937 rng(1);
    Shape3 in{1, 4, 4};
    auto conv = conv_spec(3, 3, 1, 2, random_rows(rng, 2, 9));
    CHECK(layer_output_shape(conv, in) == Shape3{2, 2, 2});

    auto padded = conv_spec_padded(3, 3, 1, 2, random_rows(rng, 2, 9));
    CHECK(layer_output_shape(padded, in) == Shape3{2, 4, 4});

    CHECK(layer_output_shape(avgpool_spec(2, 2), in) == Shape3{1, 2, 2});
    CHECK(layer_output_shape(dense_spec({{1, 2}, {3, 4}, {5, 6}}), Shape3{2, 1, 1}) ==
          Shape3{3, 1, 1});
    CHECK(layer_output_shape(square_spec(), in) == in);

    // wrong weight arity, oversized window, misplaced softmax
    CHECK_THROWS_AS(layer_output_shape(conv_spec(3, 3, 1, 2, {{1, 2, 3}}), in),
                    std::invalid_argument);
    CHECK_THROWS_AS(layer_output_shape(conv_spec(5, 5, 1, 1, random_rows(rng, 1, 25)), in),
                    std::invalid_argument);
    CHECK_THROWS_AS(chain_shapes({softmax_spec(), dense_spec({{1.0}})}, Shape3{1, 1, 1}),
                    std::invalid_argument);
    CHECK_THROWS_AS(collapse_adjacent_linear({square_spec(), dense_spec({{1.0}})}, Shape3{1, 1, 1}),
                    std::invalid_argument);
}

TEST_CASE("window weights follow channel-major tap order") {
    std::vector<LayerSpec> net{conv_spec(2, 2, 1, 1, {{1, 2, 3, 4, 5, 6, 7, 8}})};
    // input (c, y, x) = value c*4 + y*2 + x + 1
    std::vector<double> x{1, 2, 3, 4, 5, 6, 7, 8};
    auto out = forward_float(net, Shape3{2, 2, 2}, x);
    REQUIRE(out.size() == 1);
    CHECK(out[0] == 1 * 1 + 2 * 2 + 3 * 3 + 4 * 4 + 5 * 5 + 6 * 6 + 7 * 7 + 8 * 8);
}

TEST_CASE("two dense layers collapse to their product") {
    std::vector<std::vector<double>> A{{1, 2, 3}, {4, 5, 6}};
    std::vector<std::vector<double>> B{{1, -1}, {2, 0.5}};
    std::vector<LayerSpec> net{dense_spec(A, {1, 2}), dense_spec(B, {10, 20})};
    auto c = collapse_adjacent_linear(net, Shape3{3, 1, 1});
    REQUIRE(c.stages.size() == 1);
    const LinearStage& s = c.stages[0];
    CHECK_FALSE(s.is_conv);
    // BA and B*bias_A + bias_B
    CHECK(s.weights == std::vector<std::vector<double>>{{-3, -3, -3}, {4, 6.5, 9}});
    CHECK(s.bias == std::vector<double>{1 * 1 - 1 * 2 + 10, 2 * 1 + 0.5 * 2 + 20});
    CHECK(c.squares_after == std::vector<uint32_t>{0});

    std::mt19937 rng(7);
    for (int t = 0; t < 5; ++t) {
        auto x = random_vec(rng, 3);
        auto direct = forward_float(net, Shape3{3, 1, 1}, x);
        auto folded = forward_float(c, x);
        REQUIRE(direct.size() == folded.size());
        for (size_t i = 0; i < direct.size(); ++i) CHECK(close_rel(direct[i], folded[i]));
    }
}

TEST_CASE("conv, pool, conv collapses to one 8x8 stride-2 window") {
    std::mt19937 rng(11);
    Shape3 in{2, 12, 12};
    std::vector<LayerSpec> net{
        conv_spec_padded(3, 3, 1, 6, random_rows(rng, 6, 18), random_vec(rng, 6)),
        avgpool_spec(2, 2),
        conv_spec(3, 3, 1, 4, random_rows(rng, 4, 54), random_vec(rng, 4)),
        square_spec(),
    };
    auto c = collapse_adjacent_linear(net, in);
    REQUIRE(c.stages.size() == 1);
    const LinearStage& s = c.stages[0];
    CHECK(s.is_conv);
    CHECK(s.geom.win_h == 8);
    CHECK(s.geom.win_w == 8);
    CHECK(s.geom.stride_h == 2);
    CHECK(s.geom.stride_w == 2);
    CHECK(s.geom.pad_top == 1);
    CHECK(s.geom.pad_bottom == 1);
    CHECK(s.out_shape == Shape3{4, 4, 4});
    CHECK(c.squares_after == std::vector<uint32_t>{1});

    for (int t = 0; t < 100; ++t) {
        auto x = random_vec(rng, in.values());
        auto direct = forward_float(net, in, x);
        auto folded = forward_float(c, x);
        REQUIRE(direct.size() == folded.size());
        for (size_t i = 0; i < direct.size(); ++i) CHECK(close_rel(direct[i], folded[i]));
    }
}

TEST_CASE("full-size front stack keeps the documented output grid") {
    std::mt19937 rng(13);
    Shape3 in{3, 32, 32};
    std::vector<LayerSpec> net{
        conv_spec_padded(3, 3, 1, 128, random_rows(rng, 128, 27)),
        avgpool_spec(2, 2),
        conv_spec(3, 3, 1, 83, random_rows(rng, 83, 1152)),
    };
    auto c = collapse_adjacent_linear(net, in);
    REQUIRE(c.stages.size() == 1);
    CHECK(c.stages[0].is_conv);
    CHECK(c.stages[0].geom.win_h == 8);
    CHECK(c.stages[0].geom.stride_h == 2);
    CHECK(c.stages[0].out_shape == Shape3{83, 14, 14});
    CHECK(c.stages[0].geom.window_volume() == 8 * 8 * 3);

    auto x = random_vec(rng, in.values());
    auto direct = forward_float(net, in, x);
    auto folded = forward_float(c, x);
    REQUIRE(direct.size() == folded.size());
    for (size_t i = 0; i < direct.size(); ++i) CHECK(close_rel(direct[i], folded[i]));
}

TEST_CASE("pool then padded conv composes when the border reads stay outside") {
    std::mt19937 rng(17);
    Shape3 in{2, 14, 14};
    std::vector<LayerSpec> net{
        avgpool_spec(2, 2),
        conv_spec_padded(3, 3, 1, 3, random_rows(rng, 3, 18), random_vec(rng, 3)),
    };
    auto c = collapse_adjacent_linear(net, in);
    REQUIRE(c.stages.size() == 1);
    const LinearStage& s = c.stages[0];
    CHECK(s.is_conv);
    CHECK(s.geom.win_h == 6);
    CHECK(s.geom.stride_h == 2);
    CHECK(s.geom.pad_top == 2);
    CHECK(s.out_shape == Shape3{3, 7, 7});

    for (int t = 0; t < 20; ++t) {
        auto x = random_vec(rng, in.values());
        auto direct = forward_float(net, in, x);
        auto folded = forward_float(c, x);
        for (size_t i = 0; i < direct.size(); ++i) CHECK(close_rel(direct[i], folded[i]));
    }
}

TEST_CASE("interior padding that reads live positions refuses to compose") {
    std::mt19937 rng(19);
    Shape3 in{1, 8, 8};
    // same-padded conv after same-padded conv: the follower's border windows
    // would need the leader evaluated outside its grid
    std::vector<LayerSpec> bad1{
        conv_spec_padded(3, 3, 1, 2, random_rows(rng, 2, 9)),
        conv_spec_padded(3, 3, 1, 2, random_rows(rng, 2, 18)),
    };
    CHECK_THROWS_AS(collapse_adjacent_linear(bad1, in), std::invalid_argument);

    // padded follower after a biased leader: the zero border lies about the bias
    std::vector<LayerSpec> bad2{
        avgpool_spec(2, 2),
        conv_spec(2, 2, 2, 2, random_rows(rng, 2, 4), {1.0, 2.0}),
        conv_spec_padded(3, 3, 1, 2, random_rows(rng, 2, 18)),
    };
    CHECK_THROWS_AS(collapse_adjacent_linear(bad2, in), std::invalid_argument);

    // a dense layer in the run removes the restriction: matrices encode the
    // padding structurally
    std::vector<LayerSpec> fine{
        conv_spec_padded(3, 3, 1, 2, random_rows(rng, 2, 9), {0.5, -0.5}),
        conv_spec_padded(3, 3, 1, 2, random_rows(rng, 2, 18)),
        dense_spec(random_rows(rng, 3, 128)),
    };
    auto c = collapse_adjacent_linear(fine, in);
    REQUIRE(c.stages.size() == 1);
    CHECK_FALSE(c.stages[0].is_conv);
    for (int t = 0; t < 10; ++t) {
        auto x = random_vec(rng, in.values());
        auto direct = forward_float(fine, in, x);
        auto folded = forward_float(c, x);
        for (size_t i = 0; i < direct.size(); ++i) CHECK(close_rel(direct[i], folded[i]));
    }
}

TEST_CASE("pool, dense, dense folds through the matrix route") {
    std::mt19937 rng(23);
    Shape3 in{2, 4, 4};
    std::vector<LayerSpec> net{
        avgpool_spec(2, 2),
        dense_spec(random_rows(rng, 5, 8), random_vec(rng, 5)),
        dense_spec(random_rows(rng, 3, 5), random_vec(rng, 3)),
    };
    auto c = collapse_adjacent_linear(net, in);
    REQUIRE(c.stages.size() == 1);
    CHECK_FALSE(c.stages[0].is_conv);
    CHECK(c.stages[0].rows() == 3);
    CHECK(c.stages[0].cols() == 32);
    for (int t = 0; t < 10; ++t) {
        auto x = random_vec(rng, in.values());
        auto direct = forward_float(net, in, x);
        auto folded = forward_float(c, x);
        for (size_t i = 0; i < direct.size(); ++i) CHECK(close_rel(direct[i], folded[i]));
    }
}

TEST_CASE("first layer keeps its asymmetric border") {
    std::mt19937 rng(29);
    auto conv = conv_spec(5, 5, 2, 5, random_rows(rng, 5, 25));
    conv.pad_top = conv.pad_left = 1;
    auto c = collapse_adjacent_linear({conv, square_spec()}, Shape3{1, 28, 28});
    REQUIRE(c.stages.size() == 1);
    CHECK(c.stages[0].is_conv);
    CHECK(c.stages[0].out_shape == Shape3{5, 13, 13});
    CHECK(c.stages[0].geom.positions() == 169);
}

TEST_CASE("rounding is to nearest even") {
    CHECK(quantize_value(1.0, 0) == 1);
    CHECK(quantize_value(1.25, 1) == 2);
    CHECK(quantize_value(1.75, 1) == 4);
    CHECK(quantize_value(-1.25, 1) == -2);
    CHECK(quantize_value(0.5, 2) == 2);
    CHECK(quantize_value(-0.25, 2) == -1);
}

TEST_CASE("quantization maps scaled weights and biases consistently") {
    // integer weights at scale 1 come through untouched
    auto idnet = collapse_adjacent_linear({dense_spec({{3, -2}, {0, 7}})}, Shape3{2, 1, 1});
    auto qid = quantize(idnet, QuantizationPolicy{{0}, 10});
    CHECK(qid.stages[0].weights == std::vector<std::vector<int64_t>>{{3, -2}, {0, 7}});

    auto frac = collapse_adjacent_linear({dense_spec({{0.5, -0.25}})}, Shape3{2, 1, 1});
    auto qfrac = quantize(frac, QuantizationPolicy{{2}, 10});
    CHECK(qfrac.stages[0].weights == std::vector<std::vector<int64_t>>{{2, -1}});

    // a bias after a squaring picks up the squared running factor
    std::vector<LayerSpec> net{
        dense_spec({{0.5}}, {0.25}),
        square_spec(),
        dense_spec({{1.0}}, {0.5}),
    };
    auto c = collapse_adjacent_linear(net, Shape3{1, 1, 1});
    auto q = quantize(c, QuantizationPolicy{{2, 1}, 4});
    CHECK(q.stages[0].scale_bits == 2);
    CHECK(q.stages[0].value_exponent == 2);
    CHECK(q.stages[0].bias == std::vector<int64_t>{1});  // 0.25 * 2^2
    CHECK(q.stages[1].value_exponent == 5);              // 2*2 + 1
    CHECK(q.stages[1].bias == std::vector<int64_t>{16});  // 0.5 * 2^5

    // with exactly representable weights the integer net is the float net
    // times the tracked power of two
    for (int64_t x : {-4, -1, 0, 2, 4}) {
        auto ints = forward_integer(q, {x});
        auto floats = forward_float(c, {static_cast<double>(x)});
        REQUIRE(ints.size() == 1);
        CHECK(ints[0] == BigInt(std::llround(floats[0] * 32.0)));
    }
}

TEST_CASE("pool factors become unit weights at matching scale") {
    auto c = collapse_adjacent_linear({avgpool_spec(2, 2)}, Shape3{1, 2, 2});
    auto q = quantize(c, QuantizationPolicy{{2}, 255});
    REQUIRE(q.stages.size() == 1);
    CHECK(q.stages[0].weights[0] == std::vector<int64_t>{1, 1, 1, 1});
    auto out = forward_integer(q, {10, 20, 30, 40});
    CHECK(out == std::vector<BigInt>{100});
}

TEST_CASE("single-row ledger bound is the corner maximum") {
    auto c = collapse_adjacent_linear({dense_spec({{3, -4}}, {2})}, Shape3{2, 1, 1});
    auto q = quantize(c, QuantizationPolicy{{0}, 10});
    CHECK(q.final_bound == 72);
    BigInt best = 0;
    for (int mask = 0; mask < 4; ++mask) {
        std::vector<int64_t> x{mask & 1 ? 10 : -10, mask & 2 ? 10 : -10};
        best = std::max(best, big_abs(forward_integer(q, x)[0]));
    }
    CHECK(best == q.final_bound);
}

TEST_CASE("chain ledger bounds are exactly the corner maxima") {
    std::mt19937 rng(31);
    std::uniform_int_distribution<int> wd(-9, 9);
    for (int trial = 0; trial < 20; ++trial) {
        const size_t d = 2 + trial % 5;  // up to 6 inputs
        std::vector<double> w0(d);
        for (auto& v : w0) v = wd(rng);
        double b0 = wd(rng);
        double u = 0, c2 = 0;
        while (u == 0) u = wd(rng);
        c2 = std::abs(wd(rng)) * (u > 0 ? 1 : -1);  // sign-aligned tail bias
        std::vector<LayerSpec> net{
            dense_spec({w0}, {b0}),
            square_spec(),
            dense_spec({{u}}, {c2}),
        };
        auto c = collapse_adjacent_linear(net, Shape3{static_cast<uint32_t>(d), 1, 1});
        auto q = quantize(c, QuantizationPolicy{{0}, 5});

        BigInt best = 0;
        for (uint64_t mask = 0; mask < (1ull << d); ++mask) {
            std::vector<int64_t> x(d);
            for (size_t i = 0; i < d; ++i) x[i] = (mask >> i) & 1 ? 5 : -5;
            best = std::max(best, big_abs(forward_integer(q, x)[0]));
        }
        CHECK(best == q.final_bound);
    }
}

TEST_CASE("ledger bounds are never exceeded at adversarial corners") {
    std::mt19937 rng(37);
    std::uniform_int_distribution<int> wd(-6, 6);
    auto rows = [&](size_t r, size_t c) {
        std::vector<std::vector<double>> w(r, std::vector<double>(c));
        for (auto& row : w)
            for (auto& v : row) v = wd(rng);
        return w;
    };
    for (int trial = 0; trial < 10; ++trial) {
        const size_t d = 3 + trial % 4;  // up to 6 inputs
        std::vector<LayerSpec> net{
            dense_spec(rows(3, d), {double(wd(rng)), double(wd(rng)), double(wd(rng))}),
            square_spec(),
            dense_spec(rows(2, 3), {double(wd(rng)), double(wd(rng))}),
        };
        auto c = collapse_adjacent_linear(net, Shape3{static_cast<uint32_t>(d), 1, 1});
        auto q = quantize(c, QuantizationPolicy{{0}, 7});

        // prefix network bound: stage 0 plus its squaring
        QuantizedNetwork prefix = q;
        prefix.stages.resize(1);
        prefix.squares_after.resize(1);

        for (uint64_t mask = 0; mask < (1ull << d); ++mask) {
            std::vector<int64_t> x(d);
            for (size_t i = 0; i < d; ++i) x[i] = (mask >> i) & 1 ? 7 : -7;
            for (const BigInt& v : forward_integer(prefix, x))
                CHECK(big_abs(v) <= q.stages[0].bound);
            for (const BigInt& v : forward_integer(q, x))
                CHECK(big_abs(v) <= q.final_bound);
        }
    }
}

TEST_CASE("capacity overflow names the stage and a sufficient prime set") {
    std::vector<LayerSpec> net{
        dense_spec({{20, 20}}),
        square_spec(),
        dense_spec({{1000}}),
    };
    auto c = collapse_adjacent_linear(net, Shape3{2, 1, 1});
    // bound: 20*255*2 = 10200 -> squared 104040000 -> *1000
    auto ok = quantize(c, QuantizationPolicy{{0}, 255});
    CHECK(ok.final_bound == BigInt("104040000000"));

    try {
        quantize(c, QuantizationPolicy{{0}, 255}, {65537, 786433});
        FAIL("expected magnitude_error");
    } catch (const magnitude_error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("linear stage 1") != std::string::npos);
        CHECK(msg.find("dense 1x1") != std::string::npos);
        CHECK(msg.find("smallest sufficient prime set") != std::string::npos);
        CHECK(msg.find("2281701377, 2149810177") != std::string::npos);
    }

    // the first stage already overflows a single tiny prime
    try {
        quantize(c, QuantizationPolicy{{0}, 255}, {65537});
        FAIL("expected magnitude_error");
    } catch (const magnitude_error& e) {
        CHECK(std::string(e.what()).find("linear stage 0") != std::string::npos);
    }

    // a roomy modulus passes the same net
    CHECK_NOTHROW(quantize(c, QuantizationPolicy{{0}, 255},
                           {2148728833ull, 2148794369ull, 2149810177ull}));
}
