#include "packnn/layers.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

#include "packnn/message.hpp"

namespace packnn {

namespace {

void require(bool cond, const char* what) {
    if (!cond) throw std::invalid_argument(what);
}


bool is_affine(LayerKind k) {
    return k == LayerKind::Conv || k == LayerKind::AvgPool || k == LayerKind::Dense;
}

ConvGeometry layer_geometry(const LayerSpec& l, Shape3 in) {
    ConvGeometry g;
    g.in_h = in.h;
    g.in_w = in.w;
    g.channels = in.c;
    g.win_h = l.win_h;
    g.win_w = l.win_w;
    g.stride_h = l.stride_h;
    g.stride_w = l.stride_w;
    g.pad_top = l.pad_top;
    g.pad_left = l.pad_left;
    g.pad_bottom = l.pad_bottom;
    g.pad_right = l.pad_right;
    require(in.h + g.pad_top + g.pad_bottom >= g.win_h &&
                in.w + g.pad_left + g.pad_right >= g.win_w,
            "window larger than the padded input");
    return g;
}

// Window stage over the flattened input; pools become uniform stencils.
LinearStage affine_stage(const LayerSpec& l, Shape3 in) {
    LinearStage s;
    s.in_shape = in;
    if (l.kind == LayerKind::Dense) {
        s.is_conv = false;
        s.weights = l.weights;
        s.bias = l.bias;
        s.out_shape = {l.maps, 1, 1};
        return s;
    }
    s.is_conv = true;
    s.geom = layer_geometry(l, in);
    if (l.kind == LayerKind::Conv) {
        s.weights = l.weights;
        s.bias = l.bias;
        s.out_shape = {l.maps, s.geom.out_h(), s.geom.out_w()};
        return s;
    }
    // Average pool: channel-preserving stencil with weight 1/area on the
    // matching channel's taps.
    const double inv = 1.0 / (static_cast<double>(l.win_h) * l.win_w);
    const uint32_t area = l.win_h * l.win_w;
    s.weights.assign(in.c, std::vector<double>(s.geom.window_volume(), 0.0));
    for (uint32_t c = 0; c < in.c; ++c)
        for (uint32_t j = 0; j < area; ++j) s.weights[c][c * area + j] = inv;
    s.out_shape = {in.c, s.geom.out_h(), s.geom.out_w()};
    return s;
}

// Zero-extending stage A's output beyond its grid must agree with the
// composed window's zero padding: A may carry no bias, and every
// out-of-range position the padded follower reads must see A's window
// entirely outside the true input.
void check_extension(const LinearStage& a, const ConvGeometry& b) {
    if (b.pad_top == 0 && b.pad_bottom == 0 && b.pad_left == 0 && b.pad_right == 0) return;
    for (double v : a.bias)
        require(v == 0.0,
                "zero padding after a biased layer in a window run cannot be composed");
    const ConvGeometry& g = a.geom;
    auto axis_ok = [](int64_t v, uint32_t out, uint32_t stride, uint32_t win, uint32_t pad,
                      uint32_t in) {
        if (v >= 0 && v < static_cast<int64_t>(out)) return true;
        for (uint32_t d = 0; d < win; ++d) {
            const int64_t p = v * stride + d - pad;
            if (p >= 0 && p < static_cast<int64_t>(in)) return false;
        }
        return true;
    };
    const int64_t max_y =
        static_cast<int64_t>(b.stride_h) * (b.out_h() - 1) + b.win_h - 1 - b.pad_top;
    for (int64_t v = -static_cast<int64_t>(b.pad_top); v <= max_y; ++v)
        require(axis_ok(v, g.out_h(), g.stride_h, g.win_h, g.pad_top, g.in_h),
                "zero padding inside a window run reads positions the composed window "
                "cannot reproduce");
    const int64_t max_x =
        static_cast<int64_t>(b.stride_w) * (b.out_w() - 1) + b.win_w - 1 - b.pad_left;
    for (int64_t v = -static_cast<int64_t>(b.pad_left); v <= max_x; ++v)
        require(axis_ok(v, g.out_w(), g.stride_w, g.win_w, g.pad_left, g.in_w),
                "zero padding inside a window run reads positions the composed window "
                "cannot reproduce");
}

// Window-over-window composition: stride multiplies, the follower's taps
// spread by the leader's stride, paddings accumulate scaled by it.
LinearStage compose_windows(const LinearStage& a, const LayerSpec& l, Shape3 mid) {
    LinearStage b = affine_stage(l, mid);
    check_extension(a, b.geom);
    LinearStage c;
    c.is_conv = true;
    c.in_shape = a.in_shape;
    c.geom = a.geom;
    c.geom.win_h = a.geom.win_h + a.geom.stride_h * (b.geom.win_h - 1);
    c.geom.win_w = a.geom.win_w + a.geom.stride_w * (b.geom.win_w - 1);
    c.geom.stride_h = a.geom.stride_h * b.geom.stride_h;
    c.geom.stride_w = a.geom.stride_w * b.geom.stride_w;
    c.geom.pad_top = a.geom.pad_top + a.geom.stride_h * b.geom.pad_top;
    c.geom.pad_bottom = a.geom.pad_bottom + a.geom.stride_h * b.geom.pad_bottom;
    c.geom.pad_left = a.geom.pad_left + a.geom.stride_w * b.geom.pad_left;
    c.geom.pad_right = a.geom.pad_right + a.geom.stride_w * b.geom.pad_right;
    require(c.geom.out_h() == b.geom.out_h() && c.geom.out_w() == b.geom.out_w(),
            "window composition changed the output grid");
    c.out_shape = {static_cast<uint32_t>(b.rows()), c.geom.out_h(), c.geom.out_w()};

    const uint32_t in_c = a.geom.channels;
    c.weights.assign(b.rows(), std::vector<double>(c.geom.window_volume(), 0.0));
    c.bias.assign(b.rows(), 0.0);
    const bool a_biased = !a.bias.empty();
    for (uint64_t m = 0; m < b.rows(); ++m) {
        for (uint32_t cp = 0; cp < b.geom.channels; ++cp) {
            for (uint32_t dyb = 0; dyb < b.geom.win_h; ++dyb) {
                for (uint32_t dxb = 0; dxb < b.geom.win_w; ++dxb) {
                    const double wb =
                        b.weights[m][(cp * b.geom.win_h + dyb) * b.geom.win_w + dxb];
                    if (wb == 0.0) continue;
                    if (a_biased) c.bias[m] += wb * a.bias[cp];
                    for (uint32_t ch = 0; ch < in_c; ++ch) {
                        for (uint32_t dya = 0; dya < a.geom.win_h; ++dya) {
                            for (uint32_t dxa = 0; dxa < a.geom.win_w; ++dxa) {
                                const double wa =
                                    a.weights[cp]
                                             [(ch * a.geom.win_h + dya) * a.geom.win_w + dxa];
                                if (wa == 0.0) continue;
                                const uint32_t ey = a.geom.stride_h * dyb + dya;
                                const uint32_t ex = a.geom.stride_w * dxb + dxa;
                                c.weights[m][(ch * c.geom.win_h + ey) * c.geom.win_w + ex] +=
                                    wb * wa;
                            }
                        }
                    }
                }
            }
        }
        if (!b.bias.empty()) c.bias[m] += b.bias[m];
    }
    bool any_bias = false;
    for (double v : c.bias) any_bias = any_bias || v != 0.0;
    if (!any_bias) c.bias.clear();
    return c;
}

// acc := acc * stage, bias := acc * stage_bias + bias, without materializing
// window stages as matrices.
void fold_left(std::vector<std::vector<double>>& acc, std::vector<double>& bias,
               const LinearStage& s) {
    const uint64_t mid = s.out_shape.values();
    const uint64_t cols = s.in_shape.values();
    std::vector<std::vector<double>> out(acc.size(), std::vector<double>(cols, 0.0));
    std::vector<double> out_bias(acc.size(), 0.0);
    for (size_t r = 0; r < acc.size(); ++r) {
        require(acc[r].size() == mid, "stage widths do not chain");
        out_bias[r] = bias.empty() ? 0.0 : bias[r];
        for (uint64_t j = 0; j < mid; ++j) {
            const double av = acc[r][j];
            if (av == 0.0) continue;
            if (!s.bias.empty())
                out_bias[r] += av * (s.is_conv ? s.bias[j / s.geom.positions()] : s.bias[j]);
            if (s.is_conv) {
                const uint32_t vol = s.geom.window_volume();
                const uint32_t w = static_cast<uint32_t>(j % s.geom.positions());
                const uint64_t map = j / s.geom.positions();
                for (uint32_t t = 0; t < vol; ++t) {
                    const double sv = s.weights[map][t];
                    if (sv == 0.0) continue;
                    auto src = s.geom.tap(t, w);
                    if (src) out[r][*src] += av * sv;
                }
            } else {
                for (uint64_t i = 0; i < cols; ++i) {
                    const double sv = s.weights[j][i];
                    if (sv != 0.0) out[r][i] += av * sv;
                }
            }
        }
    }
    acc = std::move(out);
    bias = std::move(out_bias);
}

// One maximal affine run folded into a single stage.
LinearStage collapse_run(const std::vector<LayerSpec>& net, const std::vector<Shape3>& shapes,
                         size_t first, size_t last) {
    bool any_dense = false;
    for (size_t i = first; i <= last; ++i) any_dense |= net[i].kind == LayerKind::Dense;
    if (!any_dense) {
        LinearStage acc = affine_stage(net[first], shapes[first]);
        for (size_t i = first + 1; i <= last; ++i) acc = compose_windows(acc, net[i], shapes[i]);
        return acc;
    }
    // Matrix route, folded from the output side so the accumulator stays as
    // tall as the run's final output.
    LinearStage tail = affine_stage(net[last], shapes[last]);
    std::vector<std::vector<double>> acc;
    std::vector<double> bias = tail.bias;
    if (tail.is_conv) {
        const uint64_t rows = tail.out_shape.values();
        const uint64_t cols = shapes[last].values();
        acc.assign(rows, std::vector<double>(cols, 0.0));
        const uint32_t pos = tail.geom.positions();
        for (uint64_t r = 0; r < rows; ++r) {
            const uint64_t map = r / pos;
            const uint32_t w = static_cast<uint32_t>(r % pos);
            for (uint32_t t = 0; t < tail.geom.window_volume(); ++t) {
                auto src = tail.geom.tap(t, w);
                if (src) acc[r][*src] += tail.weights[map][t];
            }
        }
        if (!tail.bias.empty()) {
            bias.assign(rows, 0.0);
            for (uint64_t r = 0; r < rows; ++r) bias[r] = tail.bias[r / pos];
        }
    } else {
        acc = tail.weights;
    }
    for (size_t i = last; i-- > first;) fold_left(acc, bias, affine_stage(net[i], shapes[i]));

    LinearStage s;
    s.is_conv = false;
    s.weights = std::move(acc);
    s.in_shape = shapes[first];
    s.out_shape = {static_cast<uint32_t>(s.weights.size()), 1, 1};
    bool any_bias = false;
    for (double v : bias) any_bias = any_bias || v != 0.0;
    if (any_bias) s.bias = std::move(bias);
    return s;
}

std::vector<double> apply_stage_float(const LinearStage& s, const std::vector<double>& x) {
    std::vector<double> out;
    if (s.is_conv) {
        const uint32_t pos = s.geom.positions();
        out.resize(s.rows() * pos, 0.0);
        for (uint64_t m = 0; m < s.rows(); ++m) {
            const double b = s.bias.empty() ? 0.0 : s.bias[m];
            for (uint32_t w = 0; w < pos; ++w) {
                double acc = b;
                for (uint32_t t = 0; t < s.geom.window_volume(); ++t) {
                    auto src = s.geom.tap(t, w);
                    if (src) acc += s.weights[m][t] * x[*src];
                }
                out[m * pos + w] = acc;
            }
        }
    } else {
        out.resize(s.rows(), 0.0);
        for (uint64_t r = 0; r < s.rows(); ++r) {
            double acc = s.bias.empty() ? 0.0 : s.bias[r];
            for (uint64_t i = 0; i < s.cols(); ++i) acc += s.weights[r][i] * x[i];
            out[r] = acc;
        }
    }
    return out;
}

std::string stage_brief(bool is_conv, const ConvGeometry& g, uint64_t rows, uint64_t cols) {
    std::ostringstream os;
    if (is_conv)
        os << "conv " << g.win_h << "x" << g.win_w << "x" << g.channels << ", " << rows
           << " maps";
    else
        os << "dense " << rows << "x" << cols;
    return os.str();
}

// Candidate moduli for overflow suggestions: primes = 1 mod 32768, the
// batching condition at every supported degree, largest first.
const uint64_t kSuggestedPrimes[] = {2281701377ull, 2149810177ull, 2148794369ull,
                                     2148728833ull, 2013265921ull, 1004535809ull,
                                     998244353ull};

std::string sufficient_prime_set(const BigInt& bound) {
    BigInt prod = 1;
    std::ostringstream os;
    size_t used = 0;
    for (uint64_t p : kSuggestedPrimes) {
        if (used) os << ", ";
        os << p;
        prod *= p;
        ++used;
        if ((prod - 1) / 2 > bound) return os.str();
    }
    return "more than the known candidate primes provide";
}

}  // namespace

LayerSpec conv_spec(uint32_t win_h, uint32_t win_w, uint32_t stride, uint32_t maps,
                    std::vector<std::vector<double>> weights, std::vector<double> bias) {
    LayerSpec l;
    l.kind = LayerKind::Conv;
    l.win_h = win_h;
    l.win_w = win_w;
    l.stride_h = l.stride_w = stride;
    l.maps = maps;
    l.weights = std::move(weights);
    l.bias = std::move(bias);
    return l;
}

LayerSpec conv_spec_padded(uint32_t win_h, uint32_t win_w, uint32_t stride, uint32_t maps,
                           std::vector<std::vector<double>> weights, std::vector<double> bias) {
    require(win_h % 2 == 1 && win_w % 2 == 1, "symmetric padding needs odd windows");
    LayerSpec l = conv_spec(win_h, win_w, stride, maps, std::move(weights), std::move(bias));
    l.pad_top = l.pad_bottom = (win_h - 1) / 2;
    l.pad_left = l.pad_right = (win_w - 1) / 2;
    return l;
}

LayerSpec avgpool_spec(uint32_t win, uint32_t stride) {
    LayerSpec l;
    l.kind = LayerKind::AvgPool;
    l.win_h = l.win_w = win;
    l.stride_h = l.stride_w = stride;
    return l;
}

LayerSpec dense_spec(std::vector<std::vector<double>> weights, std::vector<double> bias) {
    LayerSpec l;
    l.kind = LayerKind::Dense;
    l.maps = static_cast<uint32_t>(weights.size());
    l.weights = std::move(weights);
    l.bias = std::move(bias);
    return l;
}

LayerSpec square_spec() {
    LayerSpec l;
    l.kind = LayerKind::Square;
    return l;
}

LayerSpec softmax_spec() {
    LayerSpec l;
    l.kind = LayerKind::Softmax;
    return l;
}

Shape3 layer_output_shape(const LayerSpec& l, Shape3 in) {
    require(in.values() > 0, "empty input shape");
    switch (l.kind) {
        case LayerKind::Conv: {
            ConvGeometry g = layer_geometry(l, in);
            require(l.maps > 0 && l.weights.size() == l.maps, "one weight row per map");
            for (const auto& row : l.weights)
                require(row.size() == g.window_volume(), "weight row does not cover the window");
            require(l.bias.empty() || l.bias.size() == l.maps, "one bias per map");
            return {l.maps, g.out_h(), g.out_w()};
        }
        case LayerKind::AvgPool: {
            require(l.weights.empty() && l.bias.empty(), "pool layers carry no weights");
            ConvGeometry g = layer_geometry(l, in);
            return {in.c, g.out_h(), g.out_w()};
        }
        case LayerKind::Dense: {
            require(l.maps > 0 && l.weights.size() == l.maps, "one weight row per output");
            for (const auto& row : l.weights)
                require(row.size() == in.values(), "weight row does not cover the input");
            require(l.bias.empty() || l.bias.size() == l.maps, "one bias per output");
            return {l.maps, 1, 1};
        }
        case LayerKind::Square:
        case LayerKind::Softmax:
            require(l.weights.empty() && l.bias.empty(), "activation layers carry no weights");
            return in;
    }
    throw std::invalid_argument("unknown layer kind");
}

std::vector<Shape3> chain_shapes(const std::vector<LayerSpec>& net, Shape3 input) {
    require(!net.empty(), "empty network");
    std::vector<Shape3> shapes{input};
    for (size_t i = 0; i < net.size(); ++i) {
        require(net[i].kind != LayerKind::Softmax || i + 1 == net.size(),
                "softmax is only allowed as the final layer");
        shapes.push_back(layer_output_shape(net[i], shapes.back()));
    }
    return shapes;
}

CollapsedNetwork collapse_adjacent_linear(const std::vector<LayerSpec>& net, Shape3 input) {
    const std::vector<Shape3> shapes = chain_shapes(net, input);
    CollapsedNetwork out;
    out.input = input;
    size_t i = 0;
    while (i < net.size()) {
        if (net[i].kind == LayerKind::Softmax) {
            out.softmax_tail = true;
            ++i;
            continue;
        }
        require(is_affine(net[i].kind), "activation before any linear layer");
        size_t last = i;
        while (last + 1 < net.size() && is_affine(net[last + 1].kind)) ++last;
        out.stages.push_back(collapse_run(net, shapes, i, last));
        i = last + 1;
        uint32_t squares = 0;
        while (i < net.size() && net[i].kind == LayerKind::Square) {
            ++squares;
            ++i;
        }
        out.squares_after.push_back(squares);
    }
    require(!out.stages.empty(), "network has no linear layers");
    return out;
}

std::vector<double> forward_float(const std::vector<LayerSpec>& net, Shape3 input,
                                  const std::vector<double>& x) {
    const std::vector<Shape3> shapes = chain_shapes(net, input);
    require(x.size() == input.values(), "input does not match the declared shape");
    std::vector<double> cur = x;
    for (size_t i = 0; i < net.size(); ++i) {
        switch (net[i].kind) {
            case LayerKind::Square:
                for (double& v : cur) v *= v;
                break;
            case LayerKind::Softmax:
                break;
            default:
                cur = apply_stage_float(affine_stage(net[i], shapes[i]), cur);
        }
    }
    return cur;
}

std::vector<double> forward_float(const CollapsedNetwork& net, const std::vector<double>& x) {
    require(x.size() == net.input.values(), "input does not match the declared shape");
    std::vector<double> cur = x;
    for (size_t s = 0; s < net.stages.size(); ++s) {
        cur = apply_stage_float(net.stages[s], cur);
        for (uint32_t q = 0; q < net.squares_after[s]; ++q)
            for (double& v : cur) v *= v;
    }
    return cur;
}

int64_t quantize_value(double v, uint32_t scale_bits) {
    const double scaled = std::ldexp(v, static_cast<int>(scale_bits));
    require(std::abs(scaled) < 4.6e18, "scaled weight exceeds the integer range");
    return static_cast<int64_t>(std::nearbyint(scaled));
}

QuantizedNetwork quantize(const CollapsedNetwork& net, const QuantizationPolicy& policy,
                          const std::vector<uint64_t>& primes) {
    require(!policy.scale_bits.empty(), "no weight scales given");
    require(policy.scale_bits.size() == 1 || policy.scale_bits.size() == net.stages.size(),
            "one scale overall or one per stage");
    require(policy.input_bound >= 0, "negative input bound");

    BigInt capacity = 0;
    if (!primes.empty()) {
        BigInt prod = 1;
        for (uint64_t p : primes) prod *= p;
        capacity = (prod - 1) / 2;
    }

    QuantizedNetwork q;
    q.input = net.input;
    q.squares_after = net.squares_after;
    q.softmax_tail = net.softmax_tail;

    std::vector<BigInt> bound(net.input.values(), BigInt(policy.input_bound));
    uint64_t exponent = 0;  // log2 of the running integer/float value factor
    for (size_t si = 0; si < net.stages.size(); ++si) {
        const LinearStage& s = net.stages[si];
        const uint32_t bits =
            policy.scale_bits.size() == 1 ? policy.scale_bits[0] : policy.scale_bits[si];

        QuantizedStage qs;
        qs.is_conv = s.is_conv;
        qs.geom = s.geom;
        qs.in_shape = s.in_shape;
        qs.out_shape = s.out_shape;
        qs.scale_bits = bits;
        qs.weights.reserve(s.weights.size());
        for (const auto& row : s.weights) {
            std::vector<int64_t> qrow(row.size());
            for (size_t j = 0; j < row.size(); ++j) qrow[j] = quantize_value(row[j], bits);
            qs.weights.push_back(std::move(qrow));
        }
        exponent += bits;
        require(exponent < 1000, "value scale outgrew the representable bias range");
        qs.value_exponent = static_cast<uint32_t>(exponent);
        if (!s.bias.empty()) {
            qs.bias.resize(s.bias.size());
            for (size_t r = 0; r < s.bias.size(); ++r)
                qs.bias[r] = quantize_value(s.bias[r], qs.value_exponent);
        }

        std::vector<BigInt> next;
        if (s.is_conv) {
            const uint32_t pos = qs.geom.positions();
            next.assign(qs.rows() * pos, 0);
            for (uint64_t m = 0; m < qs.rows(); ++m) {
                const BigInt b = qs.bias.empty() ? BigInt(0) : big_abs(BigInt(qs.bias[m]));
                for (uint32_t w = 0; w < pos; ++w) {
                    BigInt acc = b;
                    for (uint32_t t = 0; t < qs.geom.window_volume(); ++t) {
                        auto src = qs.geom.tap(t, w);
                        if (src) acc += big_abs(BigInt(qs.weights[m][t])) * bound[*src];
                    }
                    next[m * pos + w] = acc;
                }
            }
        } else {
            next.assign(qs.rows(), 0);
            for (uint64_t r = 0; r < qs.rows(); ++r) {
                BigInt acc = qs.bias.empty() ? BigInt(0) : big_abs(BigInt(qs.bias[r]));
                for (uint64_t j = 0; j < qs.cols(); ++j)
                    acc += big_abs(BigInt(qs.weights[r][j])) * bound[j];
                next[r] = acc;
            }
        }
        for (uint32_t sq = 0; sq < net.squares_after[si]; ++sq) {
            for (BigInt& b : next) b *= b;
            exponent *= 2;
            require(exponent < 1000, "value scale outgrew the representable bias range");
        }
        bound = std::move(next);
        BigInt stage_max = 0;
        for (const BigInt& b : bound)
            if (b > stage_max) stage_max = b;
        qs.bound = stage_max;
        if (!primes.empty() && stage_max >= capacity) {
            std::ostringstream os;
            os << "linear stage " << si << " ("
               << stage_brief(s.is_conv, s.geom, s.rows(), s.cols())
               << "): propagated magnitude " << stage_max.str()
               << " reaches plaintext capacity " << capacity.str()
               << "; smallest sufficient prime set: " << sufficient_prime_set(stage_max);
            throw magnitude_error(os.str());
        }
        q.stages.push_back(std::move(qs));
    }
    q.final_bound = q.stages.back().bound;
    return q;
}

std::vector<BigInt> forward_integer(const QuantizedNetwork& net, const std::vector<int64_t>& x) {
    require(x.size() == net.input.values(), "input does not match the declared shape");
    std::vector<BigInt> cur(x.begin(), x.end());
    for (size_t si = 0; si < net.stages.size(); ++si) {
        const QuantizedStage& s = net.stages[si];
        std::vector<BigInt> out;
        if (s.is_conv) {
            const uint32_t pos = s.geom.positions();
            out.assign(s.rows() * pos, 0);
            for (uint64_t m = 0; m < s.rows(); ++m) {
                const BigInt b = s.bias.empty() ? BigInt(0) : BigInt(s.bias[m]);
                for (uint32_t w = 0; w < pos; ++w) {
                    BigInt acc = b;
                    for (uint32_t t = 0; t < s.geom.window_volume(); ++t) {
                        auto src = s.geom.tap(t, w);
                        if (src) acc += BigInt(s.weights[m][t]) * cur[*src];
                    }
                    out[m * pos + w] = acc;
                }
            }
        } else {
            require(cur.size() == s.cols(), "stage widths do not chain");
            out.assign(s.rows(), 0);
            for (uint64_t r = 0; r < s.rows(); ++r) {
                BigInt acc = s.bias.empty() ? BigInt(0) : BigInt(s.bias[r]);
                for (uint64_t j = 0; j < s.cols(); ++j) acc += BigInt(s.weights[r][j]) * cur[j];
                out[r] = acc;
            }
        }
        for (uint32_t sq = 0; sq < net.squares_after[si]; ++sq)
            for (BigInt& v : out) v *= v;
        cur = std::move(out);
    }
    return cur;
}

}  // namespace packnn
