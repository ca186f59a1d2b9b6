#include "packnn/selfcheck.hpp"

#include <random>
#include <sstream>
#include <stdexcept>

#include "packnn/kernels.hpp"

namespace packnn::selfcheck {

std::vector<uint64_t> schoolbook_negacyclic_mul(std::span<const uint64_t> a,
                                                std::span<const uint64_t> b,
                                                uint64_t p) {
    size_t n = a.size();
    if (b.size() != n) throw std::invalid_argument("schoolbook mul: size mismatch");
    std::vector<uint64_t> out(n, 0);
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j) {
            uint64_t prod = mul_mod(a[i], b[j], p);
            size_t k = i + j;
            if (k < n) {
                out[k] = add_mod(out[k], prod, p);
            } else {
                out[k - n] = sub_mod(out[k - n], prod, p);
            }
        }
    }
    return out;
}

std::vector<uint64_t> rotate_slots_columns(std::span<const uint64_t> slots, uint32_t k) {
    size_t n = slots.size();
    size_t half = n / 2;
    if (k >= half) throw std::invalid_argument("rotate_slots_columns: k out of range");
    std::vector<uint64_t> out(n);
    for (size_t b = 0; b < 2; ++b) {
        for (size_t j = 0; j < half; ++j) {
            out[b * half + (j + k) % half] = slots[b * half + j];
        }
    }
    return out;
}

std::vector<uint64_t> rotate_slots_rows(std::span<const uint64_t> slots) {
    size_t n = slots.size();
    size_t half = n / 2;
    std::vector<uint64_t> out(n);
    for (size_t j = 0; j < half; ++j) {
        out[j] = slots[half + j];
        out[half + j] = slots[j];
    }
    return out;
}

std::vector<BigInt> matvec_reference(const std::vector<std::vector<int64_t>>& w,
                                     std::span<const BigInt> v) {
    std::vector<BigInt> out(w.size(), 0);
    for (size_t r = 0; r < w.size(); ++r) {
        if (w[r].size() != v.size()) throw std::invalid_argument("matvec_reference: shape mismatch");
        for (size_t c = 0; c < v.size(); ++c) out[r] += BigInt(w[r][c]) * v[c];
    }
    return out;
}

std::vector<BigInt> conv2d_reference(std::span<const BigInt> image,
                                     uint32_t channels, uint32_t height, uint32_t width,
                                     std::span<const int64_t> weights,
                                     uint32_t win_h, uint32_t win_w,
                                     uint32_t stride_y, uint32_t stride_x,
                                     uint32_t pad_top, uint32_t pad_left,
                                     uint32_t pad_bottom, uint32_t pad_right) {
    if (image.size() != static_cast<size_t>(channels) * height * width)
        throw std::invalid_argument("conv2d_reference: image size mismatch");
    if (weights.size() != static_cast<size_t>(channels) * win_h * win_w)
        throw std::invalid_argument("conv2d_reference: weight size mismatch");
    uint32_t padded_h = height + pad_top + pad_bottom;
    uint32_t padded_w = width + pad_left + pad_right;
    if (padded_h < win_h || padded_w < win_w) throw std::invalid_argument("conv2d_reference: window larger than input");
    uint32_t out_h = (padded_h - win_h) / stride_y + 1;
    uint32_t out_w = (padded_w - win_w) / stride_x + 1;
    std::vector<BigInt> out(static_cast<size_t>(out_h) * out_w, 0);
    for (uint32_t oy = 0; oy < out_h; ++oy) {
        for (uint32_t ox = 0; ox < out_w; ++ox) {
            BigInt acc = 0;
            for (uint32_t c = 0; c < channels; ++c) {
                for (uint32_t dy = 0; dy < win_h; ++dy) {
                    for (uint32_t dx = 0; dx < win_w; ++dx) {
                        int64_t y = static_cast<int64_t>(oy) * stride_y + dy - pad_top;
                        int64_t x = static_cast<int64_t>(ox) * stride_x + dx - pad_left;
                        if (y < 0 || x < 0 || y >= height || x >= width) continue;
                        const BigInt& px = image[(static_cast<size_t>(c) * height + y) * width + x];
                        acc += BigInt(weights[(static_cast<size_t>(c) * win_h + dy) * win_w + dx]) * px;
                    }
                }
            }
            out[static_cast<size_t>(oy) * out_w + ox] = acc;
        }
    }
    return out;
}

namespace {

void record_failure(SuiteResult& s, const std::string& what) {
    ++s.failures;
    if (s.first_failure.empty()) s.first_failure = what;
}

uint64_t pick_prime(const VerifyOptions& opt) {
    return opt.primes.empty() ? 998244353ull : opt.primes.front();
}

}  // namespace

SuiteResult suite_batching_homomorphism(const VerifyOptions& opt) {
    SuiteResult res;
    res.name = "batching-homomorphism";
    uint64_t p = pick_prime(opt);
    auto tables = NttTables::create(PrimeModulus::create(p, opt.n));
    std::mt19937_64 rng(opt.seed);
    std::uniform_int_distribution<uint64_t> dist(0, p - 1);
    for (uint64_t trial = 0; trial < opt.trials; ++trial) {
        SlotVector u, v;
        u.slots.resize(opt.n);
        v.slots.resize(opt.n);
        for (auto& x : u.slots) x = dist(rng);
        for (auto& x : v.slots) x = dist(rng);
        auto eu = slot_encode(tables, u);
        auto ev = slot_encode(tables, v);
        auto prod = slot_decode(tables, poly_mul_negacyclic(tables, eu, ev));
        auto sum = slot_decode(tables, poly_add(tables, eu, ev));
        for (uint32_t i = 0; i < opt.n; ++i) {
            ++res.checks;
            if (prod.slots[i] != mul_mod(u.slots[i], v.slots[i], p)) {
                record_failure(res, "slot product mismatch at trial " + std::to_string(trial));
                break;
            }
            if (sum.slots[i] != add_mod(u.slots[i], v.slots[i], p)) {
                record_failure(res, "slot sum mismatch at trial " + std::to_string(trial));
                break;
            }
        }
        auto rt = slot_decode(tables, eu);
        ++res.checks;
        if (rt.slots != u.slots) record_failure(res, "encode/decode roundtrip mismatch");
    }
    return res;
}

SuiteResult suite_rotation_oracle(const VerifyOptions& opt) {
    SuiteResult res;
    res.name = "rotation-oracle";
    uint64_t p = pick_prime(opt);
    std::mt19937_64 rng(opt.seed + 1);

    // Exhaustive sweep over every rotation amount at small degrees.
    for (uint32_t n = 4; n <= 64; n <<= 1) {
        auto tables = NttTables::create(PrimeModulus::create(p, n));
        std::uniform_int_distribution<uint64_t> dist(0, p - 1);
        SlotVector s;
        s.slots.resize(n);
        for (auto& x : s.slots) x = dist(rng);
        auto enc = slot_encode(tables, s);
        for (uint32_t k = 0; k < n / 2; ++k) {
            auto got = slot_decode(tables, galois_rotate_columns(tables, enc, k));
            ++res.checks;
            if (got.slots != rotate_slots_columns(s.slots, k)) {
                record_failure(res, "columns(" + std::to_string(k) + ") mismatch at n=" + std::to_string(n));
            }
        }
        auto got_rows = slot_decode(tables, galois_rotate_rows(tables, enc));
        ++res.checks;
        if (got_rows.slots != rotate_slots_rows(s.slots)) record_failure(res, "rows mismatch at n=" + std::to_string(n));
    }

    // Random spot checks at the configured degree.
    auto tables = NttTables::create(PrimeModulus::create(p, opt.n));
    std::uniform_int_distribution<uint64_t> dist(0, p - 1);
    std::uniform_int_distribution<uint32_t> kdist(0, opt.n / 2 - 1);
    for (uint64_t trial = 0; trial < opt.trials; ++trial) {
        SlotVector s;
        s.slots.resize(opt.n);
        for (auto& x : s.slots) x = dist(rng);
        auto enc = slot_encode(tables, s);
        uint32_t k = kdist(rng);
        bool rows = (trial % 4 == 3);
        auto rotated = rows ? galois_rotate_rows(tables, enc) : galois_rotate_columns(tables, enc, k);
        auto want = rows ? rotate_slots_rows(s.slots) : rotate_slots_columns(s.slots, k);
        ++res.checks;
        if (slot_decode(tables, rotated).slots != want) {
            record_failure(res, "random rotation mismatch at trial " + std::to_string(trial));
        }
    }
    return res;
}

SuiteResult suite_ntt_vs_schoolbook(const VerifyOptions& opt) {
    SuiteResult res;
    res.name = "ntt-vs-schoolbook";
    uint64_t p = pick_prime(opt);
    std::mt19937_64 rng(opt.seed + 2);
    for (uint32_t n : {8u, 64u, 256u, 1024u}) {
        auto tables = NttTables::create(PrimeModulus::create(p, n));
        std::uniform_int_distribution<uint64_t> dist(0, p - 1);
        uint64_t trials = std::max<uint64_t>(1, opt.trials / 4);
        for (uint64_t trial = 0; trial < trials; ++trial) {
            RingElement a, b;
            a.coeffs.resize(n);
            b.coeffs.resize(n);
            for (auto& x : a.coeffs) x = dist(rng);
            for (auto& x : b.coeffs) x = dist(rng);
            auto fast = poly_mul_negacyclic(tables, a, b);
            auto slow = schoolbook_negacyclic_mul(a.coeffs, b.coeffs, p);
            ++res.checks;
            if (fast.coeffs != slow) record_failure(res, "product mismatch at n=" + std::to_string(n));
        }
    }
    return res;
}

namespace {

std::vector<uint64_t> suite_primes(const VerifyOptions& opt) {
    if (!opt.primes.empty()) return opt.primes;
    return {998244353ull, 1004535809ull};
}

std::vector<int64_t> signed_values(std::mt19937_64& rng, size_t count, int64_t bound) {
    std::uniform_int_distribution<int64_t> dist(-bound, bound);
    std::vector<int64_t> v(count);
    for (auto& x : v) x = dist(rng);
    return v;
}

bool same_values(Evaluator& a_ev, const Message& a, Evaluator& b_ev, const Message& b) {
    return a_ev.lower(a) == b_ev.lower(b);
}

}  // namespace

SuiteResult suite_backend_agreement(const VerifyOptions& opt) {
    SuiteResult res;
    res.name = "backend-agreement";
    const std::vector<uint64_t> primes = suite_primes(opt);
    // The corruption hook lives in the slot backend's rotation; the ring
    // side stays honest so any tampering splits the pair.
    EvalContext slot_cx(BackendKind::Slot, opt.n, primes, 8, opt.corrupt_rotation);
    EvalContext ring_cx(BackendKind::Ring, opt.n, primes, 8, false);
    std::mt19937_64 rng(opt.seed + 3);
    const uint32_t half = opt.n / 2;
    std::uniform_int_distribution<uint32_t> kdist(1, half - 1);
    std::uniform_int_distribution<int> coin(0, 1);

    for (uint64_t trial = 0; trial < opt.trials; ++trial) {
        Evaluator se(slot_cx);
        Evaluator re(ring_cx);
        const std::vector<int64_t> base = signed_values(rng, opt.n, 50);
        const std::vector<int64_t> other = signed_values(rng, opt.n, 50);
        Message s = se.lift(base);
        Message r = re.lift(base);
        const Message s2 = se.lift(other);
        const Message r2 = re.lift(other);

        auto step = [&](const char* what, Message ns, Message nr) {
            ++res.checks;
            if (!same_values(se, ns, re, nr)) {
                record_failure(res, std::string(what) + " disagreed at trial " +
                                        std::to_string(trial));
            }
            s = std::move(ns);
            r = std::move(nr);
        };

        const int64_t k = (coin(rng) ? 1 : -1) * static_cast<int64_t>(kdist(rng));
        step("column rotation", se.rotate_columns(s, k), re.rotate_columns(r, k));
        step("addition", se.add(s, s2), re.add(r, r2));
        const std::vector<int64_t> plain = signed_values(rng, opt.n, 9);
        step("plain product", se.mul_plain(s, plain), re.mul_plain(r, plain));
        step("row rotation", se.rotate_rows(s), re.rotate_rows(r));
        std::vector<uint8_t> bits(opt.n);
        for (auto& b : bits) b = static_cast<uint8_t>(coin(rng));
        step("mask", se.mask(s, bits), re.mask(r, bits));
        const uint32_t amount = kdist(rng);
        step("bundled rotation", se.rotate_bundle(s, amount), re.rotate_bundle(r, amount));
        step("deep product", se.mul(s, s2), re.mul(r, r2));
        step("scalar product", se.mul_scalar(s, 7), re.mul_scalar(r, 7));
        step("plain addition", se.add_plain(s, plain), re.add_plain(r, plain));

        ++res.checks;
        if (!(se.counters().ops == re.counters().ops)) {
            record_failure(res, "operation counts diverged at trial " + std::to_string(trial));
        }
    }
    return res;
}

SuiteResult suite_kernel_oracles(const VerifyOptions& opt) {
    SuiteResult res;
    res.name = "kernel-oracles";
    const std::vector<uint64_t> primes = suite_primes(opt);
    std::mt19937_64 rng(opt.seed + 4);
    const uint32_t half = opt.n / 2;
    std::uniform_int_distribution<uint64_t> rdist(1, 64);

    auto check_vec = [&](const char* what, const std::vector<BigInt>& got,
                         const std::vector<BigInt>& want, uint64_t trial) {
        ++res.checks;
        if (got.size() < want.size()) {
            record_failure(res, std::string(what) + " output too short at trial " +
                                    std::to_string(trial));
            return;
        }
        for (size_t i = 0; i < got.size(); ++i) {
            const BigInt& expect = i < want.size() ? want[i] : BigInt(0);
            if (got[i] != expect) {
                record_failure(res, std::string(what) + " value mismatch at trial " +
                                        std::to_string(trial));
                return;
            }
        }
    };

    for (BackendKind backend : {BackendKind::Slot, BackendKind::Ring}) {
        EvalContext cx(backend, opt.n, primes, 8, false);
        for (uint64_t trial = 0; trial < opt.trials; ++trial) {
            const uint64_t r = rdist(rng);
            const uint64_t k = std::min<uint64_t>(rdist(rng), half);
            std::vector<std::vector<int64_t>> w(r);
            for (auto& row : w) row = signed_values(rng, k, 9);
            const std::vector<int64_t> x = signed_values(rng, k, 25);
            std::vector<BigInt> xb(x.begin(), x.end());
            const std::vector<BigInt> want = matvec_reference(w, xb);

            {
                Evaluator ev(cx);
                EncodedTensor t = encode_dense(ev, x);
                EncodedTensor out = matvec_rowmajor(ev, t, weights_from(w));
                check_vec("row-major products", decode(ev, out), want, trial);
                ++res.checks;
                const uint64_t span = reduction_span(t.rep, opt.n);
                if (!(ev.counters().ops == matvec_rowmajor_cost(opt.n, span, r))) {
                    record_failure(res, "row-major count drift at trial " + std::to_string(trial));
                }
            }
            {
                Evaluator ev(cx);
                EncodedTensor t = encode_sparse(ev, x);
                EncodedTensor out = matvec_colmajor(ev, t, weights_from(w));
                check_vec("column-major products", decode(ev, out), want, trial);
                ++res.checks;
                if (!(ev.counters().ops == matvec_colmajor_cost(k))) {
                    record_failure(res, "column-major count drift at trial " + std::to_string(trial));
                }
            }
            {
                Evaluator ev(cx);
                EncodedTensor t = encode_dense(ev, x);
                // A stacked segment must be at least 2 wide.
                const uint64_t pad = std::max<uint64_t>(2, pad_for(k));
                t.rep.pad = pad;
                const uint32_t copies = static_cast<uint32_t>(opt.n / pad);
                t = stack_copies(ev, t, copies);
                EncodedTensor out = matvec_stacked_rowmajor(ev, t, weights_from(w));
                out = mask_active(ev, out);
                check_vec("stacked products", decode(ev, out), want, trial);
            }
            {
                Evaluator ev(cx);
                EncodedTensor t = encode_dense(ev, x);
                std::vector<int64_t> by_slot(opt.n, 0);
                for (uint64_t i = 0; i < k; ++i) by_slot[i] = w[0][i];
                const uint64_t span = reduction_span(t.rep, opt.n);
                Message out = dot_product(ev, t.messages[0], by_slot, span);
                ++res.checks;
                if (ev.lower(out)[0] != want[0]) {
                    record_failure(res, "dot product mismatch at trial " + std::to_string(trial));
                }
                ++res.checks;
                if (!(ev.counters().ops == dot_product_cost(opt.n, span))) {
                    record_failure(res, "dot product count drift at trial " + std::to_string(trial));
                }
            }
            {
                const uint32_t records = 1 + static_cast<uint32_t>(rng() % 5);
                std::vector<std::vector<int64_t>> batch(records);
                for (auto& rec : batch) rec = signed_values(rng, k, 25);
                std::vector<BigInt> batch_want;
                for (const auto& rec : batch) {
                    std::vector<BigInt> rb(rec.begin(), rec.end());
                    const std::vector<BigInt> one = matvec_reference(w, rb);
                    batch_want.insert(batch_want.end(), one.begin(), one.end());
                }
                Evaluator ev(cx);
                EncodedTensor t = encode_simd(ev, batch);
                EncodedTensor out = simd_dense(ev, t, weights_from(w));
                check_vec("record-batched products", decode(ev, out), batch_want, trial);
                ++res.checks;
                if (!(ev.counters().ops == simd_dense_cost(r, k))) {
                    record_failure(res, "record-batched count drift at trial " + std::to_string(trial));
                }
            }

            // Window stage against the direct stencil walk.
            std::uniform_int_distribution<uint32_t> side(5, 10);
            std::uniform_int_distribution<uint32_t> small(1, 2);
            ConvGeometry g;
            g.channels = small(rng);
            g.in_h = side(rng);
            g.in_w = side(rng);
            g.win_h = 1 + rng() % 3;
            g.win_w = 1 + rng() % 3;
            g.stride_h = small(rng);
            g.stride_w = small(rng);
            g.pad_top = rng() % 2;
            g.pad_left = rng() % 2;
            const uint64_t maps = 1 + rng() % 3;
            const std::vector<int64_t> image =
                signed_values(rng, static_cast<size_t>(g.channels) * g.in_h * g.in_w, 25);
            std::vector<std::vector<int64_t>> cw(maps);
            for (auto& row : cw) row = signed_values(rng, g.window_volume(), 9);
            std::vector<BigInt> image_big(image.begin(), image.end());
            std::vector<BigInt> conv_want;
            for (uint64_t m = 0; m < maps; ++m) {
                const std::vector<BigInt> one = conv2d_reference(
                    image_big, g.channels, g.in_h, g.in_w, cw[m], g.win_h, g.win_w,
                    g.stride_h, g.stride_w, g.pad_top, g.pad_left, 0, 0);
                conv_want.insert(conv_want.end(), one.begin(), one.end());
            }
            {
                Evaluator ev(cx);
                EncodedTensor t = encode_convolution(ev, image, g);
                EncodedTensor out = conv_rowmajor(ev, t, weights_from(cw));
                check_vec("window products", decode(ev, out), conv_want, trial);
                ++res.checks;
                // Encoding is free, so the whole trace is the kernel's.
                if (!(ev.counters().ops == conv_rowmajor_cost(maps, g.window_volume()))) {
                    record_failure(res, "window count drift at trial " + std::to_string(trial));
                }
            }
        }
    }
    return res;
}

std::vector<SuiteResult> run_all_suites(const VerifyOptions& opt) {
    return {suite_batching_homomorphism(opt), suite_rotation_oracle(opt),
            suite_ntt_vs_schoolbook(opt), suite_backend_agreement(opt),
            suite_kernel_oracles(opt)};
}

}  // namespace packnn::selfcheck
