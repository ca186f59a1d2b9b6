#include "packnn/evaluator.hpp"

#include <bit>
#include <sstream>

namespace packnn {

std::string CounterDelta::brief() const {
    std::ostringstream os;
    bool first = true;
    auto emit = [&](const char* k, uint64_t v) {
        if (v == 0) return;
        if (!first) os << ' ';
        os << k << ':' << v;
        first = false;
    };
    emit("mul", ct_ct_mul);
    emit("pmul", ct_plain_mul);
    emit("smul", scalar_mul);
    emit("mask", mask_mul);
    emit("add", add);
    emit("rotc", rot_cols);
    emit("rotr", rot_rows);
    if (first) os << '-';
    return os.str();
}

const char* backend_name(BackendKind k) { return k == BackendKind::Slot ? "slot" : "ring"; }

BackendKind backend_from_name(const std::string& s) {
    if (s == "slot") return BackendKind::Slot;
    if (s == "ring") return BackendKind::Ring;
    throw std::invalid_argument("unknown backend: " + s);
}

EvalContext::EvalContext(BackendKind kind, uint32_t n, const std::vector<uint64_t>& primes,
                         uint32_t max_depth, bool corrupt_rotation)
    : kind_(kind),
      n_(n),
      modulus_(CrtModulus::create(primes, n)),
      capacity_(modulus_.capacity()),
      max_depth_(max_depth),
      corrupt_rotation_(corrupt_rotation) {
    tables_.reserve(modulus_.primes.size());
    for (const auto& pm : modulus_.primes) tables_.push_back(NttTables::create(pm));
}

void Evaluator::check_magnitude(const BigInt& magnitude, const char* op) const {
    if (magnitude > cx_->capacity()) {
        std::ostringstream os;
        os << op << ": magnitude bound " << magnitude.str() << " exceeds modulus capacity "
           << cx_->capacity().str();
        throw magnitude_error(os.str());
    }
}

Message Evaluator::make_message(std::vector<std::vector<uint64_t>> limbs, uint32_t depth,
                                uint32_t plain_depth, BigInt magnitude) const {
    Message m;
    m.payload = std::make_shared<MessagePayload>(MessagePayload{std::move(limbs)});
    m.depth = depth;
    m.plain_depth = plain_depth;
    m.magnitude = std::move(magnitude);
    return m;
}

Message Evaluator::lift_big(std::span<const BigInt> values) const {
    if (values.size() > cx_->n()) throw std::invalid_argument("lift: more values than slots");
    BigInt mag = 0;
    for (const auto& v : values) {
        BigInt a = big_abs(v);
        if (a > mag) mag = a;
    }
    check_magnitude(mag, "lift");
    std::vector<std::vector<uint64_t>> limbs(cx_->prime_count());
    for (size_t li = 0; li < cx_->prime_count(); ++li) {
        uint64_t p = cx_->modulus().primes[li].p;
        std::vector<uint64_t> slots(cx_->n(), 0);
        for (size_t i = 0; i < values.size(); ++i) {
            BigInt r = values[i] % p;
            if (r < 0) r += p;
            slots[i] = static_cast<uint64_t>(r);
        }
        if (cx_->kind() == BackendKind::Ring) {
            limbs[li] = slot_encode(cx_->tables(li), SlotVector{std::move(slots)}).coeffs;
        } else {
            limbs[li] = std::move(slots);
        }
    }
    return make_message(std::move(limbs), 0, 0, std::move(mag));
}

Message Evaluator::lift(std::span<const int64_t> values) const {
    std::vector<BigInt> big(values.begin(), values.end());
    return lift_big(big);
}

std::vector<BigInt> Evaluator::lower(const Message& m) const {
    size_t np = cx_->prime_count();
    std::vector<uint64_t> primes(np);
    for (size_t i = 0; i < np; ++i) primes[i] = cx_->modulus().primes[i].p;

    std::vector<std::vector<uint64_t>> slot_limbs(np);
    for (size_t li = 0; li < np; ++li) {
        if (cx_->kind() == BackendKind::Ring) {
            slot_limbs[li] = slot_decode(cx_->tables(li), RingElement{m.payload->limbs[li]}).slots;
        } else {
            slot_limbs[li] = m.payload->limbs[li];
        }
    }
    std::vector<BigInt> out(cx_->n());
    std::vector<uint64_t> residues(np);
    for (uint32_t i = 0; i < cx_->n(); ++i) {
        for (size_t li = 0; li < np; ++li) residues[li] = slot_limbs[li][i];
        out[i] = center_mod(crt_join(residues, primes), cx_->modulus().composite);
    }
    return out;
}

std::vector<std::vector<uint64_t>> Evaluator::plain_limbs(std::span<const int64_t> values) const {
    if (values.size() > cx_->n()) throw std::invalid_argument("plain operand: more values than slots");
    std::vector<std::vector<uint64_t>> limbs(cx_->prime_count());
    for (size_t li = 0; li < cx_->prime_count(); ++li) {
        uint64_t p = cx_->modulus().primes[li].p;
        std::vector<uint64_t> slots(cx_->n(), 0);
        for (size_t i = 0; i < values.size(); ++i) {
            int64_t v = values[i];
            uint64_t r = v >= 0 ? static_cast<uint64_t>(v) % p
                                : p - (static_cast<uint64_t>(-(v + 1)) + 1) % p;
            slots[i] = r == p ? 0 : r;
        }
        limbs[li] = std::move(slots);
    }
    return limbs;
}

Message Evaluator::add(const Message& a, const Message& b) {
    BigInt mag = a.magnitude + b.magnitude;
    check_magnitude(mag, "add");
    counters_.ops.add += 1;
    std::vector<std::vector<uint64_t>> limbs(cx_->prime_count());
    for (size_t li = 0; li < cx_->prime_count(); ++li) {
        uint64_t p = cx_->modulus().primes[li].p;
        const auto& la = a.payload->limbs[li];
        const auto& lb = b.payload->limbs[li];
        auto& out = limbs[li];
        out.resize(cx_->n());
        for (uint32_t i = 0; i < cx_->n(); ++i) out[i] = add_mod(la[i], lb[i], p);
    }
    return make_message(std::move(limbs), std::max(a.depth, b.depth),
                        std::max(a.plain_depth, b.plain_depth), std::move(mag));
}

Message Evaluator::add_plain(const Message& a, std::span<const int64_t> values) {
    int64_t mx = 0;
    for (int64_t v : values) mx = std::max(mx, v < 0 ? -v : v);
    BigInt mag = a.magnitude + mx;
    check_magnitude(mag, "add_plain");
    counters_.ops.add += 1;
    auto plain = plain_limbs(values);
    std::vector<std::vector<uint64_t>> limbs(cx_->prime_count());
    for (size_t li = 0; li < cx_->prime_count(); ++li) {
        uint64_t p = cx_->modulus().primes[li].p;
        const auto& la = a.payload->limbs[li];
        auto& out = limbs[li];
        if (cx_->kind() == BackendKind::Ring) {
            const auto& t = cx_->tables(li);
            RingElement pe = slot_encode(t, SlotVector{std::move(plain[li])});
            out = poly_add(t, RingElement{la}, pe).coeffs;
        } else {
            out.resize(cx_->n());
            for (uint32_t i = 0; i < cx_->n(); ++i) out[i] = add_mod(la[i], plain[li][i], p);
        }
    }
    return make_message(std::move(limbs), a.depth, a.plain_depth, std::move(mag));
}

Message Evaluator::mul(const Message& a, const Message& b) {
    uint32_t depth = std::max(a.depth, b.depth) + 1;
    if (depth > cx_->max_depth()) {
        throw depth_error("mul: depth " + std::to_string(depth) + " exceeds budget " +
                          std::to_string(cx_->max_depth()));
    }
    BigInt mag = a.magnitude * b.magnitude;
    check_magnitude(mag, "mul");
    counters_.ops.ct_ct_mul += 1;
    std::vector<std::vector<uint64_t>> limbs(cx_->prime_count());
    for (size_t li = 0; li < cx_->prime_count(); ++li) {
        const auto& la = a.payload->limbs[li];
        const auto& lb = b.payload->limbs[li];
        if (cx_->kind() == BackendKind::Ring) {
            limbs[li] = poly_mul_negacyclic(cx_->tables(li), RingElement{la}, RingElement{lb}).coeffs;
        } else {
            uint64_t p = cx_->modulus().primes[li].p;
            auto& out = limbs[li];
            out.resize(cx_->n());
            for (uint32_t i = 0; i < cx_->n(); ++i) out[i] = mul_mod(la[i], lb[i], p);
        }
    }
    return make_message(std::move(limbs), depth, std::max(a.plain_depth, b.plain_depth),
                        std::move(mag));
}

Message Evaluator::mul_plain(const Message& a, std::span<const int64_t> values) {
    int64_t mx = 0;
    for (int64_t v : values) mx = std::max(mx, v < 0 ? -v : v);
    BigInt mag = a.magnitude * mx;
    check_magnitude(mag, "mul_plain");
    counters_.ops.ct_plain_mul += 1;
    auto plain = plain_limbs(values);
    std::vector<std::vector<uint64_t>> limbs(cx_->prime_count());
    for (size_t li = 0; li < cx_->prime_count(); ++li) {
        const auto& la = a.payload->limbs[li];
        if (cx_->kind() == BackendKind::Ring) {
            const auto& t = cx_->tables(li);
            RingElement pe = slot_encode(t, SlotVector{std::move(plain[li])});
            limbs[li] = poly_mul_negacyclic(t, RingElement{la}, pe).coeffs;
        } else {
            uint64_t p = cx_->modulus().primes[li].p;
            auto& out = limbs[li];
            out.resize(cx_->n());
            for (uint32_t i = 0; i < cx_->n(); ++i) out[i] = mul_mod(la[i], plain[li][i], p);
        }
    }
    return make_message(std::move(limbs), a.depth, a.plain_depth + 1, std::move(mag));
}

Message Evaluator::mask(const Message& a, std::span<const uint8_t> bits) {
    if (bits.size() > cx_->n()) throw std::invalid_argument("mask: more bits than slots");
    bool any = false;
    for (uint8_t b : bits) {
        if (b > 1) throw std::invalid_argument("mask: entries must be 0 or 1");
        any |= (b == 1);
    }
    if (!any) throw std::invalid_argument("mask: empty mask");
    std::vector<int64_t> vals(bits.begin(), bits.end());
    counters_.ops.mask_mul += 1;
    Message r = mul_plain(a, vals);
    return r;
}

Message Evaluator::mul_scalar(const Message& a, int64_t s) {
    BigInt mag = a.magnitude * (s < 0 ? -BigInt(s) : BigInt(s));
    check_magnitude(mag, "mul_scalar");
    counters_.ops.scalar_mul += 1;
    std::vector<std::vector<uint64_t>> limbs(cx_->prime_count());
    for (size_t li = 0; li < cx_->prime_count(); ++li) {
        uint64_t p = cx_->modulus().primes[li].p;
        uint64_t r = s >= 0 ? static_cast<uint64_t>(s) % p
                            : p - (static_cast<uint64_t>(-(s + 1)) + 1) % p;
        if (r == p) r = 0;
        const auto& la = a.payload->limbs[li];
        auto& out = limbs[li];
        out.resize(cx_->n());
        for (uint32_t i = 0; i < cx_->n(); ++i) out[i] = mul_mod(la[i], r, p);
    }
    return make_message(std::move(limbs), a.depth, a.plain_depth + 1, std::move(mag));
}

Message Evaluator::apply_columns_shift(const Message& a, uint32_t right_by) const {
    uint32_t half = cx_->half();
    uint32_t shift = right_by % half;
    if (cx_->kind() == BackendKind::Slot && cx_->corrupt_rotation()) {
        shift = (shift + 1) % half;  // negative-control hook for the verify suites
    }
    std::vector<std::vector<uint64_t>> limbs(cx_->prime_count());
    for (size_t li = 0; li < cx_->prime_count(); ++li) {
        const auto& la = a.payload->limbs[li];
        if (cx_->kind() == BackendKind::Ring) {
            limbs[li] = galois_rotate_columns(cx_->tables(li), RingElement{la}, shift).coeffs;
        } else {
            auto& out = limbs[li];
            out.resize(cx_->n());
            for (uint32_t b = 0; b < 2; ++b) {
                for (uint32_t j = 0; j < half; ++j) {
                    out[b * half + (j + shift) % half] = la[b * half + j];
                }
            }
        }
    }
    Message m;
    m.payload = std::make_shared<MessagePayload>(MessagePayload{std::move(limbs)});
    m.depth = a.depth;
    m.plain_depth = a.plain_depth;
    m.magnitude = a.magnitude;
    return m;
}

Message Evaluator::rotate_columns(const Message& a, int64_t k) {
    uint32_t half = cx_->half();
    if (k <= -static_cast<int64_t>(half) || k >= static_cast<int64_t>(half)) {
        throw std::invalid_argument("rotate_columns: |k| must be below n/2");
    }
    if (k == 0) return a;
    uint64_t amount = static_cast<uint64_t>(k < 0 ? -k : k);
    counters_.ops.rot_cols += std::popcount(amount);
    uint32_t right_by = k > 0 ? static_cast<uint32_t>(k) : half - static_cast<uint32_t>(-k);
    return apply_columns_shift(a, right_by);
}

Message Evaluator::rotate_rows(const Message& a) {
    counters_.ops.rot_rows += 1;
    uint32_t half = cx_->half();
    std::vector<std::vector<uint64_t>> limbs(cx_->prime_count());
    for (size_t li = 0; li < cx_->prime_count(); ++li) {
        const auto& la = a.payload->limbs[li];
        if (cx_->kind() == BackendKind::Ring) {
            limbs[li] = galois_rotate_rows(cx_->tables(li), RingElement{la}).coeffs;
        } else {
            auto& out = limbs[li];
            out.resize(cx_->n());
            for (uint32_t j = 0; j < half; ++j) {
                out[j] = la[half + j];
                out[half + j] = la[j];
            }
        }
    }
    Message m;
    m.payload = std::make_shared<MessagePayload>(MessagePayload{std::move(limbs)});
    m.depth = a.depth;
    m.plain_depth = a.plain_depth;
    m.magnitude = a.magnitude;
    return m;
}

Message Evaluator::rotate_bundle(const Message& a, uint32_t amount) {
    uint32_t half = cx_->half();
    if (amount >= half) throw std::invalid_argument("rotate_bundle: amount must be below n/2");
    if (amount == 0) return a;
    counters_.ops.rot_cols += 1;
    return apply_columns_shift(a, amount);
}

void Evaluator::absorb(const Evaluator& child) {
    counters_.ops += child.counters_.ops;
    counters_.note_live(child.counters_.live_messages_peak);
}

}  // namespace packnn
