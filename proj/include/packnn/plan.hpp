#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "packnn/kernels.hpp"
#include "packnn/layers.hpp"

namespace packnn {

// Packing strategies for running a collapsed network over the slot matrix.
// The lola strategies keep few wide messages alive; cryptonets-simd spends
// one message per value and batches records across slots instead.
enum class Strategy {
    LolaMnist,
    LolaDenseMnist,
    LolaCifar,
    CryptonetsSimd,
    LinearFeatures,
};

const char* strategy_name(Strategy s);
Strategy strategy_from_name(const std::string& name);
std::vector<Strategy> all_strategies();

// Ring degree a strategy assumes when the caller does not override it.
uint32_t default_degree(Strategy s);

// Default modulus chain: three primes congruent to 1 mod 2^15, so every
// power-of-two degree up to 16384 works with one list.
std::vector<uint64_t> default_primes();

struct PlanOptions {
    uint32_t n = 0;  // 0 = strategy default
    // A window stage after the first one is realized as a row-major matrix
    // when window_volume * maps exceeds this; smaller interior window stages
    // have no packed realization and are rejected.
    uint64_t window_matrix_threshold = 100000;
};

// One step of an inference plan: the tensor shape it consumes, shown as
// "count x dimension" plus the representation display name, the exact
// operation tallies it must add, and the callable that applies it.
struct PlanStep {
    std::string op;
    uint64_t in_count = 0;
    uint64_t in_dim = 0;
    std::string in_rep;
    CounterDelta predicted;
    std::function<EncodedTensor(Evaluator&, const QuantizedNetwork&, const EncodedTensor&)> run;
};

struct InferencePlan {
    Strategy strategy = Strategy::LolaMnist;
    uint32_t n = 0;
    uint32_t depth_needed = 0;  // squarings on the critical path
    std::vector<PlanStep> steps;
    CounterDelta predicted_total;
    // Message count entering step i, then the final count: size steps + 1.
    std::vector<uint64_t> live_entering;

    // Output row of the table: display shape and representation name.
    uint64_t out_count = 0;
    uint64_t out_dim = 0;
    std::string out_rep;

    // Expected input tensor, checked by execute.
    RepKind in_kind = RepKind::Dense;
    uint64_t in_messages = 0;
    uint64_t in_length = 0;
    uint64_t input_values = 0;  // raw values encode_input expects
    std::function<EncodedTensor(Evaluator&, const std::vector<int64_t>&)> encode_input;

    uint64_t predicted_peak() const;
};

// Builds the step table for running `net` under strategy `s`, with every
// counter the execution will spend predicted exactly. Throws
// std::invalid_argument when the network shape does not fit the strategy
// (wrong stage pattern, stacked layer wider than the message, no collision
// free mask packing, interior window stage below the matrix threshold).
InferencePlan build_plan(const QuantizedNetwork& net, Strategy s, const PlanOptions& opt = {});

struct CostReport {
    CounterDelta total;
    std::vector<CounterDelta> per_step;
    uint64_t live_messages_peak = 0;
    uint32_t depth_consumed = 0;
};

struct ExecutionResult {
    std::vector<BigInt> scores;
    CostReport report;
};

// Runs the plan under the evaluator's backend. Throws depth_error up front
// when the plan needs more squarings than the context budget allows;
// magnitude_error surfaces from the evaluator when values outgrow the
// modulus capacity; std::logic_error reports a step whose measured counters
// deviate from the prediction. The input must match the plan's first row.
ExecutionResult execute(const InferencePlan& plan, const EncodedTensor& input,
                        const QuantizedNetwork& net, Evaluator& ev);

// Index of the largest score; lowest index wins ties.
uint32_t predict(const std::vector<BigInt>& scores);

}  // namespace packnn
