#include "packnn/trace.hpp"

#include <algorithm>
#include <array>
#include <sstream>

#include "json.hpp"

namespace packnn {

namespace {

constexpr const char* kCounterNames[7] = {"ct.ct", "ct.pt", "scalar", "mask",
                                          "add",   "rot.col", "rot.row"};

std::array<uint64_t, 7> counter_values(const CounterDelta& d) {
    return {d.ct_ct_mul, d.ct_plain_mul, d.scalar_mul, d.mask_mul, d.add, d.rot_cols, d.rot_rows};
}

std::string shape_cell(uint64_t count, uint64_t dim, const std::string& rep) {
    return std::to_string(count) + "x" + std::to_string(dim) + " " + rep;
}

std::string pad_right(const std::string& s, size_t width) {
    return s + std::string(width - s.size(), ' ');
}

std::string pad_left(const std::string& s, size_t width) {
    return std::string(width - s.size(), ' ') + s;
}

}  // namespace

std::string render_trace_text(const InferencePlan& plan, const std::vector<uint64_t>& primes) {
    const size_t rows = plan.steps.size();
    std::vector<std::string> shape(rows + 1), op(rows);
    for (size_t i = 0; i < rows; ++i) {
        shape[i] = shape_cell(plan.steps[i].in_count, plan.steps[i].in_dim, plan.steps[i].in_rep);
        op[i] = plan.steps[i].op;
    }
    shape[rows] = shape_cell(plan.out_count, plan.out_dim, plan.out_rep);

    size_t step_w = std::max<size_t>(4, std::to_string(rows ? rows - 1 : 0).size());
    size_t shape_w = 5;  // header "input"
    for (const auto& s : shape) shape_w = std::max(shape_w, s.size());
    size_t op_w = 9;  // header "operation"
    for (const auto& s : op) op_w = std::max(op_w, s.size());
    std::array<size_t, 7> num_w{};
    const auto totals = counter_values(plan.predicted_total);
    for (size_t c = 0; c < 7; ++c) {
        num_w[c] = std::string(kCounterNames[c]).size();
        num_w[c] = std::max(num_w[c], std::to_string(totals[c]).size());
    }

    std::ostringstream text;
    text << pad_left("step", step_w) << "  " << pad_right("input", shape_w) << "  "
         << pad_right("operation", op_w);
    for (size_t c = 0; c < 7; ++c) text << "  " << pad_left(kCounterNames[c], num_w[c]);
    text << "\n";
    for (size_t i = 0; i < rows; ++i) {
        text << pad_left(std::to_string(i), step_w) << "  " << pad_right(shape[i], shape_w) << "  "
             << pad_right(op[i], op_w);
        const auto vals = counter_values(plan.steps[i].predicted);
        for (size_t c = 0; c < 7; ++c) text << "  " << pad_left(std::to_string(vals[c]), num_w[c]);
        text << "\n";
    }
    text << pad_left("out", step_w) << "  " << shape[rows] << "\n";
    text << pad_right("totals", step_w + shape_w + op_w + 4);
    for (size_t c = 0; c < 7; ++c) text << "  " << pad_left(std::to_string(totals[c]), num_w[c]);
    text << "\n";
    text << "depth " << plan.depth_needed << "  peak messages " << plan.predicted_peak() << "\n";
    text << "n " << plan.n << "  primes";
    for (uint64_t p : primes) text << " " << p;
    text << "\n";
    return text.str();
}

std::string render_trace_records(const InferencePlan& plan, const std::vector<uint64_t>& primes) {
    std::ostringstream lines;
    auto counters_json = [](const CounterDelta& d) {
        nlohmann::json j;
        const auto vals = counter_values(d);
        const char* keys[7] = {"ct_ct_mul", "ct_plain_mul", "scalar_mul", "mask_mul",
                               "add",       "rot_cols",     "rot_rows"};
        for (size_t c = 0; c < 7; ++c) j[keys[c]] = vals[c];
        return j;
    };
    for (size_t i = 0; i < plan.steps.size(); ++i) {
        const PlanStep& s = plan.steps[i];
        nlohmann::json j;
        j["record"] = "step";
        j["step"] = i;
        j["count"] = s.in_count;
        j["dim"] = s.in_dim;
        j["rep"] = s.in_rep;
        j["op"] = s.op;
        j["live"] = plan.live_entering[i];
        j["counters"] = counters_json(s.predicted);
        lines << j.dump() << "\n";
    }
    nlohmann::json j;
    j["record"] = "summary";
    j["strategy"] = strategy_name(plan.strategy);
    j["out_count"] = plan.out_count;
    j["out_dim"] = plan.out_dim;
    j["out_rep"] = plan.out_rep;
    j["totals"] = counters_json(plan.predicted_total);
    j["depth"] = plan.depth_needed;
    j["peak_messages"] = plan.predicted_peak();
    j["n"] = plan.n;
    j["primes"] = primes;
    lines << j.dump() << "\n";
    return lines.str();
}

}  // namespace packnn
