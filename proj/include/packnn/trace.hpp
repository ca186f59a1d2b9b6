#pragma once

#include <string>
#include <vector>

#include "packnn/plan.hpp"

namespace packnn {

// Fixed-width step table for a plan: one row per step (index, input shape as
// "count x dimension" with the representation name, operation, counter
// deltas), then the output row, totals, depth, peak live messages and the
// parameter set. Pure function of the plan and primes, so the bytes never
// vary between runs.
std::string render_trace_text(const InferencePlan& plan, const std::vector<uint64_t>& primes);

// Same content as one JSON object per line: a "step" record per row and one
// final "summary" record. No timestamps or other run-dependent fields.
std::string render_trace_records(const InferencePlan& plan, const std::vector<uint64_t>& primes);

}  // namespace packnn
