#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "packnn/layers.hpp"

namespace packnn {

// A file-format problem: malformed manifest, blob length mismatch, bad
// magic, truncation. Distinct from the engine's std::invalid_argument so
// callers can map the two to different exit codes.
struct parse_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LoadedModel {
    Shape3 input;
    std::vector<LayerSpec> layers;
    QuantizationPolicy policy;
};

// Reads a JSON manifest plus the little-endian float32 row-major weight
// blobs it references (paths resolved relative to the manifest). Requires a
// version field and checks every declared shape against its blob's length.
// Per-layer scales are folded into one scale per linear stage: layers merged
// into the same stage must agree.
LoadedModel load_model(const std::string& manifest_path);

// Writes the manifest and one blob per weight / bias row set next to it.
void save_model(const std::string& manifest_path, const LoadedModel& model);

// Big-endian IDX tensor of unsigned bytes, 1 to 3 dimensions.
struct IdxTensor {
    std::vector<uint32_t> dims;
    std::vector<int64_t> values;

    uint64_t count() const { return dims.empty() ? 0 : dims.front(); }
    uint64_t record_values() const {
        uint64_t v = 1;
        for (size_t i = 1; i < dims.size(); ++i) v *= dims[i];
        return v;
    }
};
IdxTensor load_idx(const std::string& path);

// Comma / newline separated numeric values.
std::vector<double> load_csv_features(const std::string& path);

}  // namespace packnn
