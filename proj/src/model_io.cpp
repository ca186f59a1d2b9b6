#include "packnn/model_io.hpp"

#include <bit>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "json.hpp"

namespace packnn {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

[[noreturn]] void bad(const std::string& what) { throw parse_error(what); }

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) bad("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return std::move(os).str();
}

// Little-endian float32 blob with an exact element count.
std::vector<double> read_blob(const fs::path& path, uint64_t expect) {
    const std::string raw = read_file(path.string());
    if (raw.size() != expect * 4) {
        bad(path.filename().string() + ": expected " + std::to_string(expect * 4) +
            " bytes, found " + std::to_string(raw.size()));
    }
    std::vector<double> out(expect);
    for (uint64_t i = 0; i < expect; ++i) {
        const auto* b = reinterpret_cast<const unsigned char*>(raw.data() + i * 4);
        const uint32_t u = static_cast<uint32_t>(b[0]) | static_cast<uint32_t>(b[1]) << 8 |
                           static_cast<uint32_t>(b[2]) << 16 | static_cast<uint32_t>(b[3]) << 24;
        out[i] = static_cast<double>(std::bit_cast<float>(u));
    }
    return out;
}

void write_blob(const fs::path& path, const std::vector<double>& values) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) bad("cannot write " + path.string());
    for (double v : values) {
        const uint32_t u = std::bit_cast<uint32_t>(static_cast<float>(v));
        const char b[4] = {static_cast<char>(u & 0xff), static_cast<char>(u >> 8 & 0xff),
                           static_cast<char>(u >> 16 & 0xff), static_cast<char>(u >> 24 & 0xff)};
        out.write(b, 4);
    }
    if (!out) bad("short write to " + path.string());
}

uint64_t field_u64(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_number_unsigned()) {
        bad(std::string("missing or non-numeric field: ") + key);
    }
    return j[key].get<uint64_t>();
}

std::pair<uint32_t, uint32_t> field_pair(const json& j, const char* key) {
    if (!j.contains(key)) bad(std::string("missing field: ") + key);
    const json& v = j[key];
    if (v.is_number_unsigned()) {
        const uint32_t s = v.get<uint32_t>();
        return {s, s};
    }
    if (!v.is_array() || v.size() != 2 || !v[0].is_number_unsigned() ||
        !v[1].is_number_unsigned()) {
        bad(std::string(key) + " must be an integer or a pair");
    }
    return {v[0].get<uint32_t>(), v[1].get<uint32_t>()};
}

std::vector<std::vector<double>> rows_of(std::vector<double> flat, uint64_t rows, uint64_t cols) {
    std::vector<std::vector<double>> out(rows, std::vector<double>(cols));
    for (uint64_t r = 0; r < rows; ++r) {
        for (uint64_t c = 0; c < cols; ++c) out[r][c] = flat[r * cols + c];
    }
    return out;
}

bool affine_layer(LayerKind k) {
    return k == LayerKind::Conv || k == LayerKind::AvgPool || k == LayerKind::Dense;
}

}  // namespace

LoadedModel load_model(const std::string& manifest_path) {
    json root;
    try {
        root = json::parse(read_file(manifest_path));
    } catch (const json::exception& e) {
        bad(std::string("manifest is not valid JSON: ") + e.what());
    }
    if (!root.is_object()) bad("manifest root must be an object");
    if (!root.contains("version")) bad("manifest has no version field");
    if (!root["version"].is_number_unsigned() || root["version"].get<uint64_t>() != 1) {
        bad("unsupported manifest version");
    }
    if (!root.contains("input") || !root["input"].is_object()) bad("manifest has no input shape");

    LoadedModel m;
    const json& in = root["input"];
    m.input.c = static_cast<uint32_t>(field_u64(in, "channels"));
    m.input.h = static_cast<uint32_t>(field_u64(in, "height"));
    m.input.w = static_cast<uint32_t>(field_u64(in, "width"));

    if (root.contains("input_bound")) {
        if (!root["input_bound"].is_number_unsigned()) bad("input_bound must be a nonnegative integer");
        m.policy.input_bound = root["input_bound"].get<int64_t>();
    }

    if (!root.contains("layers") || !root["layers"].is_array() || root["layers"].empty()) {
        bad("manifest has no layers");
    }
    const fs::path dir = fs::path(manifest_path).parent_path();

    // One weight scale per linear stage: a squaring closes the current run
    // of affine layers, and every scale declared inside one run must agree.
    std::vector<uint32_t> run_scales;
    bool run_open = false;
    std::optional<uint32_t> run_scale;
    auto close_run = [&] {
        if (run_open) run_scales.push_back(run_scale.value_or(0));
        run_open = false;
        run_scale.reset();
    };

    for (const json& jl : root["layers"]) {
        if (!jl.is_object() || !jl.contains("kind") || !jl["kind"].is_string()) {
            bad("every layer needs a kind");
        }
        const std::string kind = jl["kind"].get<std::string>();
        LayerSpec l;
        if (kind == "conv") {
            const auto [wh, ww] = field_pair(jl, "window");
            const auto [sh, sw] = field_pair(jl, "stride");
            const uint64_t maps = field_u64(jl, "maps");
            const uint64_t volume = field_u64(jl, "inputs");
            if (!jl.contains("weights") || !jl["weights"].is_string()) bad("conv layer needs a weights file");
            std::vector<double> flat =
                read_blob(dir / jl["weights"].get<std::string>(), maps * volume);
            std::vector<double> bias;
            if (jl.contains("bias")) {
                bias = read_blob(dir / jl["bias"].get<std::string>(), maps);
            }
            l = conv_spec(wh, ww, sh, static_cast<uint32_t>(maps), rows_of(std::move(flat), maps, volume),
                          std::move(bias));
            l.stride_w = sw;
        } else if (kind == "dense") {
            const uint64_t rows = field_u64(jl, "outputs");
            const uint64_t cols = field_u64(jl, "inputs");
            if (!jl.contains("weights") || !jl["weights"].is_string()) bad("dense layer needs a weights file");
            std::vector<double> flat = read_blob(dir / jl["weights"].get<std::string>(), rows * cols);
            std::vector<double> bias;
            if (jl.contains("bias")) {
                bias = read_blob(dir / jl["bias"].get<std::string>(), rows);
            }
            l = dense_spec(rows_of(std::move(flat), rows, cols), std::move(bias));
        } else if (kind == "avgpool") {
            const auto [wh, ww] = field_pair(jl, "window");
            const auto [sh, sw] = field_pair(jl, "stride");
            l = avgpool_spec(wh, sh);
            l.win_w = ww;
            l.stride_w = sw;
        } else if (kind == "square") {
            l = square_spec();
        } else if (kind == "softmax") {
            l = softmax_spec();
        } else {
            bad("unknown layer kind: " + kind);
        }

        if (jl.contains("pad")) {
            const json& p = jl["pad"];
            if (!p.is_array() || p.size() != 4) bad("pad must be [top, left, bottom, right]");
            for (const json& v : p)
                if (!v.is_number_unsigned()) bad("pad must be [top, left, bottom, right]");
            l.pad_top = p[0].get<uint32_t>();
            l.pad_left = p[1].get<uint32_t>();
            l.pad_bottom = p[2].get<uint32_t>();
            l.pad_right = p[3].get<uint32_t>();
        }

        if (jl.contains("scale")) {
            if (l.weights.empty()) bad("scale declared on a layer without weights");
            if (!jl["scale"].is_number_unsigned() || jl["scale"].get<uint64_t>() > 32) {
                bad("scale must be an integer in [0, 32]");
            }
            const uint32_t s = jl["scale"].get<uint32_t>();
            if (run_open && run_scale && *run_scale != s) {
                bad("scales disagree within one linear stage");
            }
            run_scale = s;
        }

        if (affine_layer(l.kind)) {
            run_open = true;
        } else {
            close_run();
        }
        m.layers.push_back(std::move(l));
    }
    close_run();
    m.policy.scale_bits = run_scales.empty() ? std::vector<uint32_t>{0} : std::move(run_scales);
    return m;
}

void save_model(const std::string& manifest_path, const LoadedModel& model) {
    const fs::path dir = fs::path(manifest_path).parent_path();
    const std::string stem = fs::path(manifest_path).stem().string();
    json root;
    root["version"] = 1;
    root["input"] = {{"channels", model.input.c}, {"height", model.input.h}, {"width", model.input.w}};
    root["input_bound"] = model.policy.input_bound;

    json layers = json::array();
    size_t stage = 0;
    bool run_open = false;
    bool scale_written = false;
    for (size_t i = 0; i < model.layers.size(); ++i) {
        const LayerSpec& l = model.layers[i];
        json jl;
        const std::string base = stem + ".layer" + std::to_string(i);
        switch (l.kind) {
            case LayerKind::Conv: {
                jl["kind"] = "conv";
                jl["window"] = {l.win_h, l.win_w};
                jl["stride"] = {l.stride_h, l.stride_w};
                jl["maps"] = l.maps;
                jl["inputs"] = l.weights.empty() ? 0 : l.weights[0].size();
                break;
            }
            case LayerKind::Dense: {
                jl["kind"] = "dense";
                jl["outputs"] = l.weights.size();
                jl["inputs"] = l.weights.empty() ? 0 : l.weights[0].size();
                break;
            }
            case LayerKind::AvgPool: {
                jl["kind"] = "avgpool";
                jl["window"] = {l.win_h, l.win_w};
                jl["stride"] = {l.stride_h, l.stride_w};
                break;
            }
            case LayerKind::Square: jl["kind"] = "square"; break;
            case LayerKind::Softmax: jl["kind"] = "softmax"; break;
        }
        if (l.pad_top || l.pad_left || l.pad_bottom || l.pad_right) {
            jl["pad"] = {l.pad_top, l.pad_left, l.pad_bottom, l.pad_right};
        }
        if (!l.weights.empty()) {
            std::vector<double> flat;
            flat.reserve(l.weights.size() * l.weights[0].size());
            for (const auto& row : l.weights) flat.insert(flat.end(), row.begin(), row.end());
            write_blob(dir / (base + ".weights.bin"), flat);
            jl["weights"] = base + ".weights.bin";
            if (!l.bias.empty()) {
                write_blob(dir / (base + ".bias.bin"), l.bias);
                jl["bias"] = base + ".bias.bin";
            }
            // First weighted layer of each run carries the stage scale.
            const size_t scales = model.policy.scale_bits.size();
            if (!scale_written && (scales == 1 || stage < scales)) {
                jl["scale"] = model.policy.scale_bits[scales == 1 ? 0 : stage];
                scale_written = true;
            }
        }
        if (affine_layer(l.kind)) {
            run_open = true;
        } else if (run_open) {
            run_open = false;
            scale_written = false;
            ++stage;
        }
        layers.push_back(std::move(jl));
    }
    root["layers"] = std::move(layers);

    std::ofstream out(manifest_path, std::ios::trunc);
    if (!out) bad("cannot write " + manifest_path);
    out << root.dump(2) << "\n";
    if (!out) bad("short write to " + manifest_path);
}

IdxTensor load_idx(const std::string& path) {
    const std::string raw = read_file(path);
    if (raw.size() < 4) bad(path + ": truncated IDX header");
    const auto* b = reinterpret_cast<const unsigned char*>(raw.data());
    if (b[0] != 0 || b[1] != 0) bad(path + ": bad IDX magic");
    if (b[2] != 0x08) bad(path + ": only unsigned-byte IDX data is supported");
    const uint32_t ndims = b[3];
    if (ndims < 1 || ndims > 3) bad(path + ": IDX rank must be 1 to 3");
    if (raw.size() < 4 + 4ull * ndims) bad(path + ": truncated IDX dimension list");

    IdxTensor t;
    uint64_t total = 1;
    for (uint32_t d = 0; d < ndims; ++d) {
        const auto* q = b + 4 + 4 * d;
        const uint32_t v = static_cast<uint32_t>(q[0]) << 24 | static_cast<uint32_t>(q[1]) << 16 |
                           static_cast<uint32_t>(q[2]) << 8 | static_cast<uint32_t>(q[3]);
        t.dims.push_back(v);
        total *= v;
    }
    if (raw.size() != 4 + 4ull * ndims + total) {
        bad(path + ": IDX payload length does not match the declared shape");
    }
    t.values.resize(total);
    const auto* payload = b + 4 + 4ull * ndims;
    for (uint64_t i = 0; i < total; ++i) t.values[i] = payload[i];
    return t;
}

std::vector<double> load_csv_features(const std::string& path) {
    const std::string raw = read_file(path);
    std::vector<double> out;
    size_t pos = 0;
    while (pos < raw.size()) {
        size_t end = raw.find_first_of(",\n", pos);
        if (end == std::string::npos) end = raw.size();
        std::string token = raw.substr(pos, end - pos);
        const size_t a = token.find_first_not_of(" \t\r");
        if (a != std::string::npos) {
            const size_t z = token.find_last_not_of(" \t\r");
            token = token.substr(a, z - a + 1);
            char* tail = nullptr;
            const double v = std::strtod(token.c_str(), &tail);
            if (tail == token.c_str() || *tail != '\0') {
                bad(path + ": non-numeric value '" + token + "'");
            }
            out.push_back(v);
        }
        pos = end + 1;
    }
    if (out.empty()) bad(path + ": no values");
    return out;
}

}  // namespace packnn
