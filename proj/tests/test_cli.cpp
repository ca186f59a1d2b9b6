#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "net_builders.hpp"
#include "packnn/cli.hpp"
#include "packnn/model_io.hpp"
#include "packnn/trace.hpp"

using namespace packnn;
using namespace packnn_test;
namespace fs = std::filesystem;

namespace {

struct CliRun {
    int code;
    std::string out;
    std::string err;
};

CliRun cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(std::move(args), out, err);
    return {code, out.str(), err.str()};
}

fs::path fresh_dir(const char* name) {
    const fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// IDX file of unsigned bytes with the given dims (big-endian header).
void write_idx(const fs::path& path, const std::vector<uint32_t>& dims,
               const std::vector<unsigned char>& payload) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    const unsigned char head[4] = {0, 0, 8, static_cast<unsigned char>(dims.size())};
    out.write(reinterpret_cast<const char*>(head), 4);
    for (uint32_t d : dims) {
        const unsigned char b[4] = {static_cast<unsigned char>(d >> 24),
                                    static_cast<unsigned char>(d >> 16 & 0xff),
                                    static_cast<unsigned char>(d >> 8 & 0xff),
                                    static_cast<unsigned char>(d & 0xff)};
        out.write(reinterpret_cast<const char*>(b), 4);
    }
    out.write(reinterpret_cast<const char*>(payload.data()),
              static_cast<std::streamsize>(payload.size()));
    REQUIRE(out.good());
}

// Toy model saved to disk: fast to execute yet exercises every plan stage.
std::string save_toy_model(const fs::path& dir, uint32_t seed) {
    std::mt19937 rng(seed);
    const ToyDims dims{8, 2, 6, 3};
    LoadedModel m;
    m.input = toy_input(dims);
    m.layers = toy_layers(rng, dims);
    m.policy.scale_bits = {0};
    m.policy.input_bound = 16;
    const std::string manifest = (dir / "toy.json").string();
    save_model(manifest, m);
    return manifest;
}

}  // namespace

TEST_CASE("cli infer prints the class and scores of a saved model") {
    const fs::path dir = fresh_dir("packnn_cli_infer");
    const std::string manifest = save_toy_model(dir, 31);

    std::vector<unsigned char> image(64);
    for (size_t i = 0; i < image.size(); ++i) image[i] = static_cast<unsigned char>(i % 17);
    write_idx(dir / "img.idx", {1, 8, 8}, image);

    const CliRun run = cli({"infer", "--model", manifest, "--input", (dir / "img.idx").string(),
                            "--plan", "lola-mnist", "--n", "512"});
    CAPTURE(run.err);
    REQUIRE(run.code == 0);

    // The printed scores must equal the integer reference on the same model.
    const LoadedModel m = load_model(manifest);
    const QuantizedNetwork net =
        quantize(collapse_adjacent_linear(m.layers, m.input), m.policy, default_primes());
    std::vector<int64_t> x(image.begin(), image.end());
    std::string want = "scores";
    for (const BigInt& s : forward_integer(net, x)) want += " " + to_string(s);
    CHECK(run.out.find("class ") == 0);
    CHECK(run.out.find(want + "\n") != std::string::npos);
    CHECK(run.err.find("plan lola-mnist") != std::string::npos);
}

TEST_CASE("cli infer selects IDX records and accepts CSV features") {
    const fs::path dir = fresh_dir("packnn_cli_inputs");
    const std::string manifest = save_toy_model(dir, 32);

    std::vector<unsigned char> two(128);
    for (size_t i = 0; i < two.size(); ++i) two[i] = static_cast<unsigned char>((i * 7 + i / 64) % 15);
    write_idx(dir / "two.idx", {2, 8, 8}, two);
    std::ofstream csv(dir / "rec1.csv");
    for (size_t i = 64; i < 128; ++i) csv << int(two[i]) << (i + 1 < 128 ? "," : "\n");
    csv.close();

    const std::vector<std::string> base = {"infer", "--model", manifest, "--n", "512"};
    auto with = [&](std::initializer_list<std::string> extra) {
        std::vector<std::string> args = base;
        args.insert(args.end(), extra);
        return cli(std::move(args));
    };

    const CliRun rec1 = with({"--input", (dir / "two.idx").string(), "--index", "1"});
    const CliRun fromcsv = with({"--input", (dir / "rec1.csv").string()});
    REQUIRE(rec1.code == 0);
    REQUIRE(fromcsv.code == 0);
    CHECK(rec1.out == fromcsv.out);

    const CliRun outofrange = with({"--input", (dir / "two.idx").string(), "--index", "2"});
    CHECK(outofrange.code == 2);
    CHECK(outofrange.err.find("out of range") != std::string::npos);
}

TEST_CASE("cli strategies agree on the scores of one model") {
    const fs::path dir = fresh_dir("packnn_cli_strategies");
    const std::string manifest = save_toy_model(dir, 33);
    std::vector<unsigned char> image(64, 3);
    image[5] = 14;
    write_idx(dir / "img.idx", {1, 8, 8}, image);

    std::string scores_line;
    for (const char* plan : {"lola-mnist", "cryptonets-simd", "linear-features"}) {
        for (const char* backend : {"slot", "ring"}) {
            const CliRun run = cli({"infer", "--model", manifest, "--input",
                                    (dir / "img.idx").string(), "--plan", plan, "--backend",
                                    backend, "--n", "512"});
            INFO(plan, " on ", backend, ": ", run.err);
            if (std::string(plan) == "linear-features") {
                // Three-stage models have no single-matrix plan.
                CHECK(run.code == 3);
                continue;
            }
            REQUIRE(run.code == 0);
            const std::string line = run.out.substr(run.out.find("scores"));
            if (scores_line.empty()) scores_line = line;
            CHECK(line == scores_line);
        }
    }
}

TEST_CASE("cli exit codes separate usage, shape and budget failures") {
    const fs::path dir = fresh_dir("packnn_cli_codes");
    const std::string manifest = save_toy_model(dir, 34);
    write_idx(dir / "small.idx", {1, 3, 3}, std::vector<unsigned char>(9, 1));
    write_idx(dir / "img.idx", {1, 8, 8}, std::vector<unsigned char>(64, 2));

    const CliRun missing = cli({"infer", "--model", manifest});
    CHECK(missing.code == 2);

    const CliRun badplan = cli({"infer", "--model", manifest, "--input",
                                (dir / "img.idx").string(), "--plan", "nonsense"});
    CHECK(badplan.code == 2);

    const CliRun badmodel = cli({"infer", "--model", (dir / "absent.json").string(), "--input",
                                 (dir / "img.idx").string()});
    CHECK(badmodel.code == 2);
    CHECK(badmodel.err.find("cannot open") != std::string::npos);

    const CliRun shape = cli({"infer", "--model", manifest, "--input",
                              (dir / "small.idx").string(), "--n", "512"});
    CHECK(shape.code == 3);
    CHECK(shape.err.find("does not match") != std::string::npos);

    const CliRun depth = cli({"infer", "--model", manifest, "--input", (dir / "img.idx").string(),
                              "--n", "512", "--max-depth", "1"});
    CHECK(depth.code == 4);
    CHECK(depth.err.find("depth") != std::string::npos);

    const CliRun magnitude = cli({"infer", "--model", manifest, "--input",
                                  (dir / "img.idx").string(), "--n", "512", "--primes",
                                  "998244353"});
    CHECK(magnitude.code == 4);
    CHECK(magnitude.err.find("capacity") != std::string::npos);
}

TEST_CASE("cli profile bytes are identical across runs and thread counts") {
    const fs::path dir = fresh_dir("packnn_cli_profile");
    const std::string manifest = save_toy_model(dir, 35);

    const std::vector<std::string> base = {"profile", "--model", manifest, "--plan", "lola-mnist",
                                           "--n", "512"};
    const CliRun one = cli(base);
    REQUIRE(one.code == 0);

    std::vector<std::string> twice = base;
    const CliRun again = cli(twice);
    std::vector<std::string> threaded = base;
    threaded.insert(threaded.end(), {"--threads", "4"});
    const CliRun wide = cli(threaded);
    CHECK(one.out == again.out);
    CHECK(one.out == wide.out);

    // The table matches an in-process render of the same plan.
    const LoadedModel m = load_model(manifest);
    const QuantizedNetwork net =
        quantize(collapse_adjacent_linear(m.layers, m.input), m.policy, default_primes());
    PlanOptions opt;
    opt.n = 512;
    const InferencePlan plan = build_plan(net, Strategy::LolaMnist, opt);
    CHECK(one.out == render_trace_text(plan, default_primes()));

    std::vector<std::string> records = base;
    records.push_back("--records");
    const CliRun jsonl = cli(records);
    REQUIRE(jsonl.code == 0);
    CHECK(jsonl.out == render_trace_records(plan, default_primes()));
    const nlohmann::json first = nlohmann::json::parse(jsonl.out.substr(0, jsonl.out.find('\n')));
    CHECK(first.at("record") == "step");
}

TEST_CASE("cli verify runs the suites and honors the corruption hook") {
    const CliRun ok = cli({"verify", "--n", "64", "--trials", "5"});
    CHECK(ok.code == 0);
    for (const char* name : {"batching-homomorphism", "rotation-oracle", "ntt-vs-schoolbook",
                             "backend-agreement", "kernel-oracles"}) {
        CAPTURE(name);
        CHECK(ok.out.find(name) != std::string::npos);
    }
    CHECK(ok.out.find("verify: pass") != std::string::npos);

    const CliRun bad = cli({"verify", "--n", "64", "--trials", "5", "--corrupt-rotation"});
    CHECK(bad.code == 5);
    CHECK(bad.out.find("verify: fail") != std::string::npos);
}
