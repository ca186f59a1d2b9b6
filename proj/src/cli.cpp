#include "packnn/cli.hpp"

#include <cmath>
#include <ostream>

#include "CLI11.hpp"
#include "packnn/model_io.hpp"
#include "packnn/selfcheck.hpp"
#include "packnn/trace.hpp"

namespace packnn {

namespace {

std::vector<std::string> strategy_names() {
    std::vector<std::string> names;
    for (Strategy s : all_strategies()) names.push_back(strategy_name(s));
    return names;
}

bool ends_with(const std::string& s, const std::string& tail) {
    return s.size() >= tail.size() && s.compare(s.size() - tail.size(), tail.size(), tail) == 0;
}

// CSV files hold one feature vector of doubles, rounded to the integers the
// engine consumes. IDX files hold byte tensors: rank 1 is a single vector,
// higher ranks one record per leading index.
std::vector<int64_t> read_input(const std::string& path, uint64_t index) {
    if (ends_with(path, ".csv")) {
        if (index != 0) throw parse_error("--index applies to IDX inputs only");
        std::vector<int64_t> x;
        for (double v : load_csv_features(path)) x.push_back(std::llround(v));
        return x;
    }
    const IdxTensor t = load_idx(path);
    if (t.dims.size() == 1) {
        if (index != 0) throw parse_error("--index applies to multi-record IDX inputs only");
        return t.values;
    }
    if (index >= t.count()) {
        throw parse_error("record index " + std::to_string(index) + " out of range, file holds " +
                          std::to_string(t.count()));
    }
    const uint64_t rv = t.record_values();
    return {t.values.begin() + static_cast<int64_t>(index * rv),
            t.values.begin() + static_cast<int64_t>((index + 1) * rv)};
}

struct EngineSetup {
    QuantizedNetwork net;
    InferencePlan plan;
    std::vector<uint64_t> primes;
};

EngineSetup prepare(const std::string& model_path, const std::string& plan_name, uint32_t n,
                    std::vector<uint64_t> primes) {
    const Strategy strategy = strategy_from_name(plan_name);
    if (primes.empty()) primes = default_primes();
    const LoadedModel model = load_model(model_path);
    const CollapsedNetwork collapsed = collapse_adjacent_linear(model.layers, model.input);
    EngineSetup setup{quantize(collapsed, model.policy, primes), {}, std::move(primes)};
    PlanOptions opt;
    opt.n = n;
    setup.plan = build_plan(setup.net, strategy, opt);
    return setup;
}

int cmd_infer(std::ostream& out, std::ostream& err, const std::string& model_path,
              const std::string& input_path, const std::string& plan_name,
              const std::string& backend, uint32_t n, std::vector<uint64_t> primes,
              uint32_t max_depth, uint64_t index) {
    EngineSetup setup = prepare(model_path, plan_name, n, std::move(primes));
    const std::vector<int64_t> x = read_input(input_path, index);
    const BackendKind kind = backend == "ring" ? BackendKind::Ring : BackendKind::Slot;
    EvalContext cx(kind, setup.plan.n, setup.primes, max_depth);
    Evaluator ev(cx);
    const ExecutionResult res = execute(setup.plan, setup.plan.encode_input(ev, x), setup.net, ev);
    err << "plan " << strategy_name(setup.plan.strategy) << ", backend " << backend << ", n "
        << setup.plan.n << ", depth " << res.report.depth_consumed << ", peak messages "
        << res.report.live_messages_peak << "\n";
    out << "class " << predict(res.scores) << "\n";
    out << "scores";
    for (const BigInt& s : res.scores) out << " " << to_string(s);
    out << "\n";
    return 0;
}

int cmd_profile(std::ostream& out, const std::string& model_path, const std::string& plan_name,
                uint32_t n, std::vector<uint64_t> primes, bool records) {
    const EngineSetup setup = prepare(model_path, plan_name, n, std::move(primes));
    out << (records ? render_trace_records(setup.plan, setup.primes)
                    : render_trace_text(setup.plan, setup.primes));
    return 0;
}

int cmd_verify(std::ostream& out, const selfcheck::VerifyOptions& opt) {
    const std::vector<selfcheck::SuiteResult> results = selfcheck::run_all_suites(opt);
    bool ok = true;
    for (const auto& suite : results) {
        out << suite.name << ": " << suite.checks << " checks, " << suite.failures << " failures";
        if (!suite.passed()) out << " (" << suite.first_failure << ")";
        out << "\n";
        ok = ok && suite.passed();
    }
    out << "verify: " << (ok ? "pass" : "fail") << "\n";
    return ok ? 0 : 5;
}

}  // namespace

int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"packed-ciphertext inference profiler"};
    app.require_subcommand(1);

    std::string model_path, input_path;
    std::string plan_name = "lola-mnist";
    std::string backend = "slot";
    uint32_t n = 0, max_depth = 8, threads = 1;
    std::vector<uint64_t> primes;
    uint64_t index = 0;
    bool records = false;
    selfcheck::VerifyOptions vopt;
    vopt.n = 256;
    vopt.trials = 200;

    CLI::App* infer = app.add_subcommand("infer", "run a model on one input and print the scores");
    infer->add_option("--model", model_path, "model manifest path")->required();
    infer->add_option("--input", input_path, "input tensor (.idx or .csv)")->required();
    infer->add_option("--plan", plan_name, "packing strategy")
        ->check(CLI::IsMember(strategy_names()));
    infer->add_option("--backend", backend, "evaluator backend")
        ->check(CLI::IsMember({"slot", "ring"}));
    infer->add_option("--n", n, "ring degree override");
    infer->add_option("--primes", primes, "modulus chain")->delimiter(',');
    infer->add_option("--max-depth", max_depth, "multiplicative depth budget");
    infer->add_option("--threads", threads, "kernel worker threads");
    infer->add_option("--index", index, "record to read from a multi-record IDX file");

    CLI::App* profile = app.add_subcommand("profile", "print a plan's step table");
    profile->add_option("--model", model_path, "model manifest path")->required();
    profile->add_option("--plan", plan_name, "packing strategy")
        ->check(CLI::IsMember(strategy_names()));
    profile->add_option("--n", n, "ring degree override");
    profile->add_option("--primes", primes, "modulus chain")->delimiter(',');
    profile->add_option("--threads", threads, "kernel worker threads");
    profile->add_flag("--records", records, "machine-readable JSON lines instead of the table");

    CLI::App* verify = app.add_subcommand("verify", "run the self-check suites");
    verify->add_option("--n", vopt.n, "ring degree");
    verify->add_option("--trials", vopt.trials, "trials per suite");
    verify->add_option("--seed", vopt.seed, "base seed");
    verify->add_option("--primes", vopt.primes, "modulus chain")->delimiter(',');
    verify->add_option("--threads", threads, "kernel worker threads");
    verify->add_flag("--corrupt-rotation", vopt.corrupt_rotation)->group("");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
            return app.exit(e, out, err);
        }
        err << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        set_kernel_threads(threads);
        if (infer->parsed()) {
            return cmd_infer(out, err, model_path, input_path, plan_name, backend, n, primes,
                             max_depth, index);
        }
        if (profile->parsed()) {
            return cmd_profile(out, model_path, plan_name, n, primes, records);
        }
        return cmd_verify(out, vopt);
    } catch (const parse_error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const depth_error& e) {
        err << "error: " << e.what() << "\n";
        return 4;
    } catch (const magnitude_error& e) {
        err << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace packnn
