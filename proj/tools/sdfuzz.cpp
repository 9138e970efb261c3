#include "sdfuzz/bench.hpp"
#include "sdfuzz/replay.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace sdfuzz;

constexpr int kExitOk = 0;
constexpr int kExitNotReproduced = 1;
constexpr int kExitInputError = 2;

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << content;
}

// .easm files are assembled; anything else is parsed as hex text.
bytes load_bytecode(const std::string& path) {
    std::string text = read_file(path);
    if (std::filesystem::path(path).extension() == ".easm") return assemble(text);
    return parse_hex(text);
}

struct FuzzFlags {
    std::string bytecode_path, abi_path;
    std::string out_path, metrics_path;
    std::string ablate;
    CampaignConfig cfg;
};

void apply_ablation(CampaignConfig& cfg, const std::string& ablate) {
    if (ablate.empty()) return;
    if (ablate == "code") {
        cfg.ablate_code = true;
    } else if (ablate == "state") {
        cfg.ablate_state = true;
    } else if (ablate == "both") {
        cfg.ablate_code = cfg.ablate_state = true;
    } else {
        throw CLI::ValidationError("--ablate must be code, state or both");
    }
}

int cmd_analyze(const std::string& bytecode_path, const std::string& abi_path,
                const std::string& out_path, const CampaignConfig& cfg) {
    bytes code = load_bytecode(bytecode_path);
    AbiDescriptor abi = load_abi_file(abi_path);
    StaticAnalysis st = analyze_contract(code, abi, cfg);
    ordered_json doc = static_section_json(st);
    std::string text = doc.dump(2) + "\n";
    if (out_path.empty())
        std::cout << text;
    else
        write_file(out_path, text);
    return kExitOk;
}

int cmd_fuzz(const FuzzFlags& flags) {
    bytes code = load_bytecode(flags.bytecode_path);
    AbiDescriptor abi = load_abi_file(flags.abi_path);

    CampaignResult result = run_campaign(code, abi, flags.cfg);

    std::string name = std::filesystem::path(flags.bytecode_path).stem().string();
    ordered_json report = campaign_report_json(result, code, name, abi);
    std::string out_path = flags.out_path.empty() ? name + ".report.json" : flags.out_path;
    write_file(out_path, report.dump(2) + "\n");
    if (!flags.metrics_path.empty()) write_file(flags.metrics_path, metrics_csv(result));

    std::cout << "campaign finished: " << result.total_test_cases << " test cases, "
              << result.generations << " generations, " << result.findings.size()
              << " finding(s)\n";
    for (const FindingRecord& f : result.findings)
        std::cout << "  " << bug_class_name(f.bug_class) << " @pc " << f.anchor_pc
                  << " (generation " << f.generation << ")\n";
    for (const auto& w : result.statics.warnings) std::cout << "  warning: " << w << "\n";
    std::cout << "report: " << out_path << "\n";
    return kExitOk;
}

int cmd_replay(const std::string& report_path, size_t index) {
    ordered_json report = ordered_json::parse(read_file(report_path));
    ReplayBundle bundle = parse_report_for_replay(report);
    if (index >= bundle.findings.size())
        throw std::runtime_error("finding index " + std::to_string(index) + " out of range (" +
                                 std::to_string(bundle.findings.size()) + " findings)");
    ReplayOutcome outcome = replay_witness(bundle.code, bundle.findings[index]);
    if (outcome.reproduced) {
        std::cout << "reproduced: " << bug_class_name(bundle.findings[index].bug_class) << " ("
                  << outcome.detail << ")\n";
        return kExitOk;
    }
    std::cout << "not reproduced: " << outcome.detail << "\n";
    return kExitNotReproduced;
}

int cmd_bench(const std::string& suite_dir, int runs, const std::string& out_dir,
              const CampaignConfig& base) {
    std::vector<std::string> warnings;
    std::vector<BenchFixture> fixtures = load_bench_suite(suite_dir, &warnings);
    BenchSummary summary = run_bench(fixtures, base, runs, out_dir);
    summary.warnings = warnings;
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    std::cout << bench_table(summary);
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        write_file((std::filesystem::path(out_dir) / "summary.json").string(),
                   bench_summary_json(summary).dump(2) + "\n");
        std::cout << "summary: " << (std::filesystem::path(out_dir) / "summary.json").string()
                  << "\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"stateful directed greybox fuzzer for stack-machine bytecode"};
    app.require_subcommand(1);

    CampaignConfig cfg;
    std::string bytecode_path, abi_path, out_path;

    auto add_static_flags = [&](CLI::App* cmd) {
        cmd->add_option("--unroll-bound", cfg.unroll_bound, "loop unrolling bound");
        cmd->add_option("--path-limit", cfg.path_limit, "max paths per code target");
        cmd->add_option("--block-budget", cfg.block_budget, "unrolled block budget");
    };

    // analyze
    auto* analyze = app.add_subcommand("analyze", "static phase only: code and state targets");
    analyze->add_option("bytecode", bytecode_path, "runtime bytecode (.hex or .easm)")->required();
    analyze->add_option("abi", abi_path, "ABI descriptor (.abi.json)")->required();
    analyze->add_option("--out", out_path, "write JSON here instead of stdout");
    add_static_flags(analyze);

    // fuzz
    FuzzFlags fuzz_flags;
    std::string ablate;
    auto* fuzz = app.add_subcommand("fuzz", "run a fuzzing campaign");
    fuzz->add_option("bytecode", bytecode_path, "runtime bytecode (.hex or .easm)")->required();
    fuzz->add_option("abi", abi_path, "ABI descriptor (.abi.json)")->required();
    fuzz->add_option("--out", fuzz_flags.out_path, "report path (.report.json)");
    fuzz->add_option("--metrics-out", fuzz_flags.metrics_path, "per-generation metrics CSV");
    fuzz->add_option("--max-cases", cfg.max_test_cases, "transaction budget");
    fuzz->add_option("--timeout", cfg.timeout_seconds, "wall-clock limit in seconds (0 = none)");
    fuzz->add_option("--gamma", cfg.gamma, "fitness blend weight (0,1]");
    fuzz->add_option("--ablate", ablate, "disable guidance: code|state|both");
    fuzz->add_option("--seq-len", cfg.max_seq_len, "max transactions per seed");
    fuzz->add_option("--rng", cfg.rng_seed, "rng seed");
    fuzz->add_option("--pop", cfg.population_size, "population size (0 = 2 per function)");
    fuzz->add_option("--cross-prob", cfg.crossover_prob, "crossover probability");
    fuzz->add_option("--pool-prob", cfg.pool_mutation_prob, "pool-vs-random mutation probability");
    fuzz->add_option("--mut-rate", cfg.arg_mutation_rate, "per-argument mutation rate");
    fuzz->add_flag("--timings", cfg.emit_timings, "record wall time in the report");
    add_static_flags(fuzz);

    // replay
    std::string report_path;
    size_t finding_index = 0;
    auto* replay = app.add_subcommand("replay", "re-execute a finding's witness");
    replay->add_option("report", report_path, "campaign report (.report.json)")->required();
    replay->add_option("index", finding_index, "finding index within the report")->required();

    // bench
    std::string suite_dir, bench_out;
    int bench_runs = 10;
    auto* bench = app.add_subcommand("bench", "ablation benchmark over a fixture suite");
    bench->add_option("suite", suite_dir, "directory of fixtures")->required();
    bench->add_option("--runs", bench_runs, "rng seeds per configuration");
    bench->add_option("--out-dir", bench_out, "write summary.json and per-run CSVs here");
    bench->add_option("--max-cases", cfg.max_test_cases, "transaction budget per campaign");
    bench->add_option("--rng", cfg.rng_seed, "base rng seed");
    bench->add_option("--gamma", cfg.gamma, "fitness blend weight (0,1]");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(analyze)) return cmd_analyze(bytecode_path, abi_path, out_path, cfg);
        if (app.got_subcommand(fuzz)) {
            apply_ablation(cfg, ablate);
            fuzz_flags.bytecode_path = bytecode_path;
            fuzz_flags.abi_path = abi_path;
            fuzz_flags.cfg = cfg;
            return cmd_fuzz(fuzz_flags);
        }
        if (app.got_subcommand(replay)) return cmd_replay(report_path, finding_index);
        if (app.got_subcommand(bench)) return cmd_bench(suite_dir, bench_runs, bench_out, cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    }
    return kExitInputError;
}
