#include "sdfuzz/bench.hpp"

#include "sdfuzz/instruction.hpp"

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace sdfuzz {

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bytes load_code(const fs::path& p) {
    std::string text = read_file(p);
    if (p.extension() == ".easm") return assemble(text);
    return parse_hex(text);
}

double median_of(std::vector<int> values) {
    std::sort(values.begin(), values.end());
    size_t n = values.size();
    if (n == 0) return 0;
    if (n % 2 == 1) return values[n / 2];
    return (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

}  // namespace

std::vector<BenchFixture> load_bench_suite(const std::string& dir,
                                           std::vector<std::string>* warnings) {
    std::vector<BenchFixture> fixtures;
    if (!fs::is_directory(dir)) throw std::runtime_error("not a directory: " + dir);

    std::vector<fs::path> code_files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        auto ext = entry.path().extension();
        if (ext == ".easm" || ext == ".hex") code_files.push_back(entry.path());
    }
    std::sort(code_files.begin(), code_files.end());

    for (const fs::path& code_path : code_files) {
        fs::path stem = code_path.parent_path() / code_path.stem();
        fs::path abi_path = stem.string() + ".abi.json";
        fs::path expected_path = stem.string() + ".expected.json";
        if (!fs::exists(expected_path)) {
            if (warnings)
                warnings->push_back("skipping " + code_path.filename().string() +
                                    ": no expected-target file");
            continue;
        }
        if (!fs::exists(abi_path)) {
            if (warnings)
                warnings->push_back("skipping " + code_path.filename().string() +
                                    ": no ABI descriptor");
            continue;
        }
        BenchFixture fx;
        fx.name = code_path.stem().string();
        fx.code = load_code(code_path);
        fx.abi = parse_abi(read_file(abi_path));
        ordered_json expected = ordered_json::parse(read_file(expected_path));
        auto cls = bug_class_from_name(expected.value("bug_class", ""));
        if (!cls) {
            if (warnings)
                warnings->push_back("skipping " + fx.name + ": bad bug_class in expected file");
            continue;
        }
        fx.expected = *cls;
        fx.max_cases = expected.value("max_cases", uint64_t{0});
        fixtures.push_back(std::move(fx));
    }
    return fixtures;
}

BenchSummary run_bench(const std::vector<BenchFixture>& fixtures, const CampaignConfig& base,
                       int runs, const std::string& out_dir) {
    BenchSummary summary;
    const std::array<std::pair<std::string, std::pair<bool, bool>>, 4> configs = {{
        {"full", {false, false}},
        {"A", {true, false}},
        {"B", {false, true}},
        {"C", {true, true}},
    }};

    for (const BenchFixture& fx : fixtures) {
        BenchFixtureResult res;
        res.name = fx.name;
        CampaignConfig cfg = base;
        if (fx.max_cases > 0) cfg.max_test_cases = fx.max_cases;
        int pop = cfg.population_size > 0 ? cfg.population_size
                                          : static_cast<int>(2 * fx.abi.functions.size());
        if (pop < 2) pop = 2;
        res.cap = static_cast<int>(cfg.max_test_cases / static_cast<uint64_t>(pop)) + 2;

        for (const auto& [config_name, flags] : configs) {
            CampaignConfig run_cfg = cfg;
            run_cfg.ablate_code = flags.first;
            run_cfg.ablate_state = flags.second;
            for (int r = 0; r < runs; ++r) {
                run_cfg.rng_seed = base.rng_seed + static_cast<uint64_t>(r);
                CampaignResult cr = run_campaign(fx.code, fx.abi, run_cfg);
                auto it = cr.finding_generation.find(bug_class_name(fx.expected));
                int gens = it != cr.finding_generation.end() ? it->second : res.cap;
                res.runs[config_name].push_back(gens);
                if (!out_dir.empty()) {
                    fs::create_directories(out_dir);
                    std::ostringstream name;
                    name << fx.name << '_' << config_name << '_' << run_cfg.rng_seed << ".csv";
                    std::ofstream csv(fs::path(out_dir) / name.str());
                    csv << metrics_csv(cr);
                }
            }
            res.median[config_name] = median_of(res.runs[config_name]);
        }
        double full = res.median["full"];
        for (const auto& [config_name, med] : res.median)
            res.speedup_vs_full[config_name] = full > 0 ? med / full : 0;
        summary.fixtures.push_back(std::move(res));
    }
    return summary;
}

std::string bench_table(const BenchSummary& summary) {
    std::ostringstream os;
    os << std::left << std::setw(16) << "fixture" << std::right << std::setw(10) << "full"
       << std::setw(10) << "A" << std::setw(10) << "B" << std::setw(10) << "C" << std::setw(10)
       << "A/full" << std::setw(10) << "B/full" << std::setw(10) << "C/full" << "\n";
    for (const auto& fx : summary.fixtures) {
        os << std::left << std::setw(16) << fx.name << std::right << std::fixed
           << std::setprecision(1);
        for (const char* c : {"full", "A", "B", "C"})
            os << std::setw(10) << fx.median.at(c);
        for (const char* c : {"A", "B", "C"})
            os << std::setw(10) << fx.speedup_vs_full.at(c);
        os << "\n";
    }
    return os.str();
}

ordered_json bench_summary_json(const BenchSummary& summary) {
    ordered_json out;
    ordered_json fixtures = ordered_json::array();
    for (const auto& fx : summary.fixtures) {
        ordered_json o;
        o["fixture"] = fx.name;
        o["cap_generations"] = fx.cap;
        ordered_json runs;
        for (const auto& [cfg, values] : fx.runs) runs[cfg] = values;
        o["generations_to_target"] = runs;
        ordered_json medians;
        for (const auto& [cfg, med] : fx.median) medians[cfg] = med;
        o["median"] = medians;
        ordered_json speedups;
        for (const auto& [cfg, s] : fx.speedup_vs_full) speedups[cfg] = s;
        o["speedup_vs_full"] = speedups;
        fixtures.push_back(o);
    }
    out["fixtures"] = fixtures;
    out["warnings"] = summary.warnings;
    return out;
}

}  // namespace sdfuzz
