#pragma once

#include "sdfuzz/report.hpp"

#include <map>
#include <string>

namespace sdfuzz {

struct BenchFixture {
    std::string name;
    bytes code;
    AbiDescriptor abi;
    BugClass expected;
    uint64_t max_cases = 0;  // 0: use the base config's budget
};

struct BenchFixtureResult {
    std::string name;
    int cap = 0;  // generations value assigned when a run never hits the target
    // config name ("full"/"A"/"B"/"C") -> per-run generations-to-target
    std::map<std::string, std::vector<int>> runs;
    std::map<std::string, double> median;
    std::map<std::string, double> speedup_vs_full;  // median(config)/median(full)
};

struct BenchSummary {
    std::vector<BenchFixtureResult> fixtures;
    std::vector<std::string> warnings;
};

// Load <name>.easm|.hex + <name>.abi.json + <name>.expected.json triples.
// Fixtures without an expected-target file are skipped with a warning.
std::vector<BenchFixture> load_bench_suite(const std::string& dir,
                                           std::vector<std::string>* warnings);

// Full/A/B/C configurations x `runs` rng seeds per fixture. When `out_dir` is
// non-empty, per-run metrics CSVs are written there as
// <fixture>_<config>_<seed>.csv.
BenchSummary run_bench(const std::vector<BenchFixture>& fixtures, const CampaignConfig& base,
                       int runs, const std::string& out_dir);

std::string bench_table(const BenchSummary& summary);
ordered_json bench_summary_json(const BenchSummary& summary);

}  // namespace sdfuzz
