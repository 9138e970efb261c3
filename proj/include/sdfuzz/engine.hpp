#pragma once

#include "sdfuzz/abi.hpp"
#include "sdfuzz/guidance.hpp"
#include "sdfuzz/rng.hpp"
#include "sdfuzz/state_targets.hpp"
#include "sdfuzz/targets.hpp"
#include "sdfuzz/vm.hpp"

#include <map>
#include <set>
#include <string>

namespace sdfuzz {

// ---------------------------------------------------------------------------
// Seeds

struct ArgValue {
    u256 word = 0;  // fixed-width params, left-aligned where the ABI says so
    bytes dyn;      // dynamic params (bytes/string)
};

struct SeedTx {
    size_t fn_index = 0;
    Address sender = 0;
    std::vector<ArgValue> args;
    u256 value = 0;
    std::optional<BlockEnv> env_override;
};

struct Seed {
    std::vector<SeedTx> txs;
    SeedEvaluation eval;
};

// Standard head/tail encoding; fixed params one word each, dynamic params an
// offset word plus length-prefixed padded payload.
bytes encode_args(const AbiFunction& fn, const std::vector<ArgValue>& args);
Transaction to_transaction(const AbiDescriptor& abi, const SeedTx& tx);

// ---------------------------------------------------------------------------
// Mutation pool

enum class Provenance { StateTargetBound, ObservedTxValue, ObservedStorageValue };

class MutationPool {
public:
    void add(const u256& v, Provenance p);
    // Bound values are grouped by their storage slot, so draws spread evenly
    // over target slots rather than over raw values.
    void add_bound(const u256& slot, const u256& v);
    size_t size() const { return total_; }
    bool empty() const { return total_ == 0; }

    // Half the draws come from state-target bounds (slot picked uniformly,
    // then a value for it); the rest from observed values. Keeps the
    // solver-derived values hot however many runtime values accumulate.
    u256 draw(Rng& rng) const;

    const std::vector<u256>& values(Provenance p) const {
        return values_[static_cast<size_t>(p)];
    }

private:
    std::vector<u256> values_[3];
    std::vector<std::pair<u256, std::vector<u256>>> bound_groups_;
    std::set<u256> seen_;
    size_t total_ = 0;
};

// ---------------------------------------------------------------------------
// Campaign configuration

struct CampaignConfig {
    uint64_t max_test_cases = 2000;  // executed transactions
    int population_size = 0;         // 0 -> 2 * #functions
    uint64_t rng_seed = 0;
    double crossover_prob = 0.5;
    double pool_mutation_prob = 0.5;  // P: mutate from pool vs. random
    double arg_mutation_rate = 0.4;   // chance each argument is re-rolled
    double value_mutation_rate = 0.2; // chance a payable value is re-rolled
    double gamma = 0.7;
    int max_seq_len = 5;
    int unroll_bound = 20;
    uint64_t max_steps = 100'000;
    size_t path_limit = 10'000;
    size_t block_budget = 50'000;
    double timeout_seconds = 0;  // 0 = no timeout
    bool ablate_code = false;    // configuration A (or C with ablate_state)
    bool ablate_state = false;   // configuration B (or C with ablate_code)
    u256 value_max = 1'000'000;  // cap for generated payable values
    bool emit_timings = false;   // keep reports byte-stable by default

    std::string ablation_name() const {
        if (ablate_code && ablate_state) return "C";
        if (ablate_code) return "A";
        if (ablate_state) return "B";
        return "full";
    }
};

// ---------------------------------------------------------------------------
// Static phase bundle

struct StaticAnalysis {
    std::vector<Instruction> instructions;
    Cfg cfg;  // pre-unroll; distances and traces refer to these block ids
    std::optional<Cfg> unrolled;
    std::vector<CodeTarget> code_targets;
    std::vector<StateTarget> state_targets;  // indexed parallel to code_targets
    DistanceMap distance_map;                // over non-whole-contract targets
    std::vector<std::string> warnings;
    CfgIndex index;
};

StaticAnalysis analyze_contract(const bytes& code, const AbiDescriptor& abi,
                                const CampaignConfig& cfg = {});

// ---------------------------------------------------------------------------
// Findings & reportable campaign outcome

struct FindingRecord {
    BugClass bug_class = BugClass::Reentrancy;
    uint32_t anchor_pc = 0;
    Seed witness;
    size_t tx_index = 0;  // transaction within the witness that fired
    int generation = 0;   // 1-based
    uint64_t test_case = 0;
    std::string description;
};

struct GenerationMetrics {
    int generation = 0;  // 1-based
    uint64_t test_cases = 0;
    double avg_code_distance = 0;
    double avg_state_distance = 0;
    size_t covered_edges = 0;
    double best_fitness = 0;
};

struct CampaignResult {
    CampaignConfig config;
    StaticAnalysis statics;
    std::vector<GenerationMetrics> metrics;
    std::vector<FindingRecord> findings;
    uint64_t total_test_cases = 0;
    int generations = 0;
    uint64_t wall_time_ms = 0;
    size_t total_cfg_edges = 0;
    // First generation (1-based) in which each code target's block executed.
    std::map<size_t, int> target_reached_generation;
    std::map<std::string, int> finding_generation;  // bug class -> first generation
};

// ---------------------------------------------------------------------------
// Genetic operators

// Two seeds per ABI function; fixed-width params uniform in their valid
// range, dynamic params get a positive length and random content, payable
// functions carry a positive value.
std::vector<Seed> init_seeds(const AbiDescriptor& abi, Rng& rng, const CampaignConfig& cfg);

// Fitness-proportional sampling with replacement; returns `n_pairs` index
// pairs (defaulting to one pair per seed when n_pairs == 0).
std::vector<std::pair<size_t, size_t>> select_parents(const std::vector<double>& probs,
                                                      Rng& rng, size_t n_pairs = 0);

// Runtime read/write slot sets per ABI function, built from traces.
struct RawIndex {
    std::map<size_t, std::set<u256>> writes;
    std::map<size_t, std::set<u256>> reads;

    bool writes_before_reads(const Seed& a, const Seed& b) const;
};

// Read-after-write aware concatenation; without a RAW dependency, concatenate
// both ways with `crossover_prob`, else return the parents unchanged.
std::pair<Seed, Seed> crossover(const Seed& a, const Seed& b, const RawIndex& raw, Rng& rng,
                                const CampaignConfig& cfg);

// Per-argument re-roll: from the pool with probability P (coerced to the
// parameter width), else uniform random. Selectors are never mutated.
Seed mutate(const Seed& seed, const AbiDescriptor& abi, const MutationPool& pool, Rng& rng,
            const CampaignConfig& cfg);

CampaignResult run_campaign(const bytes& code, const AbiDescriptor& abi,
                            const CampaignConfig& cfg);

}  // namespace sdfuzz
