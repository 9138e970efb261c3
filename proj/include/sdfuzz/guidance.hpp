#pragma once

#include "sdfuzz/cfg.hpp"
#include "sdfuzz/intervals.hpp"
#include "sdfuzz/state_targets.hpp"
#include "sdfuzz/vm.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <map>
#include <optional>
#include <unordered_map>

namespace sdfuzz {

// Distances and fitness stay in exact rationals end to end; doubles appear
// only at the selection-probability boundary and in emitted metrics.
using Rational = boost::multiprecision::cpp_rational;

inline const Rational kMaxDistance = Rational(1'000'000'000);

// Block distance: harmonic mean of shortest-path edge counts to every target
// block. Blocks that reach no target have no entry (undefined); target
// blocks map to 0.
struct DistanceMap {
    std::map<int, Rational> defined;

    std::optional<Rational> at(int block) const {
        auto it = defined.find(block);
        if (it == defined.end()) return std::nullopt;
        return it->second;
    }
};

DistanceMap block_distances(const Cfg& cfg, const std::vector<int>& target_blocks);

// Average of the n smallest defined block distances along the trace, where
// n = max(1, ceil(0.1 * #distinct executed blocks with a defined distance)).
// All executed blocks undefined -> kMaxDistance.
Rational code_distance(const std::vector<int>& executed_blocks, const DistanceMap& dmap);

// Observed slot values for one transaction: reads, writes, and the
// post-transaction values of every target slot.
using SlotObservations = std::map<u256, std::vector<u256>>;

SlotObservations observe_slots(const ExecutionTrace& trace, const WorldState& post,
                               const Address& contract,
                               const std::vector<StateTarget>& targets);

// Per-target distance: 0 when the target's range map is empty or any observed
// value of each slot falls inside its ranges; otherwise the sum over slots of
// the log2-compressed gap. Harmonic mean across satisfiable targets, with the
// zero short-circuit.
Rational state_distance(const SlotObservations& observed, const std::vector<StateTarget>& targets);

struct FitnessParams {
    Rational alpha = Rational(1, 2);
    Rational beta = Rational(1, 10);
    Rational gamma = Rational(7, 10);
    bool use_code = true;   // ablation A disables
    bool use_state = true;  // ablation B disables
};

struct TxScore {
    Rational code_dist = kMaxDistance;
    Rational state_dist = 0;
};

struct SeedEvaluation {
    std::vector<TxScore> tx_scores;
    int new_branch_edges = 0;
    int state_write_count = 0;
    Rational sc_bug = 0;      // filled by score_generation
    Rational fitness = 0;     // filled by score_generation
    Rational code_dist = kMaxDistance;   // best (smallest) across txs
    Rational state_dist = kMaxDistance;  // best (smallest) across txs
};

// Generation barrier: min-max normalize distances across every transaction of
// the generation, combine per Eq-style weighting, pick each seed's best
// transaction, and blend in branch/write feedback.
void score_generation(std::vector<SeedEvaluation>& generation, const FitnessParams& params,
                      size_t total_cfg_edges);

// Fitness-proportional probabilities; exact input, double output. Sums to 1
// within 1e-12. Throws std::invalid_argument on an empty generation.
std::vector<double> selection_probabilities(const std::vector<Rational>& fitness);

}  // namespace sdfuzz
