#include "sdfuzz/guidance.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <stdexcept>

namespace sdfuzz {

DistanceMap block_distances(const Cfg& cfg, const std::vector<int>& target_blocks) {
    DistanceMap dm;
    if (target_blocks.empty()) return dm;

    std::vector<int> targets = target_blocks;
    std::sort(targets.begin(), targets.end());
    targets.erase(std::unique(targets.begin(), targets.end()), targets.end());

    auto preds = cfg.predecessors();

    // Reverse BFS per target: d_target[b] = shortest edge count b -> target.
    std::vector<std::vector<int>> dists;  // per target, -1 = unreachable
    for (int t : targets) {
        std::vector<int> d(cfg.blocks.size(), -1);
        std::deque<int> work{t};
        d[static_cast<size_t>(t)] = 0;
        while (!work.empty()) {
            int b = work.front();
            work.pop_front();
            for (int p : preds[static_cast<size_t>(b)]) {
                if (d[static_cast<size_t>(p)] != -1) continue;
                d[static_cast<size_t>(p)] = d[static_cast<size_t>(b)] + 1;
                work.push_back(p);
            }
        }
        dists.push_back(std::move(d));
    }

    std::set<int> target_set(targets.begin(), targets.end());
    for (const auto& blk : cfg.blocks) {
        if (target_set.count(blk.id)) {
            dm.defined[blk.id] = 0;
            continue;
        }
        // Harmonic mean; targets this block cannot reach contribute 1/inf = 0.
        Rational inv_sum = 0;
        bool any = false;
        for (const auto& d : dists) {
            int di = d[static_cast<size_t>(blk.id)];
            if (di <= 0) continue;
            inv_sum += Rational(1, di);
            any = true;
        }
        if (!any) continue;  // undefined: no target reachable
        dm.defined[blk.id] = Rational(static_cast<long>(targets.size())) / inv_sum;
    }
    return dm;
}

Rational code_distance(const std::vector<int>& executed_blocks, const DistanceMap& dmap) {
    std::set<int> distinct(executed_blocks.begin(), executed_blocks.end());
    std::vector<Rational> values;
    for (int b : distinct) {
        auto d = dmap.at(b);
        if (d) values.push_back(*d);
    }
    if (values.empty()) return kMaxDistance;
    std::sort(values.begin(), values.end());
    size_t n = std::max<size_t>(1, (values.size() + 9) / 10);  // ceil(0.1 * count)
    n = std::min(n, values.size());
    Rational sum = 0;
    for (size_t i = 0; i < n; ++i) sum += values[i];
    return sum / Rational(static_cast<long>(n));
}

SlotObservations observe_slots(const ExecutionTrace& trace, const WorldState& post,
                               const Address& contract,
                               const std::vector<StateTarget>& targets) {
    (void)post;
    (void)contract;
    (void)targets;
    SlotObservations obs;
    for (const auto& r : trace.storage_reads) obs[r.slot].push_back(r.value);
    for (const auto& w : trace.storage_writes) obs[w.slot].push_back(w.value);
    for (const auto& [slot, value] : trace.final_storage) obs[slot].push_back(value);
    return obs;
}

namespace {

// Distance of one transaction to one state target. A slot the trace never
// observed contributes the maximal compressed gap, so touching a target slot
// at all beats ignoring it.
int target_distance(const SlotObservations& observed, const StateTarget& st) {
    if (st.ranges.empty()) return 0;
    int total = 0;
    for (const auto& [slot, set] : st.ranges) {
        auto it = observed.find(slot);
        if (it == observed.end()) {
            total += 256;
            continue;
        }
        u256 best_gap = IntervalSet::max_value();
        for (const u256& v : it->second) best_gap = std::min(best_gap, set.gap_to(v));
        if (best_gap == 0) continue;
        total += log2_compress(best_gap);
    }
    return total;
}

}  // namespace

Rational state_distance(const SlotObservations& observed, const std::vector<StateTarget>& targets) {
    std::vector<int> per_target;
    for (const auto& st : targets) {
        if (!st.satisfiable) continue;
        per_target.push_back(target_distance(observed, st));
    }
    if (per_target.empty()) return 0;  // not applicable
    Rational inv_sum = 0;
    for (int d : per_target) {
        if (d == 0) return 0;  // inside some target's ranges
        inv_sum += Rational(1, d);
    }
    return Rational(static_cast<long>(per_target.size())) / inv_sum;
}

void score_generation(std::vector<SeedEvaluation>& generation, const FitnessParams& params,
                      size_t total_cfg_edges) {
    // Min-max statistics over every transaction in the generation.
    bool have = false;
    Rational code_min, code_max, state_min, state_max;
    for (const auto& ev : generation) {
        for (const auto& ts : ev.tx_scores) {
            if (!have) {
                code_min = code_max = ts.code_dist;
                state_min = state_max = ts.state_dist;
                have = true;
            } else {
                code_min = std::min(code_min, ts.code_dist);
                code_max = std::max(code_max, ts.code_dist);
                state_min = std::min(state_min, ts.state_dist);
                state_max = std::max(state_max, ts.state_dist);
            }
        }
    }
    auto normalize = [](const Rational& v, const Rational& lo, const Rational& hi) -> Rational {
        if (hi == lo) return 0;  // constant population
        return (v - lo) / (hi - lo);
    };

    int max_writes = 0;
    for (const auto& ev : generation) max_writes = std::max(max_writes, ev.state_write_count);

    for (auto& ev : generation) {
        Rational best_sc_bug = 0;
        bool first = true;
        for (const auto& ts : ev.tx_scores) {
            Rational d = 0;
            if (params.use_code && params.use_state)
                d = params.alpha * normalize(ts.code_dist, code_min, code_max) +
                    (1 - params.alpha) * normalize(ts.state_dist, state_min, state_max);
            else if (params.use_code)
                d = normalize(ts.code_dist, code_min, code_max);
            else if (params.use_state)
                d = normalize(ts.state_dist, state_min, state_max);
            Rational sc_bug = 1 / (d + params.beta);
            if (first || sc_bug > best_sc_bug) best_sc_bug = sc_bug;
            if (first || ts.code_dist < ev.code_dist) ev.code_dist = ts.code_dist;
            if (first || ts.state_dist < ev.state_dist) ev.state_dist = ts.state_dist;
            first = false;
        }
        if (first) best_sc_bug = 1 / params.beta;  // no transactions executed
        ev.sc_bug = best_sc_bug;

        Rational sc_branch = total_cfg_edges == 0
                                 ? Rational(0)
                                 : Rational(ev.new_branch_edges) /
                                       Rational(static_cast<long>(total_cfg_edges));
        Rational sc_dep =
            max_writes == 0 ? Rational(0) : Rational(ev.state_write_count) / Rational(max_writes);
        ev.fitness = params.gamma * ev.sc_bug + (1 - params.gamma) * (sc_branch + sc_dep);
    }
}

std::vector<double> selection_probabilities(const std::vector<Rational>& fitness) {
    if (fitness.empty()) throw std::invalid_argument("selection over an empty generation");
    Rational sum = 0;
    for (const auto& f : fitness) {
        if (f <= 0) throw std::invalid_argument("fitness values must be positive");
        sum += f;
    }
    std::vector<double> probs;
    probs.reserve(fitness.size());
    for (const auto& f : fitness) probs.push_back(Rational(f / sum).convert_to<double>());
    return probs;
}

}  // namespace sdfuzz
