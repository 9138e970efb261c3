#include "sdfuzz/engine.hpp"

#include "sdfuzz/oracles.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>

namespace sdfuzz {

namespace {

const Address kDeployer = 0xd3b107;
const Address kSenderA = 0xa11ce;
const Address kSenderB = 0xb0b;
const u256 kAccountFunds = u256(1) << 96;

u256 width_mask(int bits) {
    if (bits >= 256) return ~u256(0);
    return (u256(1) << bits) - 1;
}

u256 sign_extend(const u256& v, int bits) {
    if (bits >= 256) return v;
    if (mp::bit_test(v, static_cast<unsigned>(bits - 1))) return v | ~width_mask(bits);
    return v;
}

}  // namespace

bytes encode_args(const AbiFunction& fn, const std::vector<ArgValue>& args) {
    size_t head_size = 32 * fn.params.size();
    bytes heads, tails;
    auto append_word = [](bytes& out, const u256& v) {
        uint8_t buf[32];
        u256_to_bytes32(v, buf);
        out.insert(out.end(), buf, buf + 32);
    };
    for (size_t i = 0; i < fn.params.size(); ++i) {
        const Param& p = fn.params[i];
        const ArgValue& a = i < args.size() ? args[i] : ArgValue{};
        if (p.is_dynamic()) {
            append_word(heads, head_size + tails.size());
            append_word(tails, a.dyn.size());
            tails.insert(tails.end(), a.dyn.begin(), a.dyn.end());
            if (a.dyn.size() % 32 != 0) tails.resize(tails.size() + 32 - a.dyn.size() % 32, 0);
        } else {
            append_word(heads, a.word);
        }
    }
    heads.insert(heads.end(), tails.begin(), tails.end());
    return heads;
}

Transaction to_transaction(const AbiDescriptor& abi, const SeedTx& tx) {
    const AbiFunction& fn = abi.fn(tx.fn_index);
    Transaction t;
    t.sender = tx.sender;
    t.selector = fn.selector;
    t.args = encode_args(fn, tx.args);
    t.value = fn.payable ? tx.value : 0;
    t.block_env_override = tx.env_override;
    return t;
}

// ---------------------------------------------------------------------------
// MutationPool

void MutationPool::add(const u256& v, Provenance p) {
    if (!seen_.insert(v).second) return;
    values_[static_cast<size_t>(p)].push_back(v);
    ++total_;
}

void MutationPool::add_bound(const u256& slot, const u256& v) {
    auto it = std::find_if(bound_groups_.begin(), bound_groups_.end(),
                           [&](const auto& g) { return g.first == slot; });
    if (it == bound_groups_.end()) {
        bound_groups_.push_back({slot, {}});
        it = bound_groups_.end() - 1;
    }
    if (std::find(it->second.begin(), it->second.end(), v) != it->second.end()) return;
    it->second.push_back(v);
    if (seen_.insert(v).second)
        values_[static_cast<size_t>(Provenance::StateTargetBound)].push_back(v);
    ++total_;
}

u256 MutationPool::draw(Rng& rng) const {
    const auto& tx_vals = values_[static_cast<size_t>(Provenance::ObservedTxValue)];
    const auto& st_vals = values_[static_cast<size_t>(Provenance::ObservedStorageValue)];
    if (!bound_groups_.empty() && (rng.below(2) == 0 || (tx_vals.empty() && st_vals.empty()))) {
        const auto& group = bound_groups_[rng.below(bound_groups_.size())];
        return group.second[rng.below(group.second.size())];
    }
    std::vector<const std::vector<u256>*> rest;
    if (!tx_vals.empty()) rest.push_back(&tx_vals);
    if (!st_vals.empty()) rest.push_back(&st_vals);
    if (rest.empty()) {
        const auto& bounds = values_[static_cast<size_t>(Provenance::StateTargetBound)];
        return bounds.empty() ? u256(0) : bounds[rng.below(bounds.size())];
    }
    const auto& bucket = *rest[rng.below(rest.size())];
    return bucket[rng.below(bucket.size())];
}

// ---------------------------------------------------------------------------
// Static phase

StaticAnalysis analyze_contract(const bytes& code, const AbiDescriptor& abi,
                                const CampaignConfig& cfg) {
    StaticAnalysis st;
    st.instructions = disassemble(code);
    st.cfg = build_cfg(st.instructions);
    st.cfg.unroll_bound = cfg.unroll_bound;
    st.index = CfgIndex::build(st.cfg);
    st.code_targets = find_code_targets(st.cfg, abi);

    try {
        st.unrolled = unroll_loops(st.cfg, cfg.unroll_bound, cfg.block_budget);
    } catch (const UnrollBudgetExceeded& e) {
        st.warnings.push_back(std::string("state-target analysis skipped: ") + e.what());
    }

    StateTargetOptions opts;
    opts.path_limit = cfg.path_limit;
    if (st.unrolled) {
        for (size_t i = 0; i < st.code_targets.size(); ++i) {
            if (st.code_targets[i].whole_contract) continue;  // decided at campaign end
            StateTarget t = derive_state_target(*st.unrolled, st.code_targets[i], i, opts);
            if (t.truncated)
                st.warnings.push_back("path enumeration truncated for target " +
                                      std::to_string(i));
            st.state_targets.push_back(std::move(t));
        }
    }

    std::vector<int> distance_targets;
    for (const auto& t : st.code_targets)
        if (!t.whole_contract) distance_targets.push_back(t.block_id);
    st.distance_map = block_distances(st.cfg, distance_targets);
    return st;
}

// ---------------------------------------------------------------------------
// Seed generation and mutation

namespace {

Address pick_sender(Rng& rng) {
    return rng.below(2) == 0 ? kSenderA : kSenderB;
}

ArgValue random_arg(const Param& p, Rng& rng) {
    ArgValue a;
    switch (p.kind) {
    case ParamKind::UInt: a.word = rng.bits(p.bits); break;
    case ParamKind::Int: a.word = sign_extend(rng.bits(p.bits), p.bits); break;
    case ParamKind::Bool: a.word = rng.below(2); break;
    case ParamKind::Address: a.word = rng.bits(160); break;
    case ParamKind::BytesN: a.word = rng.bits(8 * p.nbytes) << (256 - 8 * p.nbytes); break;
    case ParamKind::Bytes:
    case ParamKind::String: {
        size_t len = 1 + rng.below(64);  // a positive length, then content
        a.dyn.resize(len);
        for (auto& b : a.dyn) b = static_cast<uint8_t>(rng.below(256));
        break;
    }
    }
    return a;
}

ArgValue coerce_pool_value(const u256& v, const Param& p) {
    ArgValue a;
    switch (p.kind) {
    case ParamKind::UInt: a.word = v & width_mask(p.bits); break;
    case ParamKind::Int: a.word = sign_extend(v & width_mask(p.bits), p.bits); break;
    case ParamKind::Bool: a.word = v & 1; break;
    case ParamKind::Address: a.word = v & width_mask(160); break;
    case ParamKind::BytesN: a.word = (v & width_mask(8 * p.nbytes)) << (256 - 8 * p.nbytes); break;
    case ParamKind::Bytes:
    case ParamKind::String: {
        a.dyn.resize(32);
        u256_to_bytes32(v, a.dyn.data());
        break;
    }
    }
    return a;
}

u256 random_value(Rng& rng, const CampaignConfig& cfg) {
    u256 cap = cfg.value_max == 0 ? u256(1) : cfg.value_max;
    return 1 + rng.below(static_cast<uint64_t>(cap > 1'000'000'000'000ULL
                                                   ? u256(1'000'000'000'000ULL)
                                                   : cap));
}

}  // namespace

std::vector<Seed> init_seeds(const AbiDescriptor& abi, Rng& rng, const CampaignConfig& cfg) {
    if (abi.functions.empty())
        throw std::invalid_argument("ABI declares no functions; nothing to fuzz");
    std::vector<Seed> seeds;
    for (size_t fi = 0; fi < abi.functions.size(); ++fi) {
        const AbiFunction& fn = abi.functions[fi];
        for (int copy = 0; copy < 2; ++copy) {
            Seed s;
            SeedTx tx;
            tx.fn_index = fi;
            tx.sender = pick_sender(rng);
            for (const Param& p : fn.params) tx.args.push_back(random_arg(p, rng));
            tx.value = fn.payable ? random_value(rng, cfg) : 0;
            s.txs.push_back(std::move(tx));
            seeds.push_back(std::move(s));
        }
    }
    return seeds;
}

std::vector<std::pair<size_t, size_t>> select_parents(const std::vector<double>& probs, Rng& rng,
                                                      size_t n_pairs) {
    if (probs.empty()) throw std::invalid_argument("selection over an empty generation");
    if (n_pairs == 0) n_pairs = probs.size();
    auto draw_index = [&]() {
        double r = rng.unit();
        double acc = 0;
        for (size_t i = 0; i < probs.size(); ++i) {
            acc += probs[i];
            if (r < acc) return i;
        }
        return probs.size() - 1;
    };
    std::vector<std::pair<size_t, size_t>> pairs;
    pairs.reserve(n_pairs);
    for (size_t i = 0; i < n_pairs; ++i) {
        size_t a = draw_index();
        size_t b = draw_index();
        pairs.push_back({a, b});
    }
    return pairs;
}

bool RawIndex::writes_before_reads(const Seed& a, const Seed& b) const {
    for (const SeedTx& ta : a.txs) {
        auto wit = writes.find(ta.fn_index);
        if (wit == writes.end() || wit->second.empty()) continue;
        for (const SeedTx& tb : b.txs) {
            auto rit = reads.find(tb.fn_index);
            if (rit == reads.end()) continue;
            for (const u256& slot : wit->second)
                if (rit->second.count(slot)) return true;
        }
    }
    return false;
}

namespace {

Seed concat_seeds(const Seed& a, const Seed& b, int max_seq_len, Rng& rng) {
    Seed out;
    out.txs = a.txs;
    out.txs.insert(out.txs.end(), b.txs.begin(), b.txs.end());
    // Over-long children drop random transactions, order preserved, repeated
    // functions first, so a concat never erases a function entirely. Cutting
    // a fixed end instead makes full-length seeds fixed points of crossover
    // and the population freezes on clones.
    while (static_cast<int>(out.txs.size()) > max_seq_len) {
        std::map<size_t, int> fn_count;
        for (const SeedTx& tx : out.txs) ++fn_count[tx.fn_index];
        std::vector<size_t> candidates;
        for (size_t i = 0; i < out.txs.size(); ++i)
            if (fn_count[out.txs[i].fn_index] > 1) candidates.push_back(i);
        size_t victim = candidates.empty()
                            ? rng.below(out.txs.size())
                            : candidates[rng.below(candidates.size())];
        out.txs.erase(out.txs.begin() + static_cast<long>(victim));
    }
    out.eval = {};
    return out;
}

Seed strip_eval(const Seed& s) {
    Seed out;
    out.txs = s.txs;
    return out;
}

}  // namespace

std::pair<Seed, Seed> crossover(const Seed& a, const Seed& b, const RawIndex& raw, Rng& rng,
                                const CampaignConfig& cfg) {
    bool ab = raw.writes_before_reads(a, b);
    bool ba = raw.writes_before_reads(b, a);
    if (ab && ba)
        return {concat_seeds(a, b, cfg.max_seq_len, rng), concat_seeds(b, a, cfg.max_seq_len, rng)};
    if (ab) return {concat_seeds(a, b, cfg.max_seq_len, rng), strip_eval(b)};
    if (ba) return {concat_seeds(b, a, cfg.max_seq_len, rng), strip_eval(a)};
    if (rng.chance(cfg.crossover_prob))
        return {concat_seeds(a, b, cfg.max_seq_len, rng), concat_seeds(b, a, cfg.max_seq_len, rng)};
    return {strip_eval(a), strip_eval(b)};
}

static bool same_seed_txs(const Seed& x, const Seed& y) {
    if (x.txs.size() != y.txs.size()) return false;
    for (size_t i = 0; i < x.txs.size(); ++i) {
        const SeedTx&a = x.txs[i], &b = y.txs[i];
        if (a.fn_index != b.fn_index || a.sender != b.sender || a.value != b.value) return false;
        if (a.args.size() != b.args.size()) return false;
        for (size_t j = 0; j < a.args.size(); ++j)
            if (a.args[j].word != b.args[j].word || a.args[j].dyn != b.args[j].dyn) return false;
    }
    return true;
}

Seed mutate(const Seed& seed, const AbiDescriptor& abi, const MutationPool& pool, Rng& rng,
            const CampaignConfig& cfg) {
    Seed out = strip_eval(seed);
    for (SeedTx& tx : out.txs) {
        const AbiFunction& fn = abi.fn(tx.fn_index);
        for (size_t i = 0; i < fn.params.size(); ++i) {
            if (i >= tx.args.size()) tx.args.resize(fn.params.size());
            if (!rng.chance(cfg.arg_mutation_rate)) continue;
            if (!pool.empty() && rng.chance(cfg.pool_mutation_prob))
                tx.args[i] = coerce_pool_value(pool.draw(rng), fn.params[i]);
            else
                tx.args[i] = random_arg(fn.params[i], rng);
        }
        if (fn.payable && rng.chance(cfg.value_mutation_rate)) {
            if (!pool.empty() && rng.chance(cfg.pool_mutation_prob)) {
                u256 cap = cfg.value_max == 0 ? u256(1) : cfg.value_max;
                tx.value = 1 + pool.draw(rng) % cap;
            } else {
                tx.value = random_value(rng, cfg);
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Campaign loop

CampaignResult run_campaign(const bytes& code, const AbiDescriptor& abi,
                            const CampaignConfig& cfg_in) {
    auto t_start = std::chrono::steady_clock::now();

    CampaignConfig cfg = cfg_in;
    if (cfg.max_test_cases == 0)
        throw std::invalid_argument("max test cases must be positive");
    if (cfg.gamma <= 0 || cfg.gamma > 1)
        throw std::invalid_argument("gamma must lie in (0, 1]");
    if (cfg.population_size <= 0)
        cfg.population_size = static_cast<int>(2 * abi.functions.size());
    if (cfg.population_size < 2) cfg.population_size = 2;

    CampaignResult result;
    result.statics = analyze_contract(code, abi, cfg);
    StaticAnalysis& st = result.statics;
    result.total_cfg_edges = st.cfg.edge_count();
    result.config = cfg;

    WorldState base;
    Address contract = deploy(base, code);
    base.balances[contract] = abi.initial_contract_balance;
    base.balances[kDeployer] = kAccountFunds;
    base.balances[kSenderA] = kAccountFunds;
    base.balances[kSenderB] = kAccountFunds;

    FitnessParams params;
    params.gamma = Rational(static_cast<long long>(cfg.gamma * 1'000'000 + 0.5), 1'000'000);
    params.use_code = !cfg.ablate_code && !st.distance_map.defined.empty();
    bool any_sat_state = std::any_of(st.state_targets.begin(), st.state_targets.end(),
                                     [](const StateTarget& t) { return t.satisfiable; });
    params.use_state = !cfg.ablate_state && any_sat_state;

    MutationPool pool;
    if (!cfg.ablate_state) {
        for (const StateTarget& t : st.state_targets) {
            if (!t.satisfiable) continue;
            for (const auto& [slot, set] : t.ranges)
                for (const u256& v : set.bounds_and_midpoints()) pool.add_bound(slot, v);
        }
    }

    Rng rng(cfg.rng_seed);
    std::vector<Seed> generation = init_seeds(abi, rng, cfg);

    std::set<std::pair<int, bool>> covered_edges;
    RawIndex raw;
    std::set<std::pair<int, uint32_t>> finding_keys;  // (bug class, anchor pc)
    CampaignOutflowStats outflow;
    std::optional<Seed> first_value_seed;

    OracleContext octx;
    octx.contract = contract;
    octx.deployer = kDeployer;
    octx.cfg_index = &st.index;
    octx.max_steps = cfg.max_steps;

    VmOptions vm_opts;
    vm_opts.budget.max_steps = cfg.max_steps;
    vm_opts.cfg = &st.index;

    uint64_t test_cases = 0;
    int gen_number = 0;
    const uint64_t hard_cap = cfg.max_test_cases + static_cast<uint64_t>(cfg.population_size);

    auto evaluate_generation = [&](std::vector<Seed>& seeds) {
        ++gen_number;
        size_t executed = 0;
        for (Seed& seed : seeds) {
            if (!seed.eval.tx_scores.empty()) {
                // Carried elite: keep its raw distance scores, novelty spent.
                seed.eval.new_branch_edges = 0;
                ++executed;
                continue;
            }
            if (test_cases >= cfg.max_test_cases) break;
            SeedLedger ledger;
            WorldState world = base;
            SeedEvaluation ev;
            for (size_t ti = 0; ti < seed.txs.size(); ++ti) {
                if (test_cases >= hard_cap) break;
                Transaction tx = to_transaction(abi, seed.txs[ti]);
                WorldState before = world;
                ExecutionTrace trace = execute(world, contract, tx, vm_opts);
                ++test_cases;

                outflow.account(trace);
                if (!trace.reverted && tx.value > 0 && !first_value_seed)
                    first_value_seed = strip_eval(seed);

                for (const TraceFinding& f :
                     check_trace(trace, before, world, octx, ledger)) {
                    auto key = std::make_pair(static_cast<int>(f.bug_class), f.anchor_pc);
                    if (!finding_keys.insert(key).second) continue;
                    FindingRecord rec;
                    rec.bug_class = f.bug_class;
                    rec.anchor_pc = f.anchor_pc;
                    rec.witness = strip_eval(seed);
                    rec.tx_index = ti;
                    rec.generation = gen_number;
                    rec.test_case = test_cases;
                    rec.description = f.description;
                    result.findings.push_back(std::move(rec));
                    std::string cname = bug_class_name(f.bug_class);
                    if (!result.finding_generation.count(cname))
                        result.finding_generation[cname] = gen_number;
                }

                TxScore ts;
                ts.code_dist = code_distance(trace.executed_blocks, st.distance_map);
                ts.state_dist = state_distance(
                    observe_slots(trace, world, contract, st.state_targets), st.state_targets);
                ev.tx_scores.push_back(ts);
                ev.state_write_count += static_cast<int>(trace.storage_writes.size());

                for (const auto& e : trace.branch_edges)
                    if (covered_edges.insert(e).second) ++ev.new_branch_edges;

                {
                    std::set<int> blocks(trace.executed_blocks.begin(),
                                         trace.executed_blocks.end());
                    for (size_t ci = 0; ci < st.code_targets.size(); ++ci) {
                        if (result.target_reached_generation.count(ci)) continue;
                        if (blocks.count(st.code_targets[ci].block_id))
                            result.target_reached_generation[ci] = gen_number;
                    }
                }

                // Reads count even from reverted attempts: a refused call
                // still reveals which slots gate it.
                for (const auto& r : trace.storage_reads)
                    raw.reads[seed.txs[ti].fn_index].insert(r.slot);
                if (!trace.reverted)
                    for (const auto& w : trace.storage_writes)
                        raw.writes[seed.txs[ti].fn_index].insert(w.slot);

                pool.add(tx.value, Provenance::ObservedTxValue);
                pool.add(tx.sender, Provenance::ObservedTxValue);
                for (const ArgValue& a : seed.txs[ti].args)
                    pool.add(a.word, Provenance::ObservedTxValue);
                for (const auto& w : trace.storage_writes)
                    pool.add(w.value, Provenance::ObservedStorageValue);
                for (const auto& r : trace.storage_reads)
                    pool.add(r.value, Provenance::ObservedStorageValue);
            }
            seed.eval = std::move(ev);
            ++executed;
        }

        seeds.resize(executed);  // drop seeds the budget never reached

        std::vector<SeedEvaluation> evals;
        evals.reserve(seeds.size());
        for (Seed& s : seeds) evals.push_back(std::move(s.eval));
        score_generation(evals, params, result.total_cfg_edges);
        for (size_t i = 0; i < seeds.size(); ++i) seeds[i].eval = std::move(evals[i]);

        GenerationMetrics gm;
        gm.generation = gen_number;
        gm.test_cases = test_cases;
        gm.covered_edges = covered_edges.size();
        double code_sum = 0, state_sum = 0, best_fit = 0;
        size_t counted = 0;
        for (const Seed& s : seeds) {
            if (s.eval.tx_scores.empty()) continue;
            code_sum += s.eval.code_dist.convert_to<double>();
            state_sum += s.eval.state_dist.convert_to<double>();
            best_fit = std::max(best_fit, s.eval.fitness.convert_to<double>());
            ++counted;
        }
        if (counted > 0) {
            gm.avg_code_distance = code_sum / static_cast<double>(counted);
            gm.avg_state_distance = state_sum / static_cast<double>(counted);
        }
        gm.best_fitness = best_fit;
        result.metrics.push_back(gm);
    };

    evaluate_generation(generation);

    while (test_cases < cfg.max_test_cases && !generation.empty()) {
        if (cfg.timeout_seconds > 0) {
            double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                           t_start)
                                 .count();
            if (elapsed > cfg.timeout_seconds) break;
        }
        std::vector<Rational> fitness;
        fitness.reserve(generation.size());
        for (const Seed& s : generation) fitness.push_back(s.eval.fitness);
        std::vector<double> probs = selection_probabilities(fitness);

        std::vector<Seed> next;
        next.reserve(static_cast<size_t>(cfg.population_size) + 8);

        // Elitism: the best distinct seeds survive verbatim (and skip
        // re-execution), so a champion lineage is never lost to mutation
        // churn.
        std::vector<size_t> elite_indices;
        {
            std::vector<size_t> order(generation.size());
            for (size_t i = 0; i < order.size(); ++i) order[i] = i;
            std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
                if (generation[a].eval.fitness != generation[b].eval.fitness)
                    return generation[a].eval.fitness > generation[b].eval.fitness;
                return a < b;
            });
            size_t want = std::min<size_t>(generation.size(),
                                           std::max<size_t>(1, cfg.population_size / 3));
            for (size_t i = 0; i < order.size() && elite_indices.size() < want; ++i) {
                const Seed& cand = generation[order[i]];
                bool dup = false;
                for (size_t kept : elite_indices)
                    dup = dup || same_seed_txs(generation[kept], cand);
                if (!dup) elite_indices.push_back(order[i]);
            }
            for (size_t idx : elite_indices) next.push_back(generation[idx]);
        }
        size_t n_elites = elite_indices.size();

        // Children: one direct mutant per elite, one exploration cross of
        // each elite with a uniformly drawn mate (keeps low-fitness material
        // such as fresh immigrants breedable), rest fitness-proportional.
        size_t child_budget = static_cast<size_t>(cfg.population_size);
        for (size_t i = 0; i < n_elites && next.size() - n_elites < child_budget; ++i)
            next.push_back(mutate(generation[elite_indices[i]], abi, pool, rng, cfg));
        for (size_t i = 0; i < n_elites && next.size() - n_elites < child_budget; ++i) {
            size_t mate = rng.below(generation.size());
            auto [c1, c2] = crossover(generation[elite_indices[i]], generation[mate], raw, rng, cfg);
            next.push_back(mutate(c1, abi, pool, rng, cfg));
        }
        auto pairs = select_parents(probs, rng, (child_budget + 1) / 2);
        for (auto [ia, ib] : pairs) {
            if (next.size() - n_elites >= child_budget) break;
            auto [c1, c2] = crossover(generation[ia], generation[ib], raw, rng, cfg);
            next.push_back(mutate(c1, abi, pool, rng, cfg));
            if (next.size() - n_elites >= child_budget) break;
            next.push_back(mutate(c2, abi, pool, rng, cfg));
        }

        // Keep every function in play: each generation receives one fresh
        // init-style seed per function, plus a writer->reader starter pair
        // when the runtime dependency index suggests one. Crossover always
        // has material for new call combinations that way.
        {
            auto fresh_tx = [&](size_t fi) {
                const AbiFunction& fn = abi.functions[fi];
                SeedTx tx;
                tx.fn_index = fi;
                tx.sender = rng.below(2) == 0 ? kSenderA : kSenderB;
                for (const Param& p : fn.params) tx.args.push_back(random_arg(p, rng));
                tx.value = fn.payable ? random_value(rng, cfg) : 0;
                return tx;
            };
            for (size_t fi = 0; fi < abi.functions.size(); ++fi) {
                Seed s;
                s.txs.push_back(fresh_tx(fi));
                next.push_back(std::move(s));
            }
            // One reader function prefixed by a function that writes a slot
            // it reads.
            for (size_t fi = 0; fi < abi.functions.size(); ++fi) {
                auto rit = raw.reads.find(fi);
                if (rit == raw.reads.end()) continue;
                std::optional<size_t> writer;
                for (const auto& [wf, slots] : raw.writes) {
                    if (wf == fi) continue;
                    for (const u256& slot : slots)
                        if (rit->second.count(slot)) writer = wf;
                    if (writer) break;
                }
                if (!writer) continue;
                Seed s;
                s.txs.push_back(fresh_tx(*writer));
                s.txs.push_back(fresh_tx(fi));
                next.push_back(std::move(s));
                break;  // one starter pair per generation
            }
        }

        generation = std::move(next);
        if (generation.empty()) break;
        evaluate_generation(generation);
    }

    if (lock_ether_detected(outflow)) {
        FindingRecord rec;
        rec.bug_class = BugClass::LockEther;
        rec.anchor_pc = 0;
        if (first_value_seed) rec.witness = *first_value_seed;
        rec.tx_index = 0;
        rec.generation = gen_number;
        rec.test_case = test_cases;
        rec.description = "value was received during the campaign but no execution path "
                          "ever attempted to send value out";
        result.findings.push_back(std::move(rec));
        if (!result.finding_generation.count("LockEther"))
            result.finding_generation["LockEther"] = gen_number;
    }

    result.total_test_cases = test_cases;
    result.generations = gen_number;
    if (cfg.emit_timings)
        result.wall_time_ms = static_cast<uint64_t>(
            std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - t_start)
                .count());
    return result;
}

}  // namespace sdfuzz
