#include "sdfuzz/report.hpp"

#include <cstdio>
#include <sstream>

namespace sdfuzz {

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

ordered_json interval_set_json(const IntervalSet& set) {
    ordered_json arr = ordered_json::array();
    for (const auto& iv : set.intervals())
        arr.push_back(ordered_json::array({to_hex(iv.lo), to_hex(iv.hi)}));
    return arr;
}

// Replay-sufficient encoding of the executed transactions.
ordered_json witness_json(const AbiDescriptor& abi, const Seed& seed) {
    ordered_json txs = ordered_json::array();
    for (const SeedTx& tx : seed.txs) {
        ordered_json t;
        t["sender"] = to_hex(tx.sender);
        const AbiFunction& fn = abi.fn(tx.fn_index);
        t["function"] = fn.name;
        t["selector"] = "0x" + bytes_to_hex(bytes(fn.selector.begin(), fn.selector.end()));
        t["calldata"] = "0x" + bytes_to_hex(encode_args(fn, tx.args));
        t["value"] = to_hex(tx.value);
        if (tx.env_override) {
            t["timestamp"] = tx.env_override->timestamp;
            t["number"] = tx.env_override->number;
        }
        txs.push_back(t);
    }
    return txs;
}

}  // namespace

std::string code_digest(const bytes& code) {
    return to_hex32(keccak256(code));
}

ordered_json static_section_json(const StaticAnalysis& st) {
    ordered_json out;
    out["instruction_count"] = st.instructions.size();
    out["block_count"] = st.cfg.blocks.size();
    out["edge_count"] = st.cfg.edge_count();
    out["unrolled_block_count"] =
        st.unrolled ? ordered_json(st.unrolled->blocks.size()) : ordered_json(nullptr);

    ordered_json targets = ordered_json::array();
    for (const CodeTarget& t : st.code_targets) {
        ordered_json o;
        o["bug_class"] = bug_class_name(t.bug_class);
        o["block"] = t.block_id;
        o["anchor_pc"] = t.anchor_pc;
        o["whole_contract"] = t.whole_contract;
        ordered_json ev = ordered_json::array();
        for (const auto& [pc, role] : t.evidence)
            ev.push_back(ordered_json::array({pc, role}));
        o["evidence"] = ev;
        targets.push_back(o);
    }
    out["code_targets"] = targets;

    ordered_json states = ordered_json::array();
    for (const StateTarget& t : st.state_targets) {
        ordered_json o;
        o["target_index"] = t.target_index;
        o["satisfiable"] = t.satisfiable;
        o["truncated"] = t.truncated;
        ordered_json ranges = ordered_json::object();
        for (const auto& [slot, set] : t.ranges) ranges[to_hex(slot)] = interval_set_json(set);
        o["ranges"] = ranges;
        states.push_back(o);
    }
    out["state_targets"] = states;
    out["warnings"] = st.warnings;
    return out;
}

ordered_json campaign_report_json(const CampaignResult& result, const bytes& code,
                                  const std::string& contract_name,
                                  const AbiDescriptor& abi) {
    const CampaignConfig& cfg = result.config;
    ordered_json out;
    out["schema_version"] = kReportSchemaVersion;
    out["contract"] = {{"name", contract_name},
                       {"code_size", code.size()},
                       {"code_hash", code_digest(code)},
                       {"bytecode", "0x" + bytes_to_hex(code)}};
    out["config"] = {{"max_test_cases", cfg.max_test_cases},
                     {"population_size", cfg.population_size},
                     {"rng_seed", cfg.rng_seed},
                     {"crossover_prob", cfg.crossover_prob},
                     {"pool_mutation_prob", cfg.pool_mutation_prob},
                     {"arg_mutation_rate", cfg.arg_mutation_rate},
                     {"gamma", cfg.gamma},
                     {"max_seq_len", cfg.max_seq_len},
                     {"unroll_bound", cfg.unroll_bound},
                     {"ablation", cfg.ablation_name()}};
    out["static"] = static_section_json(result.statics);

    ordered_json gens = ordered_json::array();
    for (const GenerationMetrics& g : result.metrics) {
        gens.push_back({{"generation", g.generation},
                        {"test_cases", g.test_cases},
                        {"avg_code_distance", fmt_double(g.avg_code_distance)},
                        {"avg_state_distance", fmt_double(g.avg_state_distance)},
                        {"covered_edges", g.covered_edges},
                        {"best_fitness", fmt_double(g.best_fitness)}});
    }
    out["generations"] = gens;

    ordered_json finds = ordered_json::array();
    for (const FindingRecord& f : result.findings) {
        ordered_json o;
        o["bug_class"] = bug_class_name(f.bug_class);
        o["anchor_pc"] = f.anchor_pc;
        o["generation"] = f.generation;
        o["test_case"] = f.test_case;
        o["tx_index"] = f.tx_index;
        o["description"] = f.description;
        o["witness"] = witness_json(abi, f.witness);
        finds.push_back(o);
    }
    out["findings"] = finds;
    out["targets_reached"] = [&] {
        ordered_json o;
        for (const auto& [idx, gen] : result.target_reached_generation)
            o[std::to_string(idx)] = gen;
        return o;
    }();
    out["finding_generations"] = result.finding_generation;
    out["totals"] = {{"test_cases", result.total_test_cases},
                     {"generations", result.generations},
                     {"wall_time_ms", result.wall_time_ms}};
    return out;
}

std::string metrics_csv(const CampaignResult& result) {
    std::ostringstream os;
    os << "generation,test_cases,avg_code_distance,avg_state_distance,covered_edges,best_fitness\n";
    for (const GenerationMetrics& g : result.metrics) {
        os << g.generation << ',' << g.test_cases << ',' << fmt_double(g.avg_code_distance) << ','
           << fmt_double(g.avg_state_distance) << ',' << g.covered_edges << ','
           << fmt_double(g.best_fitness) << '\n';
    }
    return os.str();
}

ReplayBundle parse_report_for_replay(const ordered_json& report) {
    ReplayBundle bundle;
    if (!report.contains("contract") || !report["contract"].contains("bytecode"))
        throw std::runtime_error("report is missing the contract bytecode");
    bundle.code = parse_hex(report["contract"]["bytecode"].get<std::string>());
    bundle.code_hash = report["contract"].value("code_hash", "");
    if (!bundle.code_hash.empty() && bundle.code_hash != code_digest(bundle.code))
        throw std::runtime_error("contract bytecode does not match its recorded hash");

    for (const auto& f : report.value("findings", ordered_json::array())) {
        ReplayWitness w;
        auto cls = bug_class_from_name(f.value("bug_class", ""));
        if (!cls) throw std::runtime_error("unknown bug class in report finding");
        w.bug_class = *cls;
        w.anchor_pc = f.value("anchor_pc", 0u);
        w.tx_index = f.value("tx_index", size_t{0});
        w.description = f.value("description", "");
        for (const auto& t : f.value("witness", ordered_json::array())) {
            Transaction tx;
            tx.sender = parse_u256(t.value("sender", "0x0"));
            bytes data = parse_hex(t.value("calldata", "0x"));
            bytes sel = parse_hex(t.value("selector", "0x00000000"));
            if (sel.size() != 4) throw std::runtime_error("bad selector in witness");
            std::copy(sel.begin(), sel.end(), tx.selector.begin());
            tx.args = data;
            tx.value = parse_u256(t.value("value", "0x0"));
            if (t.contains("timestamp") || t.contains("number")) {
                BlockEnv env;
                env.timestamp = t.value("timestamp", env.timestamp);
                env.number = t.value("number", env.number);
                tx.block_env_override = env;
            }
            w.txs.push_back(std::move(tx));
        }
        bundle.findings.push_back(std::move(w));
    }
    return bundle;
}

}  // namespace sdfuzz
