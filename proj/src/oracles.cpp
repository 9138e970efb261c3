#include "sdfuzz/oracles.hpp"

#include <sstream>

namespace sdfuzz {

namespace {

bool sent_value(const ExecutionTrace& t) {
    if (!t.selfdestructs.empty()) return true;
    for (const auto& c : t.calls)
        if (c.kind == Op::CALL && c.success && c.value > 0) return true;
    return false;
}

// Reentrancy: a value-bearing call re-entered the contract, the inner
// execution transferred value again, and a slot read before the call was
// written only after it.
std::optional<TraceFinding> check_reentrancy(const ExecutionTrace& trace) {
    for (const auto& call : trace.calls) {
        if (!(call.depth == 0 && call.kind == Op::CALL && call.value > 0 && call.reentered &&
              call.success))
            continue;
        bool inner_transfer = false;
        for (const auto& inner : trace.calls)
            if (inner.depth >= 1 && inner.value > 0 && inner.success) inner_transfer = true;
        if (!inner_transfer) continue;

        for (const auto& rd : trace.storage_reads) {
            if (rd.depth != 0 || rd.seq >= call.seq) continue;
            bool written_before = false, written_after = false;
            for (const auto& wr : trace.storage_writes) {
                if (wr.slot != rd.slot) continue;
                if (wr.seq < call.seq) written_before = true;
                if (wr.seq > call.seq && wr.depth == 0) written_after = true;
            }
            if (written_before || !written_after) continue;
            TraceFinding f;
            f.bug_class = BugClass::Reentrancy;
            f.anchor_pc = call.pc;
            std::ostringstream os;
            os << "re-entered call at pc " << call.pc << " withdrew twice; slot "
               << to_hex(rd.slot) << " updated only after the call";
            f.description = os.str();
            return f;
        }
    }
    return std::nullopt;
}

std::optional<TraceFinding> check_suicidal(const ExecutionTrace& trace, const OracleContext& ctx) {
    if (trace.reverted || trace.selfdestructs.empty()) return std::nullopt;
    if (trace.tx.sender == ctx.deployer) return std::nullopt;
    const auto& sd = trace.selfdestructs.front();
    TraceFinding f;
    f.bug_class = BugClass::Suicidal;
    f.anchor_pc = sd.pc;
    f.description = "contract self-destructed for a non-deployer sender";
    return f;
}

std::optional<TraceFinding> check_delegatecalls(const ExecutionTrace& trace,
                                                std::vector<TraceFinding>& out) {
    for (const auto& call : trace.calls) {
        if (call.kind != Op::DELEGATECALL) continue;
        if (call.target_class == ValueClass::CalldataDerived) {
            TraceFinding f;
            f.bug_class = BugClass::ControlledDelegatecall;
            f.anchor_pc = call.pc;
            f.description = "delegatecall destination taken from calldata";
            out.push_back(f);
        }
        if (call.args_class == ValueClass::CalldataDerived) {
            TraceFinding f;
            f.bug_class = BugClass::DangerousDelegatecall;
            f.anchor_pc = call.pc;
            f.description = "delegatecall arguments taken from calldata";
            out.push_back(f);
        }
    }
    return std::nullopt;
}

// BlockDependency: differential re-execution with perturbed block fields. A
// value transfer that appears or disappears under perturbation is gated on
// block data.
std::optional<TraceFinding> check_block_dependency(const ExecutionTrace& trace,
                                                   const WorldState& world_before,
                                                   const OracleContext& ctx) {
    if (!trace.read_block_env) return std::nullopt;  // no block field was consulted
    BlockEnv base = trace.tx.block_env_override ? *trace.tx.block_env_override
                                                : world_before.block_env;
    bool base_sent = !trace.reverted && sent_value(trace);

    struct Perturbation {
        const char* label;
        BlockEnv env;
    };
    std::vector<Perturbation> variants;
    auto add = [&](const char* label, BlockEnv env) { variants.push_back({label, env}); };
    BlockEnv e;
    e = base; e.timestamp = base.timestamp + 3600; add("timestamp+1h", e);
    if (base.timestamp >= 3600) { e = base; e.timestamp = base.timestamp - 3600; add("timestamp-1h", e); }
    e = base; e.timestamp = base.timestamp + 1; add("timestamp+1", e);
    e = base; e.number = base.number + 100; add("number+100", e);
    if (base.number >= 100) { e = base; e.number = base.number - 100; add("number-100", e); }
    e = base; e.number = base.number + 1; add("number+1", e);

    for (const auto& variant : variants) {
        WorldState clone = world_before;
        Transaction tx = trace.tx;
        tx.block_env_override = variant.env;
        VmOptions opt;
        opt.budget.max_steps = ctx.max_steps;
        opt.cfg = ctx.cfg_index;
        ExecutionTrace alt = execute(clone, ctx.contract, tx, opt);
        bool alt_sent = !alt.reverted && sent_value(alt);
        if (alt_sent == base_sent) continue;

        uint32_t anchor = 0;
        const ExecutionTrace& sender_trace = base_sent ? trace : alt;
        for (const auto& c : sender_trace.calls)
            if (c.kind == Op::CALL && c.success && c.value > 0) { anchor = c.pc; break; }
        if (anchor == 0 && !sender_trace.selfdestructs.empty())
            anchor = sender_trace.selfdestructs.front().pc;
        TraceFinding f;
        f.bug_class = BugClass::BlockDependency;
        f.anchor_pc = anchor;
        f.description = std::string("value transfer flips under ") + variant.label;
        return f;
    }
    return std::nullopt;
}

std::optional<TraceFinding> check_ether_leak(const ExecutionTrace& trace,
                                             const OracleContext& ctx, SeedLedger& ledger) {
    if (trace.reverted) return std::nullopt;
    const Address& sender = trace.tx.sender;
    ledger.value_in[sender] += trace.tx.value;
    u256 out_to_sender = 0;
    uint32_t anchor = 0;
    for (const auto& c : trace.calls) {
        if (c.kind == Op::CALL && c.success && c.value > 0 && c.target == sender) {
            out_to_sender += c.value;
            if (anchor == 0) anchor = c.pc;
        }
    }
    if (out_to_sender == 0) return std::nullopt;
    ledger.value_out[sender] += out_to_sender;
    if (ledger.value_out[sender] <= ledger.value_in[sender]) return std::nullopt;
    (void)ctx;
    TraceFinding f;
    f.bug_class = BugClass::EtherLeak;
    f.anchor_pc = anchor;
    std::ostringstream os;
    os << "sender extracted " << ledger.value_out[sender] << " wei after depositing "
       << ledger.value_in[sender];
    f.description = os.str();
    return f;
}

}  // namespace

std::vector<TraceFinding> check_trace(const ExecutionTrace& trace, const WorldState& world_before,
                                      const WorldState& world_after, const OracleContext& ctx,
                                      SeedLedger& ledger) {
    (void)world_after;
    std::vector<TraceFinding> out;

    if (auto f = check_block_dependency(trace, world_before, ctx)) out.push_back(*f);
    if (trace.reverted) return out;  // reverted traces: block-dependency guards only

    if (auto f = check_reentrancy(trace)) out.push_back(*f);
    if (auto f = check_suicidal(trace, ctx)) out.push_back(*f);
    check_delegatecalls(trace, out);
    if (auto f = check_ether_leak(trace, ctx, ledger)) out.push_back(*f);
    return out;
}

void CampaignOutflowStats::account(const ExecutionTrace& trace) {
    if (!trace.reverted && trace.tx.value > 0) value_entered = true;
    if (!trace.selfdestructs.empty()) outflow_attempted = true;
    for (const auto& c : trace.calls)
        if (c.kind == Op::CALL && c.value > 0) outflow_attempted = true;
}

bool lock_ether_detected(const CampaignOutflowStats& stats) {
    return stats.value_entered && !stats.outflow_attempted;
}

}  // namespace sdfuzz
