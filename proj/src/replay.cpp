#include "sdfuzz/replay.hpp"

#include "sdfuzz/oracles.hpp"

namespace sdfuzz {

namespace {

const Address kDeployer = 0xd3b107;
const u256 kAccountFunds = u256(1) << 96;

}  // namespace

ReplayOutcome replay_witness(const bytes& code, const ReplayWitness& witness,
                             uint64_t max_steps) {
    ReplayOutcome out;

    WorldState world;
    Address contract = deploy(world, code);
    world.balances[kDeployer] = kAccountFunds;
    for (const Transaction& tx : witness.txs) world.balances[tx.sender] = kAccountFunds;

    auto instructions = disassemble(code);
    Cfg cfg = build_cfg(instructions);
    CfgIndex index = CfgIndex::build(cfg);

    OracleContext octx;
    octx.contract = contract;
    octx.deployer = kDeployer;
    octx.cfg_index = &index;
    octx.max_steps = max_steps;

    VmOptions opt;
    opt.budget.max_steps = max_steps;
    opt.cfg = &index;

    SeedLedger ledger;
    CampaignOutflowStats outflow;
    for (size_t i = 0; i < witness.txs.size(); ++i) {
        WorldState before = world;
        ExecutionTrace trace = execute(world, contract, witness.txs[i], opt);
        outflow.account(trace);
        for (const TraceFinding& f : check_trace(trace, before, world, octx, ledger)) {
            if (f.bug_class != witness.bug_class) continue;
            if (witness.anchor_pc != 0 && f.anchor_pc != witness.anchor_pc) continue;
            out.reproduced = true;
            out.detail = f.description;
            return out;
        }
    }
    if (witness.bug_class == BugClass::LockEther && lock_ether_detected(outflow)) {
        out.reproduced = true;
        out.detail = "witness delivered value and no outflow was attempted";
        return out;
    }
    out.detail = "witness did not re-trigger the finding";
    return out;
}

}  // namespace sdfuzz
