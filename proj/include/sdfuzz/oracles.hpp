#pragma once

#include "sdfuzz/targets.hpp"
#include "sdfuzz/vm.hpp"

#include <map>
#include <string>

namespace sdfuzz {

struct TraceFinding {
    BugClass bug_class = BugClass::Reentrancy;
    uint32_t anchor_pc = 0;
    std::string description;
};

// Per-seed wei accounting, keyed by sender; EtherLeak compares what a sender
// got out of the contract against what it put in within the same seed.
struct SeedLedger {
    std::map<Address, u256> value_in;
    std::map<Address, u256> value_out;
};

struct OracleContext {
    Address contract = 0;
    Address deployer = 0;
    const CfgIndex* cfg_index = nullptr;
    uint64_t max_steps = 100'000;
};

// Trace-level oracles. `world_before` is the state the transaction ran
// against (used for differential re-execution); never mutated. Reverted
// traces are checked for block-dependent guards only.
std::vector<TraceFinding> check_trace(const ExecutionTrace& trace, const WorldState& world_before,
                                      const WorldState& world_after, const OracleContext& ctx,
                                      SeedLedger& ledger);

// Campaign-end LockEther decision: value entered the contract at least once
// and no trace in the whole campaign attempted a value-bearing CALL or a
// SELFDESTRUCT.
struct CampaignOutflowStats {
    bool value_entered = false;
    bool outflow_attempted = false;

    void account(const ExecutionTrace& trace);
};

bool lock_ether_detected(const CampaignOutflowStats& stats);

}  // namespace sdfuzz
