#pragma once

#include "sdfuzz/cfg.hpp"
#include "sdfuzz/u256.hpp"

#include <array>
#include <map>
#include <optional>
#include <set>

namespace sdfuzz {

struct BlockEnv {
    uint64_t timestamp = 1'000'000;
    uint64_t number = 1'000;
    u256 coinbase = 0;
    u256 prevrandao = 0;
    uint64_t gaslimit = 0;
};

struct WorldState {
    std::map<Address, std::map<u256, u256>> storage;
    std::map<Address, u256> balances;
    std::map<Address, bytes> deployed;
    BlockEnv block_env;
    uint64_t deploy_counter = 0;

    u256 storage_at(const Address& a, const u256& slot) const {
        auto it = storage.find(a);
        if (it == storage.end()) return 0;
        auto jt = it->second.find(slot);
        return jt == it->second.end() ? u256(0) : jt->second;
    }
    u256 balance_of(const Address& a) const {
        auto it = balances.find(a);
        return it == balances.end() ? u256(0) : it->second;
    }
};

struct Transaction {
    Address sender = 0;
    std::array<uint8_t, 4> selector{};
    bytes args;  // calldata after the 4 selector bytes
    u256 value = 0;
    std::optional<BlockEnv> block_env_override;

    bytes full_calldata() const {
        bytes d(selector.begin(), selector.end());
        d.insert(d.end(), args.begin(), args.end());
        return d;
    }
};

enum class HaltReason {
    Stop,
    Return,
    Revert,
    InvalidJump,
    StackUnderflow,
    StackOverflow,
    BudgetExhausted,
    InvalidOpcode,
    MemoryLimit,
    SelfDestructed,
};

const char* halt_reason_name(HaltReason r);

// Provenance classes for operands observed at runtime (and statically).
enum class ValueClass { Constant, CalldataDerived, StorageDerived, CallerDerived, BlockDerived, Other };

const char* value_class_name(ValueClass c);

struct StorageAccess {
    uint64_t seq = 0;
    uint32_t pc = 0;
    int depth = 0;
    u256 slot;
    u256 value;
};

struct CallRecord {
    uint64_t seq = 0;
    uint32_t pc = 0;
    int depth = 0;
    Op kind = Op::CALL;
    Address target = 0;
    ValueClass target_class = ValueClass::Other;
    ValueClass args_class = ValueClass::Other;
    u256 value = 0;
    bool gas_forwarded = false;
    bool success = false;
    bool reentered = false;  // this call triggered the re-entry hook
};

struct SelfdestructRecord {
    uint64_t seq = 0;
    uint32_t pc = 0;
    Address beneficiary = 0;
    u256 value = 0;
};

struct ExecutionTrace {
    Transaction tx;
    std::vector<int> executed_blocks;                 // in execution order
    std::set<std::pair<int, bool>> branch_edges;      // (block id, taken direction)
    std::vector<StorageAccess> storage_reads;
    std::vector<StorageAccess> storage_writes;
    std::vector<CallRecord> calls;
    std::vector<SelfdestructRecord> selfdestructs;
    u256 outgoing_value = 0;  // wei leaving the contract (calls + selfdestruct)
    bool reverted = false;
    bool read_block_env = false;  // a block field opcode executed
    HaltReason halt = HaltReason::Stop;
    std::map<u256, u256> final_storage;  // touched slots, post-transaction values
    uint64_t steps = 0;
};

struct StepBudget {
    uint64_t max_steps = 100'000;
};

struct ReentryPolicy {
    enum Kind { None, Once };
    Kind kind = Once;
};

struct VmOptions {
    StepBudget budget;
    ReentryPolicy reentry;
    const CfgIndex* cfg = nullptr;  // optional: enables block/branch tracing
};

// Deploy runtime bytecode at a fresh counter-derived address.
Address deploy(WorldState& state, const bytes& runtime_code);

// Run one transaction against `contract`. Deterministic; failures surface as
// trace.reverted with a halt reason, never as exceptions. External calls are
// stubbed (success, zeroed return data); a value-bearing CALL back to the
// transaction sender may re-enter the contract once under ReentryPolicy::Once.
ExecutionTrace execute(WorldState& state, const Address& contract, const Transaction& tx,
                       const VmOptions& opt = {});

}  // namespace sdfuzz
