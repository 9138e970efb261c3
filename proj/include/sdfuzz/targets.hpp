#pragma once

#include "sdfuzz/abi.hpp"
#include "sdfuzz/cfg.hpp"

#include <optional>
#include <unordered_map>

namespace sdfuzz {

enum class BugClass {
    EtherLeak,
    BlockDependency,
    Reentrancy,
    ControlledDelegatecall,
    DangerousDelegatecall,
    Suicidal,
    LockEther,
};

const char* bug_class_name(BugClass c);
std::optional<BugClass> bug_class_from_name(const std::string& name);

struct CodeTarget {
    int block_id = 0;
    BugClass bug_class = BugClass::Reentrancy;
    uint32_t anchor_pc = 0;
    std::vector<std::pair<uint32_t, std::string>> evidence;  // (pc, role)
    bool whole_contract = false;  // LockEther: scope is the entire contract
};

// Static operand provenance, the bytecode-level stand-in for source-level
// "uses msg.data / msg.sender / block data" facts.
struct TaintVal {
    uint8_t bits = 0;               // same bit assignment as the VM's dynamic taint
    std::optional<u256> constant;   // set when the value is statically known
    bool through_hash = false;      // flowed through SHA3 (mapping-key idiom)
};

enum : uint8_t {
    kStCalldata = 1,
    kStStorage = 2,
    kStCaller = 4,
    kStCallValue = 8,
    kStBlock = 16,
    kStOther = 32,
};

struct InstructionFacts {
    std::optional<TaintVal> slot;        // SLOAD/SSTORE key
    std::optional<TaintVal> call_target; // CALL/DELEGATECALL/STATICCALL
    std::optional<TaintVal> call_value;
    std::optional<TaintVal> call_gas;
    std::optional<TaintVal> call_args;   // merged taint of the argument region
    std::optional<TaintVal> condition;   // JUMPI
};

struct StaticTaint {
    std::unordered_map<uint32_t, InstructionFacts> facts;
};

// Flow-insensitive memory, flow-sensitive stack taint over the pre-unroll CFG.
StaticTaint analyze_taint(const Cfg& cfg);

// Pattern-match hazardous behaviors over the CFG. Over-approximate by design:
// matches are fuzzing targets, not reported bugs. Deterministic order
// (bug class, anchor pc).
std::vector<CodeTarget> find_code_targets(const Cfg& cfg, const AbiDescriptor& abi);

}  // namespace sdfuzz
