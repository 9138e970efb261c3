#pragma once

#include "sdfuzz/instruction.hpp"

#include <optional>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace sdfuzz {

enum class EdgeKind { Fallthrough, Jump, BranchTrue, BranchFalse };

const char* edge_kind_name(EdgeKind k);

// Synthetic sink roles for edges whose destination cannot be executed or
// resolved statically.
enum class BlockRole { Code, UnknownSink, RevertSink, HaltSink };

struct BasicBlock {
    int id = 0;
    uint32_t start_pc = 0;
    uint32_t end_pc = 0;  // pc of the last instruction
    std::vector<Instruction> instructions;
    std::vector<std::pair<int, EdgeKind>> successors;
    BlockRole role = BlockRole::Code;
    int origin = -1;     // original block id this block is a copy of
    int iteration = 0;   // which unroll copy (0 = the original)
    bool dead = false;   // unreachable from entry

    bool ends_with(Op op) const {
        return !instructions.empty() && instructions.back().op == op;
    }
};

struct Cfg {
    std::vector<BasicBlock> blocks;  // indexed by id
    int entry = 0;
    int unroll_bound = 20;

    const BasicBlock& block(int id) const { return blocks.at(static_cast<size_t>(id)); }
    size_t edge_count() const;
    std::vector<std::vector<int>> predecessors() const;
    bool has_cycle() const;

    // All non-synthetic blocks whose origin is `original_id`.
    std::vector<int> copies_of(int original_id) const;
};

Cfg build_cfg(const std::vector<Instruction>& instructions);

struct UnrollBudgetExceeded : std::runtime_error {
    explicit UnrollBudgetExceeded(const std::string& msg) : std::runtime_error(msg) {}
};

// Replace every loop by at most `bound` sequential copies of its body; the
// last copy's back edges are removed, so the result is acyclic. Copies carry
// provenance back to the original block ids. Throws UnrollBudgetExceeded when
// duplication would exceed `block_budget` blocks.
Cfg unroll_loops(const Cfg& cfg, int bound = 20, size_t block_budget = 50'000);

// pc -> block lookup for execution tracing.
struct CfgIndex {
    std::unordered_map<uint32_t, int> block_of_pc;   // every instruction pc
    std::unordered_map<uint32_t, int> block_at_start;
    std::set<uint32_t> jumpdests;
    int entry = 0;

    static CfgIndex build(const Cfg& cfg);
};

// Immediate dominators from the entry block (synthetic sinks included).
// dom[b] = -1 for unreachable blocks; dom[entry] = entry.
std::vector<int> dominator_tree(const Cfg& cfg);

// True when `maybe_dom` lies on every path from entry to `block`.
bool dominates(const std::vector<int>& idom, int maybe_dom, int block, int entry);

}  // namespace sdfuzz
