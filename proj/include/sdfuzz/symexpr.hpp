#pragma once

#include "sdfuzz/opcodes.hpp"
#include "sdfuzz/u256.hpp"

#include <memory>
#include <string>
#include <vector>

namespace sdfuzz {

// Symbolic value reconstructed from bytecode. Storage reads stay symbolic
// leaves; anything the input transaction controls (calldata, caller, value,
// block fields) keeps its own leaf kind so the solver can tell attacker-
// controlled values from contract state. Unknown absorbs everything the
// reconstruction does not model.
enum class SymKind {
    Const,
    Storage,       // kids[0] = slot expression
    Calldata,      // kids[0] = offset expression
    CalldataSize,
    Caller,
    CallValue,
    SelfAddress,
    BlockField,    // which block field, in `aux`
    Sha3,          // kids = 32-byte words of the hashed region
    UnOp,          // op in `op`, kids[0]
    BinOp,         // op in `op`, kids = {top operand, second operand}
    Unknown,
};

enum class BlockFieldKind { Timestamp, Number, Coinbase, Prevrandao, Gaslimit };

struct SymExpr;
using SymRef = std::shared_ptr<const SymExpr>;

struct SymExpr {
    SymKind kind = SymKind::Unknown;
    u256 cval = 0;             // Const
    Op op = Op::INVALID;       // UnOp/BinOp
    BlockFieldKind bf = BlockFieldKind::Timestamp;
    std::vector<SymRef> kids;

    int depth() const;
    bool contains_unknown() const;
    bool contains(SymKind k) const;
};

SymRef sym_const(const u256& v);
SymRef sym_storage(SymRef slot);
SymRef sym_calldata(SymRef offset);
SymRef sym_calldatasize();
SymRef sym_caller();
SymRef sym_callvalue();
SymRef sym_self_address();
SymRef sym_block(BlockFieldKind bf);
SymRef sym_sha3(std::vector<SymRef> words);
SymRef sym_unknown();

// Builders fold constant operands, so exprs built forward and backward from
// the same instruction stream normalize to the same tree.
SymRef sym_unop(Op op, SymRef a);
SymRef sym_binop(Op op, SymRef top, SymRef second);

bool sym_equal(const SymRef& a, const SymRef& b);
std::string sym_to_string(const SymRef& e);

// Depth guard: collapse trees deeper than `max_depth` into Unknown.
SymRef sym_clamp_depth(const SymRef& e, int max_depth = 64);

// A branch-direction requirement on one symbolic condition.
struct BranchConstraint {
    SymRef cond;
    bool expect_nonzero = true;  // true side of JUMPI requires cond != 0

    bool partially_unknown() const { return cond && cond->contains_unknown(); }
};

}  // namespace sdfuzz
