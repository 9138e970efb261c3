#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace sdfuzz {

enum class Op : uint8_t {
    STOP = 0x00,
    ADD = 0x01,
    MUL = 0x02,
    SUB = 0x03,
    DIV = 0x04,
    MOD = 0x06,
    LT = 0x10,
    GT = 0x11,
    SLT = 0x12,
    SGT = 0x13,
    EQ = 0x14,
    ISZERO = 0x15,
    AND = 0x16,
    OR = 0x17,
    XOR = 0x18,
    NOT = 0x19,
    SHL = 0x1b,
    SHR = 0x1c,
    SHA3 = 0x20,
    ADDRESS = 0x30,
    BALANCE = 0x31,
    CALLER = 0x33,
    CALLVALUE = 0x34,
    CALLDATALOAD = 0x35,
    CALLDATASIZE = 0x36,
    CALLDATACOPY = 0x37,
    COINBASE = 0x41,
    TIMESTAMP = 0x42,
    NUMBER = 0x43,
    PREVRANDAO = 0x44,
    GASLIMIT = 0x45,
    POP = 0x50,
    MLOAD = 0x51,
    MSTORE = 0x52,
    MSTORE8 = 0x53,
    SLOAD = 0x54,
    SSTORE = 0x55,
    JUMP = 0x56,
    JUMPI = 0x57,
    JUMPDEST = 0x5b,
    PUSH1 = 0x60,
    PUSH32 = 0x7f,
    DUP1 = 0x80,
    DUP16 = 0x8f,
    SWAP1 = 0x90,
    SWAP16 = 0x9f,
    LOG0 = 0xa0,
    LOG4 = 0xa4,
    CALL = 0xf1,
    RETURN = 0xf3,
    DELEGATECALL = 0xf4,
    STATICCALL = 0xfa,
    REVERT = 0xfd,
    INVALID = 0xfe,
    SELFDESTRUCT = 0xff,
};

inline bool is_push(Op op) {
    return op >= Op::PUSH1 && op <= Op::PUSH32;
}
inline int push_width(Op op) {
    return static_cast<int>(op) - static_cast<int>(Op::PUSH1) + 1;
}
inline Op push_op(int width) {
    return static_cast<Op>(static_cast<int>(Op::PUSH1) + width - 1);
}
inline bool is_dup(Op op) {
    return op >= Op::DUP1 && op <= Op::DUP16;
}
inline int dup_depth(Op op) {
    return static_cast<int>(op) - static_cast<int>(Op::DUP1) + 1;
}
inline bool is_swap(Op op) {
    return op >= Op::SWAP1 && op <= Op::SWAP16;
}
inline int swap_depth(Op op) {
    return static_cast<int>(op) - static_cast<int>(Op::SWAP1) + 1;
}
inline bool is_log(Op op) {
    return op >= Op::LOG0 && op <= Op::LOG4;
}
inline int log_topics(Op op) {
    return static_cast<int>(op) - static_cast<int>(Op::LOG0);
}

// Opcodes that end a basic block with no successors.
inline bool is_terminator(Op op) {
    switch (op) {
    case Op::STOP:
    case Op::RETURN:
    case Op::REVERT:
    case Op::SELFDESTRUCT:
    case Op::INVALID:
        return true;
    default:
        return false;
    }
}

// Whether this single byte is a known opcode of the supported subset.
bool is_known_opcode(uint8_t byte);

// Stack arity. Returns {pops, pushes}.
std::pair<int, int> stack_arity(Op op);

const char* op_name(Op op);

// Mnemonic lookup (exact, upper-case). Plain "PUSH" is not an opcode; the
// assembler handles PUSH sugar separately.
std::optional<Op> op_from_name(const std::string& name);

}  // namespace sdfuzz
