#include "sdfuzz/opcodes.hpp"

#include <unordered_map>

namespace sdfuzz {

bool is_known_opcode(uint8_t byte) {
    Op op = static_cast<Op>(byte);
    if (is_push(op) || is_dup(op) || is_swap(op) || is_log(op)) return true;
    switch (op) {
    case Op::STOP:
    case Op::ADD:
    case Op::MUL:
    case Op::SUB:
    case Op::DIV:
    case Op::MOD:
    case Op::LT:
    case Op::GT:
    case Op::SLT:
    case Op::SGT:
    case Op::EQ:
    case Op::ISZERO:
    case Op::AND:
    case Op::OR:
    case Op::XOR:
    case Op::NOT:
    case Op::SHL:
    case Op::SHR:
    case Op::SHA3:
    case Op::ADDRESS:
    case Op::BALANCE:
    case Op::CALLER:
    case Op::CALLVALUE:
    case Op::CALLDATALOAD:
    case Op::CALLDATASIZE:
    case Op::CALLDATACOPY:
    case Op::COINBASE:
    case Op::TIMESTAMP:
    case Op::NUMBER:
    case Op::PREVRANDAO:
    case Op::GASLIMIT:
    case Op::POP:
    case Op::MLOAD:
    case Op::MSTORE:
    case Op::MSTORE8:
    case Op::SLOAD:
    case Op::SSTORE:
    case Op::JUMP:
    case Op::JUMPI:
    case Op::JUMPDEST:
    case Op::CALL:
    case Op::RETURN:
    case Op::DELEGATECALL:
    case Op::STATICCALL:
    case Op::REVERT:
    case Op::INVALID:
    case Op::SELFDESTRUCT:
        return true;
    default:
        return false;
    }
}

std::pair<int, int> stack_arity(Op op) {
    if (is_push(op)) return {0, 1};
    if (is_dup(op)) return {dup_depth(op), dup_depth(op) + 1};
    if (is_swap(op)) return {swap_depth(op) + 1, swap_depth(op) + 1};
    if (is_log(op)) return {2 + log_topics(op), 0};
    switch (op) {
    case Op::STOP: return {0, 0};
    case Op::ADD:
    case Op::MUL:
    case Op::SUB:
    case Op::DIV:
    case Op::MOD:
    case Op::LT:
    case Op::GT:
    case Op::SLT:
    case Op::SGT:
    case Op::EQ:
    case Op::AND:
    case Op::OR:
    case Op::XOR:
    case Op::SHL:
    case Op::SHR:
    case Op::SHA3: return {2, 1};
    case Op::ISZERO:
    case Op::NOT:
    case Op::BALANCE:
    case Op::CALLDATALOAD:
    case Op::MLOAD:
    case Op::SLOAD: return {1, 1};
    case Op::ADDRESS:
    case Op::CALLER:
    case Op::CALLVALUE:
    case Op::CALLDATASIZE:
    case Op::COINBASE:
    case Op::TIMESTAMP:
    case Op::NUMBER:
    case Op::PREVRANDAO:
    case Op::GASLIMIT: return {0, 1};
    case Op::CALLDATACOPY: return {3, 0};
    case Op::POP: return {1, 0};
    case Op::MSTORE:
    case Op::MSTORE8:
    case Op::SSTORE: return {2, 0};
    case Op::JUMP: return {1, 0};
    case Op::JUMPI: return {2, 0};
    case Op::JUMPDEST: return {0, 0};
    case Op::CALL: return {7, 1};
    case Op::DELEGATECALL:
    case Op::STATICCALL: return {6, 1};
    case Op::RETURN:
    case Op::REVERT: return {2, 0};
    case Op::INVALID: return {0, 0};
    case Op::SELFDESTRUCT: return {1, 0};
    default: return {0, 0};
    }
}

const char* op_name(Op op) {
    if (is_push(op)) {
        static const char* names[] = {
            "PUSH1",  "PUSH2",  "PUSH3",  "PUSH4",  "PUSH5",  "PUSH6",  "PUSH7",  "PUSH8",
            "PUSH9",  "PUSH10", "PUSH11", "PUSH12", "PUSH13", "PUSH14", "PUSH15", "PUSH16",
            "PUSH17", "PUSH18", "PUSH19", "PUSH20", "PUSH21", "PUSH22", "PUSH23", "PUSH24",
            "PUSH25", "PUSH26", "PUSH27", "PUSH28", "PUSH29", "PUSH30", "PUSH31", "PUSH32"};
        return names[push_width(op) - 1];
    }
    if (is_dup(op)) {
        static const char* names[] = {"DUP1",  "DUP2",  "DUP3",  "DUP4",  "DUP5",  "DUP6",
                                      "DUP7",  "DUP8",  "DUP9",  "DUP10", "DUP11", "DUP12",
                                      "DUP13", "DUP14", "DUP15", "DUP16"};
        return names[dup_depth(op) - 1];
    }
    if (is_swap(op)) {
        static const char* names[] = {"SWAP1",  "SWAP2",  "SWAP3",  "SWAP4",  "SWAP5",  "SWAP6",
                                      "SWAP7",  "SWAP8",  "SWAP9",  "SWAP10", "SWAP11", "SWAP12",
                                      "SWAP13", "SWAP14", "SWAP15", "SWAP16"};
        return names[swap_depth(op) - 1];
    }
    if (is_log(op)) {
        static const char* names[] = {"LOG0", "LOG1", "LOG2", "LOG3", "LOG4"};
        return names[log_topics(op)];
    }
    switch (op) {
    case Op::STOP: return "STOP";
    case Op::ADD: return "ADD";
    case Op::MUL: return "MUL";
    case Op::SUB: return "SUB";
    case Op::DIV: return "DIV";
    case Op::MOD: return "MOD";
    case Op::LT: return "LT";
    case Op::GT: return "GT";
    case Op::SLT: return "SLT";
    case Op::SGT: return "SGT";
    case Op::EQ: return "EQ";
    case Op::ISZERO: return "ISZERO";
    case Op::AND: return "AND";
    case Op::OR: return "OR";
    case Op::XOR: return "XOR";
    case Op::NOT: return "NOT";
    case Op::SHL: return "SHL";
    case Op::SHR: return "SHR";
    case Op::SHA3: return "SHA3";
    case Op::ADDRESS: return "ADDRESS";
    case Op::BALANCE: return "BALANCE";
    case Op::CALLER: return "CALLER";
    case Op::CALLVALUE: return "CALLVALUE";
    case Op::CALLDATALOAD: return "CALLDATALOAD";
    case Op::CALLDATASIZE: return "CALLDATASIZE";
    case Op::CALLDATACOPY: return "CALLDATACOPY";
    case Op::COINBASE: return "COINBASE";
    case Op::TIMESTAMP: return "TIMESTAMP";
    case Op::NUMBER: return "NUMBER";
    case Op::PREVRANDAO: return "PREVRANDAO";
    case Op::GASLIMIT: return "GASLIMIT";
    case Op::POP: return "POP";
    case Op::MLOAD: return "MLOAD";
    case Op::MSTORE: return "MSTORE";
    case Op::MSTORE8: return "MSTORE8";
    case Op::SLOAD: return "SLOAD";
    case Op::SSTORE: return "SSTORE";
    case Op::JUMP: return "JUMP";
    case Op::JUMPI: return "JUMPI";
    case Op::JUMPDEST: return "JUMPDEST";
    case Op::CALL: return "CALL";
    case Op::RETURN: return "RETURN";
    case Op::DELEGATECALL: return "DELEGATECALL";
    case Op::STATICCALL: return "STATICCALL";
    case Op::REVERT: return "REVERT";
    case Op::INVALID: return "INVALID";
    case Op::SELFDESTRUCT: return "SELFDESTRUCT";
    default: return "INVALID";
    }
}

std::optional<Op> op_from_name(const std::string& name) {
    static const std::unordered_map<std::string, Op> table = [] {
        std::unordered_map<std::string, Op> t;
        for (int b = 0; b <= 0xff; ++b) {
            if (is_known_opcode(static_cast<uint8_t>(b)))
                t.emplace(op_name(static_cast<Op>(b)), static_cast<Op>(b));
        }
        return t;
    }();
    auto it = table.find(name);
    if (it == table.end()) return std::nullopt;
    return it->second;
}

}  // namespace sdfuzz
