#pragma once

#include "sdfuzz/opcodes.hpp"
#include "sdfuzz/u256.hpp"

#include <string>
#include <vector>

namespace sdfuzz {

struct Instruction {
    uint32_t pc = 0;
    Op op = Op::INVALID;
    bytes immediate;  // non-empty only for PUSH1..PUSH32

    uint32_t size() const { return 1 + static_cast<uint32_t>(immediate.size()); }
    u256 push_value() const { return u256_from_bytes(immediate.data(), immediate.size()); }
};

// Decode runtime bytecode. Every byte of the input is covered; unknown opcode
// bytes decode as single-byte INVALID. A PUSH whose immediate runs off the end
// of the code decodes as INVALID and decoding stops there.
std::vector<Instruction> disassemble(const bytes& code);

std::string format_instruction(const Instruction& ins);

struct AsmError : std::runtime_error {
    explicit AsmError(const std::string& msg) : std::runtime_error(msg) {}
};

// Assemble mini-asm text. One instruction per line; `name:` defines a label
// for the next instruction's pc; immediates are decimal or 0x hex; `@name`
// resolves to a label pc (PUSH without an explicit width defaults to PUSH2).
// Comments start with ';', '#' or '//'. Throws AsmError on undefined labels
// or immediates that overflow the declared push width.
bytes assemble(const std::string& source);

}  // namespace sdfuzz
