#include "sdfuzz/instruction.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

namespace sdfuzz {

std::vector<Instruction> disassemble(const bytes& code) {
    std::vector<Instruction> out;
    size_t pc = 0;
    while (pc < code.size()) {
        Instruction ins;
        ins.pc = static_cast<uint32_t>(pc);
        uint8_t byte = code[pc];
        if (!is_known_opcode(byte)) {
            ins.op = Op::INVALID;
            out.push_back(ins);
            ++pc;
            continue;
        }
        Op op = static_cast<Op>(byte);
        if (is_push(op)) {
            size_t width = static_cast<size_t>(push_width(op));
            if (pc + 1 + width > code.size()) {
                // Truncated immediate: malformed tail, decode as INVALID and stop.
                ins.op = Op::INVALID;
                out.push_back(ins);
                break;
            }
            ins.op = op;
            ins.immediate.assign(code.begin() + pc + 1, code.begin() + pc + 1 + width);
            pc += 1 + width;
        } else {
            ins.op = op;
            ++pc;
        }
        out.push_back(ins);
    }
    return out;
}

std::string format_instruction(const Instruction& ins) {
    std::ostringstream os;
    os << ins.pc << ": " << op_name(ins.op);
    if (!ins.immediate.empty()) os << " 0x" << bytes_to_hex(ins.immediate);
    return os.str();
}

// ---------------------------------------------------------------------------
// mini-asm

namespace {

struct AsmLine {
    int lineno;
    std::string mnemonic;   // upper-cased
    std::string operand;    // raw token, may be empty
};

std::string strip_comment(const std::string& line) {
    std::string out;
    for (size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (c == ';' || c == '#') break;
        if (c == '/' && i + 1 < line.size() && line[i + 1] == '/') break;
        out.push_back(c);
    }
    return out;
}

std::string upper(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::toupper(c); });
    return s;
}

}  // namespace

bytes assemble(const std::string& source) {
    std::vector<AsmLine> items;
    std::map<std::string, uint32_t> labels;

    // Pass 1: tokenize, assign pcs, collect label definitions.
    std::istringstream in(source);
    std::string raw;
    int lineno = 0;
    uint32_t pc = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::istringstream ls(strip_comment(raw));
        std::string tok;
        while (ls >> tok) {
            if (tok.back() == ':') {
                std::string name = tok.substr(0, tok.size() - 1);
                if (name.empty())
                    throw AsmError("line " + std::to_string(lineno) + ": empty label");
                if (labels.count(name))
                    throw AsmError("line " + std::to_string(lineno) + ": duplicate label '" + name + "'");
                labels[name] = pc;
                continue;
            }
            AsmLine item{lineno, upper(tok), ""};
            if (item.mnemonic.rfind("PUSH", 0) == 0) {
                std::string operand;
                if (!(ls >> operand))
                    throw AsmError("line " + std::to_string(lineno) + ": PUSH needs an operand");
                item.operand = operand;
                if (item.mnemonic == "PUSH") item.mnemonic = "PUSH2";  // @label sugar default
            }
            auto op = op_from_name(item.mnemonic);
            if (!op)
                throw AsmError("line " + std::to_string(lineno) + ": unknown mnemonic '" + tok + "'");
            items.push_back(item);
            pc += is_push(*op) ? 1 + push_width(*op) : 1;
            break;  // one instruction per line
        }
    }

    // Pass 2: emit with labels resolved.
    bytes code;
    for (const AsmLine& item : items) {
        Op op = *op_from_name(item.mnemonic);
        code.push_back(static_cast<uint8_t>(op));
        if (!is_push(op)) continue;
        int width = push_width(op);
        u256 value;
        if (!item.operand.empty() && item.operand[0] == '@') {
            auto it = labels.find(item.operand.substr(1));
            if (it == labels.end())
                throw AsmError("line " + std::to_string(item.lineno) + ": undefined label '" +
                               item.operand.substr(1) + "'");
            value = it->second;
        } else {
            try {
                value = parse_u256(item.operand);
            } catch (const std::exception& e) {
                throw AsmError("line " + std::to_string(item.lineno) + ": " + e.what());
            }
        }
        if (width < 32 && value >> (8 * width) != 0)
            throw AsmError("line " + std::to_string(item.lineno) + ": immediate " + item.operand +
                           " overflows " + item.mnemonic);
        uint8_t buf[32];
        u256_to_bytes32(value, buf);
        code.insert(code.end(), buf + 32 - width, buf + 32);
    }
    return code;
}

}  // namespace sdfuzz
