#include "sdfuzz/symexpr.hpp"

#include <algorithm>
#include <sstream>

namespace sdfuzz {

namespace {

SymRef make(SymKind kind) {
    auto e = std::make_shared<SymExpr>();
    e->kind = kind;
    return e;
}

}  // namespace

int SymExpr::depth() const {
    int d = 0;
    for (const auto& k : kids) d = std::max(d, k->depth());
    return d + 1;
}

bool SymExpr::contains_unknown() const {
    return contains(SymKind::Unknown);
}

bool SymExpr::contains(SymKind k) const {
    if (kind == k) return true;
    for (const auto& c : kids)
        if (c->contains(k)) return true;
    return false;
}

SymRef sym_const(const u256& v) {
    auto e = std::make_shared<SymExpr>();
    e->kind = SymKind::Const;
    e->cval = v;
    return e;
}

SymRef sym_storage(SymRef slot) {
    auto e = std::make_shared<SymExpr>();
    e->kind = SymKind::Storage;
    e->kids = {std::move(slot)};
    return e;
}

SymRef sym_calldata(SymRef offset) {
    auto e = std::make_shared<SymExpr>();
    e->kind = SymKind::Calldata;
    e->kids = {std::move(offset)};
    return e;
}

SymRef sym_calldatasize() { return make(SymKind::CalldataSize); }
SymRef sym_caller() { return make(SymKind::Caller); }
SymRef sym_callvalue() { return make(SymKind::CallValue); }
SymRef sym_self_address() { return make(SymKind::SelfAddress); }
SymRef sym_unknown() { return make(SymKind::Unknown); }

SymRef sym_block(BlockFieldKind bf) {
    auto e = std::make_shared<SymExpr>();
    e->kind = SymKind::BlockField;
    e->bf = bf;
    return e;
}

SymRef sym_sha3(std::vector<SymRef> words) {
    auto e = std::make_shared<SymExpr>();
    e->kind = SymKind::Sha3;
    e->kids = std::move(words);
    return e;
}

SymRef sym_unop(Op op, SymRef a) {
    if (a->kind == SymKind::Const) {
        switch (op) {
        case Op::ISZERO: return sym_const(a->cval == 0 ? 1 : 0);
        case Op::NOT: return sym_const(~a->cval);
        default: break;
        }
    }
    auto e = std::make_shared<SymExpr>();
    e->kind = SymKind::UnOp;
    e->op = op;
    e->kids = {std::move(a)};
    return e;
}

SymRef sym_binop(Op op, SymRef top, SymRef second) {
    if (top->kind == SymKind::Const && second->kind == SymKind::Const) {
        const u256&a = top->cval, &b = second->cval;
        u256 bias = u256(1) << 255;
        switch (op) {
        case Op::ADD: return sym_const(a + b);
        case Op::SUB: return sym_const(a - b);
        case Op::MUL: return sym_const(a * b);
        case Op::DIV: return sym_const(b == 0 ? u256(0) : u256(a / b));
        case Op::MOD: return sym_const(b == 0 ? u256(0) : u256(a % b));
        case Op::AND: return sym_const(a & b);
        case Op::OR: return sym_const(a | b);
        case Op::XOR: return sym_const(a ^ b);
        case Op::LT: return sym_const(a < b ? 1 : 0);
        case Op::GT: return sym_const(a > b ? 1 : 0);
        case Op::SLT: return sym_const((a ^ bias) < (b ^ bias) ? 1 : 0);
        case Op::SGT: return sym_const((a ^ bias) > (b ^ bias) ? 1 : 0);
        case Op::EQ: return sym_const(a == b ? 1 : 0);
        case Op::SHL: return sym_const(a >= 256 ? u256(0) : u256(b << static_cast<unsigned>(a)));
        case Op::SHR: return sym_const(a >= 256 ? u256(0) : u256(b >> static_cast<unsigned>(a)));
        default: break;
        }
    }
    auto e = std::make_shared<SymExpr>();
    e->kind = SymKind::BinOp;
    e->op = op;
    e->kids = {std::move(top), std::move(second)};
    return e;
}

bool sym_equal(const SymRef& a, const SymRef& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->kind != b->kind || a->op != b->op || a->bf != b->bf || a->cval != b->cval) return false;
    if (a->kids.size() != b->kids.size()) return false;
    for (size_t i = 0; i < a->kids.size(); ++i)
        if (!sym_equal(a->kids[i], b->kids[i])) return false;
    return true;
}

std::string sym_to_string(const SymRef& e) {
    if (!e) return "<null>";
    std::ostringstream os;
    switch (e->kind) {
    case SymKind::Const: os << to_hex(e->cval); break;
    case SymKind::Storage: os << "storage[" << sym_to_string(e->kids[0]) << "]"; break;
    case SymKind::Calldata: os << "calldata[" << sym_to_string(e->kids[0]) << "]"; break;
    case SymKind::CalldataSize: os << "calldatasize"; break;
    case SymKind::Caller: os << "caller"; break;
    case SymKind::CallValue: os << "callvalue"; break;
    case SymKind::SelfAddress: os << "address"; break;
    case SymKind::BlockField:
        switch (e->bf) {
        case BlockFieldKind::Timestamp: os << "timestamp"; break;
        case BlockFieldKind::Number: os << "number"; break;
        case BlockFieldKind::Coinbase: os << "coinbase"; break;
        case BlockFieldKind::Prevrandao: os << "prevrandao"; break;
        case BlockFieldKind::Gaslimit: os << "gaslimit"; break;
        }
        break;
    case SymKind::Sha3: {
        os << "sha3(";
        for (size_t i = 0; i < e->kids.size(); ++i)
            os << (i ? ", " : "") << sym_to_string(e->kids[i]);
        os << ")";
        break;
    }
    case SymKind::UnOp:
        os << op_name(e->op) << "(" << sym_to_string(e->kids[0]) << ")";
        break;
    case SymKind::BinOp:
        os << op_name(e->op) << "(" << sym_to_string(e->kids[0]) << ", "
           << sym_to_string(e->kids[1]) << ")";
        break;
    case SymKind::Unknown: os << "?"; break;
    }
    return os.str();
}

SymRef sym_clamp_depth(const SymRef& e, int max_depth) {
    if (!e) return sym_unknown();
    if (e->depth() <= max_depth) return e;
    return sym_unknown();
}

}  // namespace sdfuzz
