#include "sdfuzz/backward.hpp"

#include <algorithm>
#include <cassert>
#include <memory>

namespace sdfuzz {

std::vector<Path> find_paths(const Cfg& unrolled, const std::vector<int>& target_blocks,
                             size_t limit, bool* truncated) {
    if (truncated) *truncated = false;
    std::vector<bool> is_target(unrolled.blocks.size(), false);
    for (int t : target_blocks)
        if (t >= 0 && static_cast<size_t>(t) < unrolled.blocks.size())
            is_target[static_cast<size_t>(t)] = true;

    std::vector<Path> out;
    std::vector<int> blocks{unrolled.entry};
    struct Frame {
        int block;
        size_t next_edge;
    };
    std::vector<Frame> stack{{unrolled.entry, 0}};

    auto emit = [&]() {
        Path p;
        p.blocks = blocks;
        for (size_t i = 0; i + 1 < p.blocks.size(); ++i) {
            const BasicBlock& b = unrolled.block(p.blocks[i]);
            if (!b.ends_with(Op::JUMPI)) continue;
            for (auto [succ, kind] : b.successors) {
                if (succ != p.blocks[i + 1]) continue;
                if (kind == EdgeKind::BranchTrue || kind == EdgeKind::BranchFalse) {
                    p.branch_points.push_back({i, b.id, kind == EdgeKind::BranchTrue});
                    break;
                }
            }
        }
        out.push_back(std::move(p));
    };

    if (is_target[static_cast<size_t>(unrolled.entry)]) emit();
    while (!stack.empty()) {
        if (out.size() >= limit) {
            if (truncated) *truncated = true;
            break;
        }
        Frame& f = stack.back();
        const auto& succs = unrolled.block(f.block).successors;
        if (f.next_edge >= succs.size()) {
            stack.pop_back();
            blocks.pop_back();
            continue;
        }
        int next = succs[f.next_edge++].first;
        blocks.push_back(next);
        stack.push_back({next, 0});
        if (is_target[static_cast<size_t>(next)]) emit();
    }
    return out;
}

// ---------------------------------------------------------------------------
// Backward stack reconstruction

namespace {

struct BCell;
using Cell = std::shared_ptr<BCell>;

struct BCell {
    enum class Def { None, Expr, MemRead, StorageRead, Sha3 };
    Def def = Def::None;
    Cell alias;  // set by DUP unification

    // Def::Expr
    SymKind kind = SymKind::Unknown;
    u256 cval = 0;
    Op op = Op::INVALID;
    BlockFieldKind bf = BlockFieldKind::Timestamp;
    std::vector<Cell> kids;

    // Def::MemRead / StorageRead / Sha3 (addr/len are operand cells)
    int pos = 0;
    Cell addr;
    Cell len;

    // materialization memo
    SymRef memo;
    bool visiting = false;
};

struct StoreEvent {
    enum class Kind { MemWord, MemByte, CalldataCopy, CallClobber, StorageWord };
    Kind kind;
    int pos;
    Cell addr;   // destination offset / storage key
    Cell value;  // stored value (MemWord/StorageWord)
    Cell src;    // CalldataCopy source offset
    Cell len;    // CalldataCopy / CallClobber length
};

struct Walker {
    std::vector<StoreEvent> stores;  // collected in reverse walk order
    int depth_cap;

    Cell fresh() { return std::make_shared<BCell>(); }

    static Cell resolve(Cell c) {
        while (c->alias) c = c->alias;
        return c;
    }

    void bind_expr(const Cell& raw, SymKind kind, std::vector<Cell> kids = {}, u256 cval = 0,
                   Op op = Op::INVALID, BlockFieldKind bf = BlockFieldKind::Timestamp) {
        Cell c = resolve(raw);
        if (c->def != BCell::Def::None) return;  // already produced elsewhere
        c->def = BCell::Def::Expr;
        c->kind = kind;
        c->kids = std::move(kids);
        c->cval = cval;
        c->op = op;
        c->bf = bf;
    }

    void bind_read(const Cell& raw, BCell::Def def, int pos, Cell addr, Cell len = nullptr) {
        Cell c = resolve(raw);
        if (c->def != BCell::Def::None) return;
        c->def = def;
        c->pos = pos;
        c->addr = std::move(addr);
        c->len = std::move(len);
    }

    // --- materialization ------------------------------------------------

    SymRef materialize(const Cell& raw) {
        Cell c = resolve(raw);
        if (c->memo) return c->memo;
        if (c->visiting) return sym_unknown();
        c->visiting = true;
        SymRef r;
        switch (c->def) {
        case BCell::Def::None:
            r = sym_unknown();
            break;
        case BCell::Def::Expr:
            r = materialize_expr(*c);
            break;
        case BCell::Def::MemRead:
            r = resolve_mem_word(c->pos, c->addr);
            break;
        case BCell::Def::StorageRead:
            r = resolve_storage_word(c->pos, c->addr);
            break;
        case BCell::Def::Sha3:
            r = resolve_sha3(*c);
            break;
        }
        c->visiting = false;
        r = sym_clamp_depth(r, depth_cap);
        c->memo = r;
        return r;
    }

    SymRef materialize_expr(const BCell& c) {
        switch (c.kind) {
        case SymKind::Const: return sym_const(c.cval);
        case SymKind::Caller: return sym_caller();
        case SymKind::CallValue: return sym_callvalue();
        case SymKind::CalldataSize: return sym_calldatasize();
        case SymKind::SelfAddress: return sym_self_address();
        case SymKind::BlockField: return sym_block(c.bf);
        case SymKind::Calldata: return sym_calldata(materialize(c.kids[0]));
        case SymKind::Storage: return sym_storage(materialize(c.kids[0]));
        case SymKind::UnOp: return sym_unop(c.op, materialize(c.kids[0]));
        case SymKind::BinOp:
            return sym_binop(c.op, materialize(c.kids[0]), materialize(c.kids[1]));
        default: return sym_unknown();
        }
    }

    std::optional<u256> const_of(const Cell& cell) {
        SymRef e = materialize(cell);
        if (e->kind == SymKind::Const) return e->cval;
        return std::nullopt;
    }

    // Resolve a 32-byte memory read at exec position `pos` against earlier
    // stores. Unmatched constant offsets read the zero-initialized memory.
    SymRef resolve_mem_word(int pos, const Cell& addr_cell) {
        auto addr = const_of(addr_cell);
        if (!addr) return sym_unknown();
        return resolve_mem_word_at(pos, *addr);
    }

    // Stores were appended during the backward walk, so the vector is ordered
    // by decreasing exec position: scanning forward visits the nearest
    // earlier store first.
    SymRef resolve_mem_word_at(int pos, const u256& addr) {
        for (const StoreEvent& st : stores) {
            if (st.pos >= pos) continue;  // not executed before this read
            switch (st.kind) {
            case StoreEvent::Kind::MemWord: {
                auto s = const_of(st.addr);
                if (!s) return sym_unknown();
                if (*s == addr) return materialize(st.value);
                u256 d = *s > addr ? u256(*s - addr) : u256(addr - *s);
                if (d < 32) return sym_unknown();  // partial overlap
                break;
            }
            case StoreEvent::Kind::MemByte: {
                auto s = const_of(st.addr);
                if (!s) return sym_unknown();
                if (*s >= addr && *s < addr + 32) return sym_unknown();
                break;
            }
            case StoreEvent::Kind::CalldataCopy: {
                auto d = const_of(st.addr);
                auto l = const_of(st.len);
                if (!d || !l) return sym_unknown();
                if (*l == 0) break;
                bool disjoint = addr + 32 <= *d || addr >= *d + *l;
                if (disjoint) break;
                bool covered = addr >= *d && addr + 32 <= *d + *l;
                auto src = const_of(st.src);
                if (covered && src) return sym_calldata(sym_const(*src + (addr - *d)));
                return sym_unknown();
            }
            case StoreEvent::Kind::CallClobber: {
                auto l = const_of(st.len);
                if (l && *l == 0) break;
                auto d = const_of(st.addr);
                if (l && d && (addr + 32 <= *d || addr >= *d + *l)) break;
                return sym_unknown();
            }
            case StoreEvent::Kind::StorageWord:
                break;
            }
        }
        return sym_const(0);  // memory starts zeroed
    }

    SymRef resolve_storage_word(int pos, const Cell& slot_cell) {
        SymRef slot = materialize(slot_cell);
        if (slot->kind != SymKind::Const) return sym_storage(slot);
        const u256& key = slot->cval;
        for (const StoreEvent& st : stores) {
            if (st.pos >= pos || st.kind != StoreEvent::Kind::StorageWord) continue;
            auto k = const_of(st.addr);
            if (!k) return sym_unknown();  // could alias
            if (*k == key) return materialize(st.value);
        }
        return sym_storage(slot);  // value at transaction entry
    }

    SymRef resolve_sha3(const BCell& c) {
        auto off = const_of(c.addr);
        auto len = const_of(c.len);
        if (!off || !len || *off > (u256(1) << 20) || *len > 512 || *len % 32 != 0)
            return sym_unknown();
        std::vector<SymRef> words;
        for (u256 o = *off; o < *off + *len; o += 32) {
            SymRef w = resolve_mem_word_at(c.pos, o);
            if (w->kind == SymKind::Unknown) return sym_unknown();
            words.push_back(w);
        }
        return sym_sha3(std::move(words));
    }
};

}  // namespace

BranchConstraint backward_branch_constraints(const Cfg& unrolled, const Path& path,
                                             size_t branch_index, int depth_cap) {
    const auto& bp = path.branch_points.at(branch_index);

    // Flatten the instructions executed from entry up to and including the
    // branch point's JUMPI.
    std::vector<const Instruction*> instrs;
    for (size_t i = 0; i <= bp.block_index; ++i)
        for (const Instruction& ins : unrolled.block(path.blocks[i]).instructions)
            instrs.push_back(&ins);
    assert(!instrs.empty() && instrs.back()->op == Op::JUMPI);

    Walker w;
    w.depth_cap = depth_cap;

    // Stack model: back() is the top. Seed with the JUMPI operands.
    std::vector<Cell> stack;
    Cell cond = w.fresh();
    Cell dst = w.fresh();
    stack.push_back(cond);
    stack.push_back(dst);  // dst on top, popped first by JUMPI

    auto ensure = [&](size_t n) {
        while (stack.size() < n) stack.insert(stack.begin(), w.fresh());
    };
    auto take_top = [&]() {
        Cell c = stack.back();
        stack.pop_back();
        return c;
    };
    // After inverting an instruction, its operands reappear: first-popped on top.
    auto push_operands = [&](std::initializer_list<Cell*> ops) {
        for (auto it = std::rbegin(ops); it != std::rend(ops); ++it) {
            **it = w.fresh();
            stack.push_back(**it);
        }
    };

    for (int pos = static_cast<int>(instrs.size()) - 2; pos >= 0; --pos) {
        const Instruction& ins = *instrs[pos];
        Op op = ins.op;

        if (is_push(op)) {
            ensure(1);
            w.bind_expr(take_top(), SymKind::Const, {}, ins.push_value());
            continue;
        }
        if (is_dup(op)) {
            size_t n = static_cast<size_t>(dup_depth(op));
            ensure(n + 1);
            Cell copy = Walker::resolve(take_top());
            Cell orig = Walker::resolve(stack[stack.size() - n]);
            if (copy != orig && copy->def == BCell::Def::None && !copy->alias) copy->alias = orig;
            continue;
        }
        if (is_swap(op)) {
            size_t n = static_cast<size_t>(swap_depth(op));
            ensure(n + 1);
            std::swap(stack.back(), stack[stack.size() - 1 - n]);
            continue;
        }
        if (is_log(op)) {
            for (int i = 0; i < 2 + log_topics(op); ++i) stack.push_back(w.fresh());
            continue;
        }

        switch (op) {
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
        case Op::SHR: {
            ensure(1);
            Cell result = take_top();
            Cell a, b;  // a popped first (top operand)
            push_operands({&a, &b});
            w.bind_expr(result, SymKind::BinOp, {a, b}, 0, op);
            break;
        }
        case Op::ISZERO:
        case Op::NOT: {
            ensure(1);
            Cell result = take_top();
            Cell a;
            push_operands({&a});
            w.bind_expr(result, SymKind::UnOp, {a}, 0, op);
            break;
        }
        case Op::SHA3: {
            ensure(1);
            Cell result = take_top();
            Cell off, len;
            push_operands({&off, &len});
            w.bind_read(result, BCell::Def::Sha3, pos, off, len);
            break;
        }
        case Op::ADDRESS: ensure(1); w.bind_expr(take_top(), SymKind::SelfAddress); break;
        case Op::CALLER: ensure(1); w.bind_expr(take_top(), SymKind::Caller); break;
        case Op::CALLVALUE: ensure(1); w.bind_expr(take_top(), SymKind::CallValue); break;
        case Op::CALLDATASIZE: ensure(1); w.bind_expr(take_top(), SymKind::CalldataSize); break;
        case Op::COINBASE:
        case Op::TIMESTAMP:
        case Op::NUMBER:
        case Op::PREVRANDAO:
        case Op::GASLIMIT: {
            ensure(1);
            BlockFieldKind bf = BlockFieldKind::Timestamp;
            if (op == Op::NUMBER) bf = BlockFieldKind::Number;
            if (op == Op::COINBASE) bf = BlockFieldKind::Coinbase;
            if (op == Op::PREVRANDAO) bf = BlockFieldKind::Prevrandao;
            if (op == Op::GASLIMIT) bf = BlockFieldKind::Gaslimit;
            w.bind_expr(take_top(), SymKind::BlockField, {}, 0, Op::INVALID, bf);
            break;
        }
        case Op::BALANCE: {
            ensure(1);
            Cell result = take_top();
            Cell a;
            push_operands({&a});
            w.bind_expr(result, SymKind::Unknown);
            break;
        }
        case Op::CALLDATALOAD: {
            ensure(1);
            Cell result = take_top();
            Cell off;
            push_operands({&off});
            w.bind_expr(result, SymKind::Calldata, {off});
            break;
        }
        case Op::MLOAD: {
            ensure(1);
            Cell result = take_top();
            Cell off;
            push_operands({&off});
            w.bind_read(result, BCell::Def::MemRead, pos, off);
            break;
        }
        case Op::MSTORE:
        case Op::MSTORE8: {
            Cell off, val;
            push_operands({&off, &val});
            w.stores.push_back({op == Op::MSTORE ? StoreEvent::Kind::MemWord
                                                 : StoreEvent::Kind::MemByte,
                                pos, off, val, nullptr, nullptr});
            break;
        }
        case Op::CALLDATACOPY: {
            Cell dst_off, src_off, len;
            push_operands({&dst_off, &src_off, &len});
            w.stores.push_back(
                {StoreEvent::Kind::CalldataCopy, pos, dst_off, nullptr, src_off, len});
            break;
        }
        case Op::SLOAD: {
            ensure(1);
            Cell result = take_top();
            Cell slot;
            push_operands({&slot});
            w.bind_read(result, BCell::Def::StorageRead, pos, slot);
            break;
        }
        case Op::SSTORE: {
            Cell slot, val;
            push_operands({&slot, &val});
            w.stores.push_back({StoreEvent::Kind::StorageWord, pos, slot, val, nullptr, nullptr});
            break;
        }
        case Op::POP: {
            Cell v;
            push_operands({&v});
            break;
        }
        case Op::JUMP: {
            Cell d;
            push_operands({&d});
            break;
        }
        case Op::JUMPI: {
            Cell d, c;
            push_operands({&d, &c});
            break;
        }
        case Op::CALL:
        case Op::DELEGATECALL:
        case Op::STATICCALL: {
            ensure(1);
            Cell result = take_top();
            w.bind_expr(result, SymKind::Unknown);
            Cell gas, to, value, in_off, in_len, out_off, out_len;
            if (op == Op::CALL)
                push_operands({&gas, &to, &value, &in_off, &in_len, &out_off, &out_len});
            else
                push_operands({&gas, &to, &in_off, &in_len, &out_off, &out_len});
            w.stores.push_back(
                {StoreEvent::Kind::CallClobber, pos, out_off, nullptr, nullptr, out_len});
            break;
        }
        case Op::JUMPDEST:
        case Op::STOP:
        case Op::INVALID:
            break;
        case Op::RETURN:
        case Op::REVERT: {
            Cell a, b;
            push_operands({&a, &b});
            break;
        }
        case Op::SELFDESTRUCT: {
            Cell a;
            push_operands({&a});
            break;
        }
        default:
            break;
        }
    }

    BranchConstraint bc;
    bc.cond = w.materialize(cond);
    bc.expect_nonzero = bp.direction;
    return bc;
}

}  // namespace sdfuzz
