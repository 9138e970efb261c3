#include "sdfuzz/targets.hpp"

#include <algorithm>
#include <deque>
#include <map>

namespace sdfuzz {

const char* bug_class_name(BugClass c) {
    switch (c) {
    case BugClass::EtherLeak: return "EtherLeak";
    case BugClass::BlockDependency: return "BlockDependency";
    case BugClass::Reentrancy: return "Reentrancy";
    case BugClass::ControlledDelegatecall: return "ControlledDelegatecall";
    case BugClass::DangerousDelegatecall: return "DangerousDelegatecall";
    case BugClass::Suicidal: return "Suicidal";
    case BugClass::LockEther: return "LockEther";
    }
    return "?";
}

std::optional<BugClass> bug_class_from_name(const std::string& name) {
    for (int i = 0; i <= static_cast<int>(BugClass::LockEther); ++i)
        if (name == bug_class_name(static_cast<BugClass>(i))) return static_cast<BugClass>(i);
    return std::nullopt;
}

namespace {

TaintVal merge_taint(const TaintVal& a, const TaintVal& b) {
    TaintVal out;
    out.bits = a.bits | b.bits;
    out.through_hash = a.through_hash || b.through_hash;
    if (a.constant && b.constant && *a.constant == *b.constant) out.constant = a.constant;
    return out;
}

void merge_fact(std::optional<TaintVal>& into, const TaintVal& v) {
    into = into ? merge_taint(*into, v) : v;
}

struct AbsState {
    std::vector<TaintVal> stack;
};

bool merge_state(AbsState& into, const AbsState& from) {
    bool changed = false;
    size_t n = std::min(into.stack.size(), from.stack.size());
    if (into.stack.size() != n) {
        into.stack.erase(into.stack.begin(),
                         into.stack.begin() + static_cast<long>(into.stack.size() - n));
        changed = true;
    }
    std::vector<TaintVal> tail(from.stack.end() - static_cast<long>(n), from.stack.end());
    for (size_t i = 0; i < n; ++i) {
        TaintVal m = merge_taint(into.stack[i], tail[i]);
        if (m.bits != into.stack[i].bits || m.through_hash != into.stack[i].through_hash ||
            m.constant.has_value() != into.stack[i].constant.has_value()) {
            into.stack[i] = m;
            changed = true;
        }
    }
    return changed;
}

struct TaintInterp {
    const Cfg& cfg;
    StaticTaint& out;

    TaintInterp(const Cfg& c, StaticTaint& o) : cfg(c), out(o) {}
    // Flow-insensitive memory: constant-offset word writes plus a catch-all
    // for writes at unknown offsets.
    std::map<u256, TaintVal> memory;
    uint8_t memory_any = 0;
    bool memory_changed = false;

    TaintVal mem_read(const TaintVal& off) {
        TaintVal v;
        v.bits = memory_any;
        if (off.constant) {
            auto it = memory.find(*off.constant);
            if (it != memory.end()) v = merge_taint(v, it->second);
        } else {
            for (auto& [o, t] : memory) v = merge_taint(v, t);
            v.constant.reset();
        }
        v.constant.reset();
        return v;
    }

    TaintVal mem_region(const TaintVal& off, const TaintVal& len) {
        TaintVal v;
        v.bits = memory_any;
        if (off.constant && len.constant && *len.constant <= 4096) {
            for (auto& [o, t] : memory)
                if (o + 32 > *off.constant && o < *off.constant + *len.constant)
                    v = merge_taint(v, t);
        } else {
            for (auto& [o, t] : memory) v = merge_taint(v, t);
        }
        v.constant.reset();
        return v;
    }

    void mem_write(const TaintVal& off, const TaintVal& val) {
        if (off.constant) {
            auto it = memory.find(*off.constant);
            TaintVal merged = it == memory.end() ? val : merge_taint(it->second, val);
            if (it == memory.end() || merged.bits != it->second.bits ||
                merged.through_hash != it->second.through_hash)
                memory_changed = true;
            memory[*off.constant] = merged;
        } else if ((memory_any | val.bits) != memory_any) {
            memory_any |= val.bits;
            memory_changed = true;
        }
    }

    AbsState run_block(const BasicBlock& blk, AbsState st) {
        auto pop = [&]() -> TaintVal {
            if (st.stack.empty()) return TaintVal{kStOther, std::nullopt, false};
            TaintVal v = st.stack.back();
            st.stack.pop_back();
            return v;
        };
        auto push = [&](TaintVal v) {
            st.stack.push_back(std::move(v));
            if (st.stack.size() > 64) st.stack.erase(st.stack.begin());
        };
        auto leaf = [](uint8_t bits) { return TaintVal{bits, std::nullopt, false}; };

        for (const Instruction& ins : blk.instructions) {
            InstructionFacts& f = out.facts[ins.pc];
            Op op = ins.op;
            if (is_push(op)) {
                push(TaintVal{0, ins.push_value(), false});
            } else if (is_dup(op)) {
                int n = dup_depth(op);
                if (static_cast<int>(st.stack.size()) >= n)
                    push(st.stack[st.stack.size() - static_cast<size_t>(n)]);
                else
                    push(leaf(kStOther));
            } else if (is_swap(op)) {
                int n = swap_depth(op);
                while (static_cast<int>(st.stack.size()) < n + 1)
                    st.stack.insert(st.stack.begin(), leaf(kStOther));
                std::swap(st.stack.back(), st.stack[st.stack.size() - 1 - static_cast<size_t>(n)]);
            } else if (is_log(op)) {
                auto [pops, pushes] = stack_arity(op);
                for (int i = 0; i < pops; ++i) pop();
            } else {
                switch (op) {
                case Op::ADD:
                case Op::MUL:
                case Op::SUB:
                case Op::DIV:
                case Op::MOD:
                case Op::AND:
                case Op::OR:
                case Op::XOR:
                case Op::LT:
                case Op::GT:
                case Op::SLT:
                case Op::SGT:
                case Op::EQ:
                case Op::SHL:
                case Op::SHR: {
                    TaintVal a = pop(), b = pop();
                    TaintVal r = merge_taint(a, b);
                    r.constant.reset();
                    if (a.constant && b.constant) {
                        const u256&x = *a.constant, &y = *b.constant;
                        switch (op) {
                        case Op::ADD: r.constant = x + y; break;
                        case Op::SUB: r.constant = x - y; break;
                        case Op::MUL: r.constant = x * y; break;
                        case Op::DIV: r.constant = y == 0 ? u256(0) : u256(x / y); break;
                        case Op::MOD: r.constant = y == 0 ? u256(0) : u256(x % y); break;
                        case Op::AND: r.constant = x & y; break;
                        case Op::OR: r.constant = x | y; break;
                        case Op::XOR: r.constant = x ^ y; break;
                        case Op::LT: r.constant = u256(x < y ? 1 : 0); break;
                        case Op::GT: r.constant = u256(x > y ? 1 : 0); break;
                        case Op::EQ: r.constant = u256(x == y ? 1 : 0); break;
                        case Op::SHL:
                            r.constant = x >= 256 ? u256(0) : u256(y << static_cast<unsigned>(x));
                            break;
                        case Op::SHR:
                            r.constant = x >= 256 ? u256(0) : u256(y >> static_cast<unsigned>(x));
                            break;
                        default: break;
                        }
                    }
                    push(r);
                    break;
                }
                case Op::ISZERO:
                case Op::NOT: {
                    TaintVal a = pop();
                    if (a.constant)
                        a.constant = op == Op::ISZERO ? u256(*a.constant == 0 ? 1 : 0)
                                                      : u256(~*a.constant);
                    push(a);
                    break;
                }
                case Op::SHA3: {
                    TaintVal off = pop(), len = pop();
                    TaintVal r = mem_region(off, len);
                    r.through_hash = true;
                    push(r);
                    break;
                }
                case Op::ADDRESS: push(leaf(kStOther)); break;
                case Op::BALANCE: pop(); push(leaf(kStOther)); break;
                case Op::CALLER: push(leaf(kStCaller)); break;
                case Op::CALLVALUE: push(leaf(kStCallValue)); break;
                case Op::CALLDATALOAD: pop(); push(leaf(kStCalldata)); break;
                case Op::CALLDATASIZE: push(leaf(kStCalldata)); break;
                case Op::CALLDATACOPY: {
                    TaintVal dst = pop();
                    pop();
                    pop();
                    mem_write(dst, leaf(kStCalldata));
                    break;
                }
                case Op::COINBASE:
                case Op::TIMESTAMP:
                case Op::NUMBER:
                case Op::PREVRANDAO:
                case Op::GASLIMIT: push(leaf(kStBlock)); break;
                case Op::POP: pop(); break;
                case Op::MLOAD: {
                    TaintVal off = pop();
                    push(mem_read(off));
                    break;
                }
                case Op::MSTORE:
                case Op::MSTORE8: {
                    TaintVal off = pop(), val = pop();
                    mem_write(off, val);
                    break;
                }
                case Op::SLOAD: {
                    TaintVal slot = pop();
                    merge_fact(f.slot, slot);
                    TaintVal r = leaf(kStStorage);
                    r.through_hash = slot.through_hash;
                    push(r);
                    break;
                }
                case Op::SSTORE: {
                    TaintVal slot = pop();
                    pop();
                    merge_fact(f.slot, slot);
                    break;
                }
                case Op::JUMP: pop(); break;
                case Op::JUMPI: {
                    pop();
                    TaintVal cond = pop();
                    merge_fact(f.condition, cond);
                    break;
                }
                case Op::CALL:
                case Op::DELEGATECALL:
                case Op::STATICCALL: {
                    TaintVal gas = pop(), target = pop();
                    TaintVal value{0, u256(0), false};
                    if (op == Op::CALL) value = pop();
                    TaintVal in_off = pop(), in_len = pop();
                    pop();
                    pop();
                    merge_fact(f.call_target, target);
                    merge_fact(f.call_value, value);
                    merge_fact(f.call_gas, gas);
                    merge_fact(f.call_args, mem_region(in_off, in_len));
                    push(leaf(kStOther));
                    break;
                }
                case Op::SELFDESTRUCT: pop(); break;
                case Op::STOP:
                case Op::JUMPDEST:
                case Op::INVALID: break;
                case Op::RETURN:
                case Op::REVERT:
                    pop();
                    pop();
                    break;
                default: break;
                }
            }
        }
        return st;
    }
};

}  // namespace

StaticTaint analyze_taint(const Cfg& cfg) {
    StaticTaint out;
    TaintInterp interp{cfg, out};

    std::unordered_map<int, AbsState> in_state;
    std::unordered_map<int, int> visits;
    const int kMaxVisits = 32;

    std::deque<int> work{cfg.entry};
    in_state[cfg.entry] = {};
    while (!work.empty()) {
        int id = work.front();
        work.pop_front();
        const BasicBlock& blk = cfg.block(id);
        if (blk.role != BlockRole::Code) continue;
        if (++visits[id] > kMaxVisits) continue;
        interp.memory_changed = false;
        AbsState st = interp.run_block(blk, in_state[id]);
        if (interp.memory_changed) {
            // Memory is flow-insensitive: a new write can affect every block.
            for (auto& [bid, count] : visits) count = 0;
        }
        for (auto [succ, kind] : blk.successors) {
            auto it = in_state.find(succ);
            if (it == in_state.end()) {
                in_state[succ] = st;
                work.push_back(succ);
            } else if (merge_state(it->second, st) || interp.memory_changed) {
                work.push_back(succ);
            }
        }
    }
    return out;
}

namespace {

// Reflexive-transitive reachability over block ids.
std::vector<std::vector<bool>> reachability(const Cfg& cfg) {
    size_t n = cfg.blocks.size();
    std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
    for (const auto& b : cfg.blocks) {
        std::deque<int> work{b.id};
        reach[static_cast<size_t>(b.id)][static_cast<size_t>(b.id)] = true;
        while (!work.empty()) {
            int id = work.front();
            work.pop_front();
            for (auto [succ, kind] : cfg.block(id).successors)
                if (!reach[static_cast<size_t>(b.id)][static_cast<size_t>(succ)]) {
                    reach[static_cast<size_t>(b.id)][static_cast<size_t>(succ)] = true;
                    work.push_back(succ);
                }
        }
    }
    return reach;
}

struct Site {
    int block;
    uint32_t pc;
    TaintVal fact;
};

bool slots_match(const TaintVal& a, const TaintVal& b) {
    if (a.constant && b.constant) return *a.constant == *b.constant;
    if (a.constant || b.constant) return false;
    return a.bits == b.bits && a.through_hash == b.through_hash;
}

bool value_bearing(const std::optional<TaintVal>& v) {
    if (!v) return false;
    if (v->constant) return *v->constant > 0;
    return true;  // statically unknown value: assume it may carry wei
}

}  // namespace

std::vector<CodeTarget> find_code_targets(const Cfg& cfg, const AbiDescriptor& abi) {
    StaticTaint taint = analyze_taint(cfg);
    auto reach = reachability(cfg);
    auto idom = dominator_tree(cfg);

    auto facts_of = [&](uint32_t pc) -> const InstructionFacts* {
        auto it = taint.facts.find(pc);
        return it == taint.facts.end() ? nullptr : &it->second;
    };

    // Collect instruction sites per role.
    std::vector<Site> sloads, sstores, selfdestructs;
    std::vector<Site> calls_hazard_target;  // CALL, forwarded gas, non-constant target
    std::vector<Site> value_sends;          // value-bearing CALL or SELFDESTRUCT
    std::vector<Site> delegatecalls;
    std::vector<int> caller_guard_blocks;        // caller-derived JUMPI condition
    std::vector<int> caller_indexed_check_blocks;  // SLOAD(caller-keyed) feeding a JUMPI
    bool any_selfdestruct = false;
    bool any_value_call = false;

    for (const auto& blk : cfg.blocks) {
        if (blk.role != BlockRole::Code || blk.dead) continue;
        bool block_has_caller_keyed_sload = false;
        for (const Instruction& ins : blk.instructions) {
            const InstructionFacts* f = facts_of(ins.pc);
            switch (ins.op) {
            case Op::SLOAD:
                if (f && f->slot) {
                    sloads.push_back({blk.id, ins.pc, *f->slot});
                    if (f->slot->bits & kStCaller) block_has_caller_keyed_sload = true;
                }
                break;
            case Op::SSTORE:
                if (f && f->slot) sstores.push_back({blk.id, ins.pc, *f->slot});
                break;
            case Op::SELFDESTRUCT:
                any_selfdestruct = true;
                selfdestructs.push_back({blk.id, ins.pc, TaintVal{}});
                value_sends.push_back({blk.id, ins.pc, TaintVal{}});
                break;
            case Op::CALL: {
                if (!f) break;
                bool value = value_bearing(f->call_value);
                if (value) {
                    any_value_call = true;
                    value_sends.push_back({blk.id, ins.pc, f->call_target.value_or(TaintVal{})});
                }
                bool gas_fwd = !f->call_gas || !f->call_gas->constant ||
                               *f->call_gas->constant > 2300;
                bool target_unknown = !f->call_target || !f->call_target->constant;
                if (gas_fwd && target_unknown)
                    calls_hazard_target.push_back({blk.id, ins.pc, f->call_target.value_or(TaintVal{})});
                break;
            }
            case Op::DELEGATECALL:
                if (f) delegatecalls.push_back({blk.id, ins.pc, f->call_target.value_or(TaintVal{})});
                break;
            case Op::JUMPI:
                if (f && f->condition) {
                    if (f->condition->bits & kStCaller) caller_guard_blocks.push_back(blk.id);
                    if ((f->condition->bits & kStStorage) && block_has_caller_keyed_sload)
                        caller_indexed_check_blocks.push_back(blk.id);
                }
                break;
            default:
                break;
            }
        }
    }

    auto before = [&](const Site& a, const Site& b) {
        if (a.block == b.block) return a.pc < b.pc;
        return static_cast<bool>(reach[static_cast<size_t>(a.block)][static_cast<size_t>(b.block)]);
    };

    std::vector<CodeTarget> targets;

    // Reentrancy: SLOAD(s) -> external CALL (gas, unresolved target) -> SSTORE(s).
    for (const Site& call : calls_hazard_target) {
        for (const Site& rd : sloads) {
            if (!before(rd, call)) continue;
            bool matched = false;
            for (const Site& wr : sstores) {
                if (!before(call, wr)) continue;
                if (!slots_match(rd.fact, wr.fact)) continue;
                CodeTarget t;
                t.block_id = call.block;
                t.bug_class = BugClass::Reentrancy;
                t.anchor_pc = call.pc;
                t.evidence = {{rd.pc, "read"}, {call.pc, "call"}, {wr.pc, "write"}};
                targets.push_back(t);
                matched = true;
                break;
            }
            if (matched) break;
        }
    }

    // ControlledDelegatecall / DangerousDelegatecall.
    for (const Site& dc : delegatecalls) {
        const InstructionFacts* f = facts_of(dc.pc);
        if (!f) continue;
        if (f->call_target && (f->call_target->bits & kStCalldata)) {
            CodeTarget t;
            t.block_id = dc.block;
            t.bug_class = BugClass::ControlledDelegatecall;
            t.anchor_pc = dc.pc;
            t.evidence = {{dc.pc, "delegatecall-target"}};
            targets.push_back(t);
        }
        if (f->call_args && (f->call_args->bits & kStCalldata)) {
            CodeTarget t;
            t.block_id = dc.block;
            t.bug_class = BugClass::DangerousDelegatecall;
            t.anchor_pc = dc.pc;
            t.evidence = {{dc.pc, "delegatecall-args"}};
            targets.push_back(t);
        }
    }

    // BlockDependency: block-data JUMPI with a value send reachable on a branch.
    for (const auto& blk : cfg.blocks) {
        if (blk.role != BlockRole::Code || blk.dead || !blk.ends_with(Op::JUMPI)) continue;
        const InstructionFacts* f = facts_of(blk.end_pc);
        if (!f || !f->condition || !(f->condition->bits & kStBlock)) continue;
        for (const Site& send : value_sends) {
            bool reachable = false;
            for (auto [succ, kind] : blk.successors)
                if (reach[static_cast<size_t>(succ)][static_cast<size_t>(send.block)])
                    reachable = true;
            if (!reachable) continue;
            CodeTarget t;
            t.block_id = blk.id;
            t.bug_class = BugClass::BlockDependency;
            t.anchor_pc = blk.end_pc;
            t.evidence = {{blk.end_pc, "branch"}, {send.pc, "send"}};
            targets.push_back(t);
            break;
        }
    }

    // Suicidal: SELFDESTRUCT not dominated by a caller-derived guard.
    for (const Site& sd : selfdestructs) {
        bool guarded = false;
        for (int guard : caller_guard_blocks)
            if (guard != sd.block && dominates(idom, guard, sd.block, cfg.entry)) guarded = true;
        if (guarded) continue;
        CodeTarget t;
        t.block_id = sd.block;
        t.bug_class = BugClass::Suicidal;
        t.anchor_pc = sd.pc;
        t.evidence = {{sd.pc, "selfdestruct"}};
        targets.push_back(t);
    }

    // EtherLeak: value-bearing CALL to a caller/calldata-derived beneficiary,
    // no caller-indexed balance check dominating it, value independent of the
    // transaction's own deposit.
    for (const Site& send : value_sends) {
        const InstructionFacts* f = facts_of(send.pc);
        if (!f || !f->call_target) continue;  // selfdestruct sites carry no facts
        if (!(f->call_target->bits & (kStCaller | kStCalldata))) continue;
        if (f->call_value && (f->call_value->bits & kStCallValue)) continue;
        bool checked = false;
        for (int guard : caller_indexed_check_blocks)
            if (guard != send.block && dominates(idom, guard, send.block, cfg.entry)) checked = true;
        if (checked) continue;
        CodeTarget t;
        t.block_id = send.block;
        t.bug_class = BugClass::EtherLeak;
        t.anchor_pc = send.pc;
        t.evidence = {{send.pc, "send"}};
        targets.push_back(t);
    }

    // LockEther: value can enter but no opcode path can ever send it out.
    bool any_payable = std::any_of(abi.functions.begin(), abi.functions.end(),
                                   [](const AbiFunction& fn) { return fn.payable; });
    if (any_payable && !any_selfdestruct && !any_value_call) {
        CodeTarget t;
        t.block_id = cfg.entry;
        t.bug_class = BugClass::LockEther;
        t.anchor_pc = cfg.block(cfg.entry).start_pc;
        t.whole_contract = true;
        targets.push_back(t);
    }

    std::sort(targets.begin(), targets.end(), [](const CodeTarget& a, const CodeTarget& b) {
        if (a.bug_class != b.bug_class) return a.bug_class < b.bug_class;
        if (a.anchor_pc != b.anchor_pc) return a.anchor_pc < b.anchor_pc;
        return a.block_id < b.block_id;
    });
    // One target per (class, anchor).
    targets.erase(std::unique(targets.begin(), targets.end(),
                              [](const CodeTarget& a, const CodeTarget& b) {
                                  return a.bug_class == b.bug_class && a.anchor_pc == b.anchor_pc;
                              }),
                  targets.end());
    return targets;
}

}  // namespace sdfuzz
