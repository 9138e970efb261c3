#include "sdfuzz/vm.hpp"

#include <algorithm>

namespace sdfuzz {

const char* halt_reason_name(HaltReason r) {
    switch (r) {
    case HaltReason::Stop: return "stop";
    case HaltReason::Return: return "return";
    case HaltReason::Revert: return "revert";
    case HaltReason::InvalidJump: return "invalid-jump";
    case HaltReason::StackUnderflow: return "stack-underflow";
    case HaltReason::StackOverflow: return "stack-overflow";
    case HaltReason::BudgetExhausted: return "budget-exhausted";
    case HaltReason::InvalidOpcode: return "invalid-opcode";
    case HaltReason::MemoryLimit: return "memory-limit";
    case HaltReason::SelfDestructed: return "selfdestruct";
    }
    return "?";
}

const char* value_class_name(ValueClass c) {
    switch (c) {
    case ValueClass::Constant: return "constant";
    case ValueClass::CalldataDerived: return "calldata-derived";
    case ValueClass::StorageDerived: return "storage-derived";
    case ValueClass::CallerDerived: return "caller-derived";
    case ValueClass::BlockDerived: return "blockdata-derived";
    case ValueClass::Other: return "other";
    }
    return "?";
}

namespace {

constexpr size_t kStackLimit = 1024;
constexpr size_t kMemoryLimit = 1 << 20;  // 1 MiB per frame

// Taint bits carried with every stack cell and memory byte.
enum : uint8_t {
    kTaintCalldata = 1,
    kTaintStorage = 2,
    kTaintCaller = 4,
    kTaintCallValue = 8,
    kTaintBlock = 16,
    kTaintOther = 32,
};

ValueClass classify(uint8_t taint) {
    if (taint == 0) return ValueClass::Constant;
    if (taint & kTaintCalldata) return ValueClass::CalldataDerived;
    if (taint & kTaintCaller) return ValueClass::CallerDerived;
    if (taint & kTaintStorage) return ValueClass::StorageDerived;
    if (taint & kTaintBlock) return ValueClass::BlockDerived;
    return ValueClass::Other;
}

struct Cell {
    u256 v;
    uint8_t taint = 0;
};

struct Memory {
    bytes data;
    bytes taint;

    bool grow(const u256& off, const u256& len) {
        if (len == 0) return true;
        if (off > kMemoryLimit || len > kMemoryLimit) return false;
        size_t end = static_cast<size_t>(off) + static_cast<size_t>(len);
        if (end > kMemoryLimit) return false;
        if (end > data.size()) {
            data.resize(end, 0);
            taint.resize(end, 0);
        }
        return true;
    }
};

Address address_of_counter(uint64_t counter) {
    return u256(counter);
}

struct Machine {
    WorldState& world;
    Address contract;
    const Transaction& tx;
    const VmOptions& opt;
    ExecutionTrace& trace;
    BlockEnv env;

    Machine(WorldState& w, const Address& c, const Transaction& t, const VmOptions& o,
            ExecutionTrace& tr, const BlockEnv& e)
        : world(w), contract(c), tx(t), opt(o), trace(tr), env(e) {}
    uint64_t steps = 0;
    uint64_t seq = 0;
    bool reentry_used = false;
    std::set<u256> touched_slots;

    // Runs one call frame; returns false when the frame reverted/failed.
    bool run_frame(const bytes& code, const Address& sender, const u256& value,
                   const bytes& calldata, int depth, HaltReason& reason);

    HaltReason run_tx() {
        auto it = world.deployed.find(contract);
        if (it == world.deployed.end()) return HaltReason::InvalidOpcode;
        HaltReason reason = HaltReason::Stop;
        run_frame(it->second, tx.sender, tx.value, tx.full_calldata(), 0, reason);
        return reason;
    }
};

bool Machine::run_frame(const bytes& code, const Address& sender, const u256& value,
                        const bytes& calldata, int depth, HaltReason& reason) {
    // Storage/balance snapshot for frame-local revert.
    auto storage_snapshot = world.storage;
    auto balance_snapshot = world.balances;

    if (value > 0) {
        if (world.balance_of(sender) < value) {
            reason = HaltReason::Revert;
            return false;
        }
        world.balances[sender] -= value;
        world.balances[contract] += value;
    }

    std::vector<Cell> stack;
    Memory mem;
    size_t ip = 0;  // instruction index
    auto instructions = disassemble(code);
    std::unordered_map<uint32_t, size_t> at_pc;
    for (size_t i = 0; i < instructions.size(); ++i) at_pc[instructions[i].pc] = i;

    auto fail = [&](HaltReason r) {
        world.storage = storage_snapshot;
        world.balances = balance_snapshot;
        reason = r;
        return false;
    };

    auto note_block = [&](uint32_t pc) {
        if (!opt.cfg) return;
        auto it = opt.cfg->block_at_start.find(pc);
        if (it != opt.cfg->block_at_start.end()) trace.executed_blocks.push_back(it->second);
    };
    if (!instructions.empty()) note_block(instructions[0].pc);

    auto pop = [&]() -> Cell {
        Cell c = stack.back();
        stack.pop_back();
        return c;
    };
    auto push = [&](const u256& v, uint8_t taint) { stack.push_back({v, taint}); };

    while (ip < instructions.size()) {
        const Instruction& ins = instructions[ip];
        if (++steps > opt.budget.max_steps) return fail(HaltReason::BudgetExhausted);
        trace.steps = steps;

        auto [pops, pushes] = stack_arity(ins.op);
        if (stack.size() < static_cast<size_t>(pops)) return fail(HaltReason::StackUnderflow);
        if (stack.size() - static_cast<size_t>(pops) + static_cast<size_t>(pushes) > kStackLimit)
            return fail(HaltReason::StackOverflow);

        switch (ins.op) {
        case Op::STOP:
            reason = HaltReason::Stop;
            return true;
        case Op::ADD: {
            Cell a = pop(), b = pop();
            push(a.v + b.v, a.taint | b.taint);
            break;
        }
        case Op::MUL: {
            Cell a = pop(), b = pop();
            push(a.v * b.v, a.taint | b.taint);
            break;
        }
        case Op::SUB: {
            Cell a = pop(), b = pop();
            push(a.v - b.v, a.taint | b.taint);
            break;
        }
        case Op::DIV: {
            Cell a = pop(), b = pop();
            push(b.v == 0 ? u256(0) : u256(a.v / b.v), a.taint | b.taint);
            break;
        }
        case Op::MOD: {
            Cell a = pop(), b = pop();
            push(b.v == 0 ? u256(0) : u256(a.v % b.v), a.taint | b.taint);
            break;
        }
        case Op::LT: {
            Cell a = pop(), b = pop();
            push(a.v < b.v ? 1 : 0, a.taint | b.taint);
            break;
        }
        case Op::GT: {
            Cell a = pop(), b = pop();
            push(a.v > b.v ? 1 : 0, a.taint | b.taint);
            break;
        }
        case Op::SLT: {
            Cell a = pop(), b = pop();
            u256 bias = u256(1) << 255;
            push((a.v ^ bias) < (b.v ^ bias) ? 1 : 0, a.taint | b.taint);
            break;
        }
        case Op::SGT: {
            Cell a = pop(), b = pop();
            u256 bias = u256(1) << 255;
            push((a.v ^ bias) > (b.v ^ bias) ? 1 : 0, a.taint | b.taint);
            break;
        }
        case Op::EQ: {
            Cell a = pop(), b = pop();
            push(a.v == b.v ? 1 : 0, a.taint | b.taint);
            break;
        }
        case Op::ISZERO: {
            Cell a = pop();
            push(a.v == 0 ? 1 : 0, a.taint);
            break;
        }
        case Op::AND: {
            Cell a = pop(), b = pop();
            push(a.v & b.v, a.taint | b.taint);
            break;
        }
        case Op::OR: {
            Cell a = pop(), b = pop();
            push(a.v | b.v, a.taint | b.taint);
            break;
        }
        case Op::XOR: {
            Cell a = pop(), b = pop();
            push(a.v ^ b.v, a.taint | b.taint);
            break;
        }
        case Op::NOT: {
            Cell a = pop();
            push(~a.v, a.taint);
            break;
        }
        case Op::SHL: {
            Cell shift = pop(), x = pop();
            push(shift.v >= 256 ? u256(0) : u256(x.v << static_cast<unsigned>(shift.v)),
                 shift.taint | x.taint);
            break;
        }
        case Op::SHR: {
            Cell shift = pop(), x = pop();
            push(shift.v >= 256 ? u256(0) : u256(x.v >> static_cast<unsigned>(shift.v)),
                 shift.taint | x.taint);
            break;
        }
        case Op::SHA3: {
            Cell off = pop(), len = pop();
            if (!mem.grow(off.v, len.v)) return fail(HaltReason::MemoryLimit);
            size_t o = static_cast<size_t>(off.v), l = static_cast<size_t>(len.v);
            uint8_t taint = 0;
            for (size_t i = 0; i < l; ++i) taint |= mem.taint[o + i];
            push(keccak256(mem.data.data() + o, l), taint);
            break;
        }
        case Op::ADDRESS:
            push(contract, kTaintOther);
            break;
        case Op::BALANCE: {
            Cell a = pop();
            push(world.balance_of(a.v), kTaintOther);
            break;
        }
        case Op::CALLER:
            push(sender, kTaintCaller);
            break;
        case Op::CALLVALUE:
            push(value, kTaintCallValue);
            break;
        case Op::CALLDATALOAD: {
            Cell off = pop();
            uint8_t word[32] = {};
            if (off.v <= calldata.size()) {
                size_t o = static_cast<size_t>(off.v);
                for (size_t i = 0; i < 32 && o + i < calldata.size(); ++i) word[i] = calldata[o + i];
            }
            push(u256_from_bytes(word, 32), kTaintCalldata);
            break;
        }
        case Op::CALLDATASIZE:
            push(calldata.size(), kTaintCalldata);
            break;
        case Op::CALLDATACOPY: {
            Cell dst = pop(), src = pop(), len = pop();
            if (!mem.grow(dst.v, len.v)) return fail(HaltReason::MemoryLimit);
            size_t d = static_cast<size_t>(dst.v), l = static_cast<size_t>(len.v);
            for (size_t i = 0; i < l; ++i) {
                u256 s = src.v + i;
                mem.data[d + i] = s < calldata.size() ? calldata[static_cast<size_t>(s)] : 0;
                mem.taint[d + i] = kTaintCalldata;
            }
            break;
        }
        case Op::COINBASE:
            trace.read_block_env = true;
            push(env.coinbase, kTaintBlock);
            break;
        case Op::TIMESTAMP:
            trace.read_block_env = true;
            push(env.timestamp, kTaintBlock);
            break;
        case Op::NUMBER:
            trace.read_block_env = true;
            push(env.number, kTaintBlock);
            break;
        case Op::PREVRANDAO:
            trace.read_block_env = true;
            push(env.prevrandao, kTaintBlock);
            break;
        case Op::GASLIMIT:
            trace.read_block_env = true;
            push(env.gaslimit, kTaintBlock);
            break;
        case Op::POP:
            pop();
            break;
        case Op::MLOAD: {
            Cell off = pop();
            if (!mem.grow(off.v, 32)) return fail(HaltReason::MemoryLimit);
            size_t o = static_cast<size_t>(off.v);
            uint8_t taint = 0;
            for (size_t i = 0; i < 32; ++i) taint |= mem.taint[o + i];
            push(u256_from_bytes(mem.data.data() + o, 32), taint);
            break;
        }
        case Op::MSTORE: {
            Cell off = pop(), val = pop();
            if (!mem.grow(off.v, 32)) return fail(HaltReason::MemoryLimit);
            size_t o = static_cast<size_t>(off.v);
            uint8_t buf[32];
            u256_to_bytes32(val.v, buf);
            for (size_t i = 0; i < 32; ++i) {
                mem.data[o + i] = buf[i];
                mem.taint[o + i] = val.taint;
            }
            break;
        }
        case Op::MSTORE8: {
            Cell off = pop(), val = pop();
            if (!mem.grow(off.v, 1)) return fail(HaltReason::MemoryLimit);
            size_t o = static_cast<size_t>(off.v);
            mem.data[o] = static_cast<uint8_t>(val.v & 0xff);
            mem.taint[o] = val.taint;
            break;
        }
        case Op::SLOAD: {
            Cell slot = pop();
            u256 v = world.storage_at(contract, slot.v);
            trace.storage_reads.push_back({seq++, ins.pc, depth, slot.v, v});
            touched_slots.insert(slot.v);
            push(v, kTaintStorage);
            break;
        }
        case Op::SSTORE: {
            Cell slot = pop(), val = pop();
            world.storage[contract][slot.v] = val.v;
            trace.storage_writes.push_back({seq++, ins.pc, depth, slot.v, val.v});
            touched_slots.insert(slot.v);
            break;
        }
        case Op::JUMP: {
            Cell dst = pop();
            if (dst.v > 0xffffffffu) return fail(HaltReason::InvalidJump);
            auto it = at_pc.find(static_cast<uint32_t>(dst.v));
            if (it == at_pc.end() || instructions[it->second].op != Op::JUMPDEST)
                return fail(HaltReason::InvalidJump);
            ip = it->second;
            note_block(static_cast<uint32_t>(dst.v));
            continue;
        }
        case Op::JUMPI: {
            Cell dst = pop(), cond = pop();
            bool taken = cond.v != 0;
            if (opt.cfg) {
                auto bit = opt.cfg->block_of_pc.find(ins.pc);
                if (bit != opt.cfg->block_of_pc.end())
                    trace.branch_edges.insert({bit->second, taken});
            }
            if (taken) {
                if (dst.v > 0xffffffffu) return fail(HaltReason::InvalidJump);
                auto it = at_pc.find(static_cast<uint32_t>(dst.v));
                if (it == at_pc.end() || instructions[it->second].op != Op::JUMPDEST)
                    return fail(HaltReason::InvalidJump);
                ip = it->second;
                note_block(static_cast<uint32_t>(dst.v));
                continue;
            }
            break;
        }
        case Op::JUMPDEST:
            break;
        case Op::CALL:
        case Op::DELEGATECALL:
        case Op::STATICCALL: {
            CallRecord rec;
            rec.pc = ins.pc;
            rec.depth = depth;
            rec.kind = ins.op;
            Cell gas = pop(), target = pop();
            Cell callvalue{0, 0};
            if (ins.op == Op::CALL) callvalue = pop();
            Cell in_off = pop(), in_len = pop(), out_off = pop(), out_len = pop();
            if (!mem.grow(in_off.v, in_len.v) || !mem.grow(out_off.v, out_len.v))
                return fail(HaltReason::MemoryLimit);

            rec.target = target.v & ((u256(1) << 160) - 1);
            rec.target_class = classify(target.taint);
            uint8_t args_taint = 0;
            for (size_t i = 0; i < static_cast<size_t>(in_len.v); ++i)
                args_taint |= mem.taint[static_cast<size_t>(in_off.v) + i];
            rec.args_class = classify(args_taint);
            rec.value = callvalue.v;
            rec.gas_forwarded = gas.taint != 0 || gas.v > 2300;
            rec.seq = seq++;

            bool ok = true;
            if (callvalue.v > 0) {
                if (world.balance_of(contract) < callvalue.v) {
                    ok = false;
                } else if (rec.target != contract) {
                    world.balances[contract] -= callvalue.v;
                    world.balances[rec.target] += callvalue.v;
                    trace.outgoing_value += callvalue.v;
                }
            }

            if (ok && ins.op == Op::CALL && depth == 0 && opt.reentry.kind == ReentryPolicy::Once &&
                !reentry_used && callvalue.v > 0 && rec.target == tx.sender) {
                // The recipient acts as an attacker contract whose fallback
                // re-enters with the same calldata.
                reentry_used = true;
                rec.reentered = true;
                size_t rec_index = trace.calls.size();
                trace.calls.push_back(rec);
                HaltReason inner = HaltReason::Stop;
                bool inner_ok = run_frame(code, sender, 0, calldata, depth + 1, inner);
                trace.calls[rec_index].success = inner_ok;
                push(inner_ok ? 1 : 0, kTaintOther);
                // Stubbed return data: zero-fill the output window.
                for (size_t i = 0; i < static_cast<size_t>(out_len.v); ++i) {
                    mem.data[static_cast<size_t>(out_off.v) + i] = 0;
                    mem.taint[static_cast<size_t>(out_off.v) + i] = kTaintOther;
                }
                break;
            }

            // Stub: succeed with zeroed return data ("appropriate values").
            rec.success = ok;
            trace.calls.push_back(rec);
            for (size_t i = 0; i < static_cast<size_t>(out_len.v); ++i) {
                mem.data[static_cast<size_t>(out_off.v) + i] = 0;
                mem.taint[static_cast<size_t>(out_off.v) + i] = kTaintOther;
            }
            push(ok ? 1 : 0, kTaintOther);
            break;
        }
        case Op::RETURN: {
            pop();
            pop();
            reason = HaltReason::Return;
            return true;
        }
        case Op::REVERT:
            pop();
            pop();
            return fail(HaltReason::Revert);
        case Op::INVALID:
            return fail(HaltReason::InvalidOpcode);
        case Op::SELFDESTRUCT: {
            Cell beneficiary = pop();
            Address to = beneficiary.v & ((u256(1) << 160) - 1);
            u256 bal = world.balance_of(contract);
            SelfdestructRecord rec{seq++, ins.pc, to, bal};
            trace.selfdestructs.push_back(rec);
            if (to != contract && bal > 0) {
                world.balances[contract] = 0;
                world.balances[to] += bal;
                trace.outgoing_value += bal;
            }
            reason = HaltReason::SelfDestructed;
            return true;
        }
        default:
            if (is_push(ins.op)) {
                push(ins.push_value(), 0);
            } else if (is_dup(ins.op)) {
                stack.push_back(stack[stack.size() - static_cast<size_t>(dup_depth(ins.op))]);
            } else if (is_swap(ins.op)) {
                std::swap(stack.back(),
                          stack[stack.size() - 1 - static_cast<size_t>(swap_depth(ins.op))]);
            } else if (is_log(ins.op)) {
                Cell off = pop(), len = pop();
                if (!mem.grow(off.v, len.v)) return fail(HaltReason::MemoryLimit);
                for (int i = 0; i < log_topics(ins.op); ++i) pop();
            } else {
                return fail(HaltReason::InvalidOpcode);
            }
            break;
        }
        ++ip;
        if (ip < instructions.size()) note_block(instructions[ip].pc);
    }
    // Fell off the end of the code: implicit stop.
    reason = HaltReason::Stop;
    return true;
}

}  // namespace

Address deploy(WorldState& state, const bytes& runtime_code) {
    Address addr = address_of_counter(++state.deploy_counter);
    state.deployed[addr] = runtime_code;
    state.balances.emplace(addr, 0);
    return addr;
}

ExecutionTrace execute(WorldState& state, const Address& contract, const Transaction& tx,
                       const VmOptions& opt) {
    ExecutionTrace trace;
    trace.tx = tx;

    Machine m{state, contract, tx, opt, trace,
              tx.block_env_override ? *tx.block_env_override : state.block_env};

    auto storage_before = state.storage;
    auto balances_before = state.balances;

    HaltReason reason = m.run_tx();
    trace.halt = reason;
    trace.reverted = !(reason == HaltReason::Stop || reason == HaltReason::Return ||
                       reason == HaltReason::SelfDestructed);
    if (trace.reverted) {
        state.storage = storage_before;
        state.balances = balances_before;
        trace.outgoing_value = 0;
    }
    for (const u256& slot : m.touched_slots)
        trace.final_storage[slot] = state.storage_at(contract, slot);
    return trace;
}

}  // namespace sdfuzz
