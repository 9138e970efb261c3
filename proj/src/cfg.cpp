#include "sdfuzz/cfg.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <stack>

namespace sdfuzz {

const char* edge_kind_name(EdgeKind k) {
    switch (k) {
    case EdgeKind::Fallthrough: return "fallthrough";
    case EdgeKind::Jump: return "jump";
    case EdgeKind::BranchTrue: return "branch-true";
    case EdgeKind::BranchFalse: return "branch-false";
    }
    return "?";
}

size_t Cfg::edge_count() const {
    size_t n = 0;
    for (const auto& b : blocks) n += b.successors.size();
    return n;
}

std::vector<std::vector<int>> Cfg::predecessors() const {
    std::vector<std::vector<int>> preds(blocks.size());
    for (const auto& b : blocks)
        for (auto [succ, kind] : b.successors) preds[static_cast<size_t>(succ)].push_back(b.id);
    return preds;
}

bool Cfg::has_cycle() const {
    enum { White, Grey, Black };
    std::vector<int> color(blocks.size(), White);
    std::vector<std::pair<int, size_t>> stack;
    for (const auto& start : blocks) {
        if (color[static_cast<size_t>(start.id)] != White) continue;
        stack.push_back({start.id, 0});
        color[static_cast<size_t>(start.id)] = Grey;
        while (!stack.empty()) {
            auto& [node, idx] = stack.back();
            const auto& succs = blocks[static_cast<size_t>(node)].successors;
            if (idx >= succs.size()) {
                color[static_cast<size_t>(node)] = Black;
                stack.pop_back();
                continue;
            }
            int next = succs[idx++].first;
            if (color[static_cast<size_t>(next)] == Grey) return true;
            if (color[static_cast<size_t>(next)] == White) {
                color[static_cast<size_t>(next)] = Grey;
                stack.push_back({next, 0});
            }
        }
    }
    return false;
}

std::vector<int> Cfg::copies_of(int original_id) const {
    std::vector<int> out;
    for (const auto& b : blocks)
        if (b.role == BlockRole::Code && b.origin == original_id) out.push_back(b.id);
    return out;
}

// ---------------------------------------------------------------------------
// CFG construction

namespace {

// Constant-or-unknown abstract stack cell.
using AbsVal = std::optional<u256>;

// Simulate a block's instructions over an abstract stack. Cells popped past
// the end of the provided stack are treated as unknown. Arithmetic on known
// constants is folded so pushed jump targets survive simple shuffling. When
// `stop_before_jump` is set, a trailing JUMP/JUMPI is not simulated, leaving
// its operands on the stack for target resolution.
std::vector<AbsVal> simulate_block(const BasicBlock& blk, std::vector<AbsVal> stack,
                                   bool stop_before_jump = false, size_t depth_cap = 64) {
    auto pop = [&]() -> AbsVal {
        if (stack.empty()) return std::nullopt;
        AbsVal v = stack.back();
        stack.pop_back();
        return v;
    };
    for (const Instruction& ins : blk.instructions) {
        Op op = ins.op;
        if (stop_before_jump && &ins == &blk.instructions.back() &&
            (op == Op::JUMP || op == Op::JUMPI))
            break;
        if (is_push(op)) {
            stack.push_back(ins.push_value());
        } else if (is_dup(op)) {
            int n = dup_depth(op);
            if (static_cast<int>(stack.size()) >= n)
                stack.push_back(stack[stack.size() - static_cast<size_t>(n)]);
            else
                stack.push_back(std::nullopt);
        } else if (is_swap(op)) {
            int n = swap_depth(op);
            if (static_cast<int>(stack.size()) >= n + 1)
                std::swap(stack.back(), stack[stack.size() - 1 - static_cast<size_t>(n)]);
            else if (!stack.empty())
                stack.back() = std::nullopt;
        } else {
            auto [pops, pushes] = stack_arity(op);
            std::vector<AbsVal> args;
            for (int i = 0; i < pops; ++i) args.push_back(pop());
            AbsVal result = std::nullopt;
            if (pushes == 1 && pops == 2 && args[0] && args[1]) {
                const u256&a = *args[0], &b = *args[1];
                switch (op) {
                case Op::ADD: result = u256(a + b); break;
                case Op::SUB: result = u256(a - b); break;
                case Op::MUL: result = u256(a * b); break;
                case Op::DIV: result = b == 0 ? u256(0) : u256(a / b); break;
                case Op::MOD: result = b == 0 ? u256(0) : u256(a % b); break;
                case Op::AND: result = u256(a & b); break;
                case Op::OR: result = u256(a | b); break;
                case Op::XOR: result = u256(a ^ b); break;
                case Op::LT: result = u256(a < b ? 1 : 0); break;
                case Op::GT: result = u256(a > b ? 1 : 0); break;
                case Op::EQ: result = u256(a == b ? 1 : 0); break;
                case Op::SHL: result = a >= 256 ? u256(0) : u256(b << static_cast<unsigned>(a)); break;
                case Op::SHR: result = a >= 256 ? u256(0) : u256(b >> static_cast<unsigned>(a)); break;
                default: break;
                }
            } else if (pushes == 1 && pops == 1 && args[0]) {
                if (op == Op::ISZERO) result = u256(*args[0] == 0 ? 1 : 0);
                if (op == Op::NOT) result = u256(~*args[0]);
            }
            for (int i = 0; i < pushes; ++i) stack.push_back(result);
        }
        if (stack.size() > depth_cap)
            stack.erase(stack.begin(), stack.begin() + static_cast<long>(stack.size() - depth_cap));
    }
    return stack;
}

AbsVal merge_cell(const AbsVal& a, const AbsVal& b) {
    if (a && b && *a == *b) return a;
    return std::nullopt;
}

}  // namespace

Cfg build_cfg(const std::vector<Instruction>& instructions) {
    Cfg cfg;
    if (instructions.empty()) {
        BasicBlock entry;
        entry.id = 0;
        entry.origin = 0;
        cfg.blocks.push_back(entry);
        return cfg;
    }

    // Leaders: pc 0, every JUMPDEST, and the instruction after a jump/terminator.
    std::set<uint32_t> leaders{instructions.front().pc};
    for (size_t i = 0; i < instructions.size(); ++i) {
        const Instruction& ins = instructions[i];
        if (ins.op == Op::JUMPDEST) leaders.insert(ins.pc);
        if ((ins.op == Op::JUMP || ins.op == Op::JUMPI || is_terminator(ins.op)) &&
            i + 1 < instructions.size())
            leaders.insert(instructions[i + 1].pc);
    }

    std::map<uint32_t, int> block_at;  // start pc -> id
    for (size_t i = 0; i < instructions.size(); ++i) {
        if (!leaders.count(instructions[i].pc)) continue;
        BasicBlock blk;
        blk.id = static_cast<int>(cfg.blocks.size());
        blk.start_pc = instructions[i].pc;
        size_t j = i;
        for (; j < instructions.size(); ++j) {
            if (j > i && leaders.count(instructions[j].pc)) break;
            blk.instructions.push_back(instructions[j]);
            if (instructions[j].op == Op::JUMP || instructions[j].op == Op::JUMPI ||
                is_terminator(instructions[j].op)) {
                ++j;
                break;
            }
        }
        blk.end_pc = blk.instructions.back().pc;
        blk.origin = blk.id;
        block_at[blk.start_pc] = blk.id;
        cfg.blocks.push_back(blk);
        i = j - 1;
    }

    std::set<uint32_t> jumpdests;
    for (const Instruction& ins : instructions)
        if (ins.op == Op::JUMPDEST) jumpdests.insert(ins.pc);

    // Synthetic sinks, created lazily.
    auto sink = [&](BlockRole role) {
        for (const auto& b : cfg.blocks)
            if (b.role == role) return b.id;
        BasicBlock blk;
        blk.id = static_cast<int>(cfg.blocks.size());
        blk.role = role;
        blk.origin = blk.id;
        cfg.blocks.push_back(blk);
        return blk.id;
    };

    auto resolve_jump_edge = [&](int from, const AbsVal& target, EdgeKind kind) {
        int dest;
        if (!target)
            dest = sink(BlockRole::UnknownSink);
        else if (*target > 0xffffffffu || !jumpdests.count(static_cast<uint32_t>(*target)))
            dest = sink(BlockRole::RevertSink);
        else
            dest = block_at.at(static_cast<uint32_t>(*target));
        cfg.blocks[static_cast<size_t>(from)].successors.push_back({dest, kind});
    };

    // First wiring round: fallthrough edges plus jumps resolvable from the
    // block's own constant stack (entry assumed unknown).
    std::map<uint32_t, int> next_block;  // pc after block end -> following block id
    {
        std::vector<uint32_t> starts;
        for (auto& [pc, id] : block_at) starts.push_back(pc);
        for (size_t bi = 0; bi < cfg.blocks.size(); ++bi) {
            BasicBlock& blk = cfg.blocks[bi];
            if (blk.role != BlockRole::Code || blk.instructions.empty()) continue;
            const Instruction& last = blk.instructions.back();
            uint32_t after = last.pc + last.size();
            auto it = block_at.find(after);
            int fall = it == block_at.end() ? -1 : it->second;

            if (is_terminator(last.op)) continue;
            if (last.op == Op::JUMP) {
                auto stack = simulate_block(blk, {}, true);
                resolve_jump_edge(blk.id, stack.empty() ? AbsVal{} : stack.back(), EdgeKind::Jump);
            } else if (last.op == Op::JUMPI) {
                auto stack = simulate_block(blk, {}, true);
                resolve_jump_edge(blk.id, stack.empty() ? AbsVal{} : stack.back(),
                                  EdgeKind::BranchTrue);
                int dest = fall >= 0 ? fall : sink(BlockRole::HaltSink);
                cfg.blocks[bi].successors.push_back({dest, EdgeKind::BranchFalse});
            } else {
                int dest = fall >= 0 ? fall : sink(BlockRole::HaltSink);
                cfg.blocks[bi].successors.push_back({dest, EdgeKind::Fallthrough});
            }
        }
    }

    // Bounded constant-stack propagation across edges to resolve jumps whose
    // targets were pushed in an earlier block. Unknown-sink edges are
    // re-resolved when a constant destination emerges.
    {
        const int kMaxVisits = 16;
        std::unordered_map<int, std::vector<AbsVal>> in_stack;
        std::unordered_map<int, int> visits;
        std::deque<int> work{cfg.entry};
        in_stack[cfg.entry] = {};
        while (!work.empty()) {
            int id = work.front();
            work.pop_front();
            BasicBlock& blk = cfg.blocks[static_cast<size_t>(id)];
            if (blk.role != BlockRole::Code) continue;
            if (++visits[id] > kMaxVisits) continue;
            auto out = simulate_block(blk, in_stack[id], true);

            // Retarget an unresolved jump if the destination is now constant.
            bool jump_end = !blk.instructions.empty() &&
                            (blk.ends_with(Op::JUMP) || blk.ends_with(Op::JUMPI));
            if (jump_end && !out.empty() && out.back()) {
                EdgeKind kind = blk.ends_with(Op::JUMP) ? EdgeKind::Jump : EdgeKind::BranchTrue;
                for (auto& edge : blk.successors) {
                    if (edge.second != kind) continue;
                    if (cfg.blocks[static_cast<size_t>(edge.first)].role != BlockRole::UnknownSink)
                        continue;
                    const u256& t = *out.back();
                    if (t <= 0xffffffffu && jumpdests.count(static_cast<uint32_t>(t)))
                        edge.first = block_at.at(static_cast<uint32_t>(t));
                    else
                        edge.first = sink(BlockRole::RevertSink);
                }
            }

            // Successor input stack: drop what the jump consumes.
            auto for_succ = out;
            if (blk.ends_with(Op::JUMP) && !for_succ.empty()) for_succ.pop_back();
            if (blk.ends_with(Op::JUMPI)) {
                for (int i = 0; i < 2 && !for_succ.empty(); ++i) for_succ.pop_back();
            }
            for (auto [succ, kind] : blk.successors) {
                auto it = in_stack.find(succ);
                if (it == in_stack.end()) {
                    in_stack[succ] = for_succ;
                    work.push_back(succ);
                } else {
                    auto& cur = it->second;
                    bool changed = false;
                    size_t n = std::min(cur.size(), for_succ.size());
                    if (cur.size() != n) {
                        cur.erase(cur.begin(), cur.begin() + static_cast<long>(cur.size() - n));
                        changed = true;
                    }
                    std::vector<AbsVal> tail(for_succ.end() - static_cast<long>(n), for_succ.end());
                    for (size_t i = 0; i < n; ++i) {
                        AbsVal merged = merge_cell(cur[i], tail[i]);
                        if ((merged.has_value() != cur[i].has_value()) ||
                            (merged && *merged != *cur[i])) {
                            cur[i] = merged;
                            changed = true;
                        }
                    }
                    if (changed) work.push_back(succ);
                }
            }
        }
    }

    // Reachability.
    {
        std::vector<bool> seen(cfg.blocks.size(), false);
        std::deque<int> work{cfg.entry};
        seen[static_cast<size_t>(cfg.entry)] = true;
        while (!work.empty()) {
            int id = work.front();
            work.pop_front();
            for (auto [succ, kind] : cfg.blocks[static_cast<size_t>(id)].successors) {
                if (!seen[static_cast<size_t>(succ)]) {
                    seen[static_cast<size_t>(succ)] = true;
                    work.push_back(succ);
                }
            }
        }
        for (auto& b : cfg.blocks) b.dead = !seen[static_cast<size_t>(b.id)];
    }
    return cfg;
}

// ---------------------------------------------------------------------------
// Loop unrolling

namespace {

// Tarjan SCC. Returns component index per block; components with one node and
// no self-edge are trivial.
struct SccResult {
    std::vector<int> comp;
    int count = 0;
};

SccResult tarjan_scc(const Cfg& g) {
    int n = static_cast<int>(g.blocks.size());
    SccResult res;
    res.comp.assign(static_cast<size_t>(n), -1);
    std::vector<int> index(static_cast<size_t>(n), -1), low(static_cast<size_t>(n), 0);
    std::vector<bool> on_stack(static_cast<size_t>(n), false);
    std::vector<int> stk;
    int next_index = 0;

    struct Frame {
        int node;
        size_t edge;
    };
    for (int start = 0; start < n; ++start) {
        if (index[static_cast<size_t>(start)] != -1) continue;
        std::vector<Frame> frames{{start, 0}};
        index[static_cast<size_t>(start)] = low[static_cast<size_t>(start)] = next_index++;
        stk.push_back(start);
        on_stack[static_cast<size_t>(start)] = true;
        while (!frames.empty()) {
            Frame& f = frames.back();
            const auto& succs = g.blocks[static_cast<size_t>(f.node)].successors;
            if (f.edge < succs.size()) {
                int w = succs[f.edge++].first;
                if (index[static_cast<size_t>(w)] == -1) {
                    index[static_cast<size_t>(w)] = low[static_cast<size_t>(w)] = next_index++;
                    stk.push_back(w);
                    on_stack[static_cast<size_t>(w)] = true;
                    frames.push_back({w, 0});
                } else if (on_stack[static_cast<size_t>(w)]) {
                    low[static_cast<size_t>(f.node)] =
                        std::min(low[static_cast<size_t>(f.node)], index[static_cast<size_t>(w)]);
                }
                continue;
            }
            if (low[static_cast<size_t>(f.node)] == index[static_cast<size_t>(f.node)]) {
                while (true) {
                    int w = stk.back();
                    stk.pop_back();
                    on_stack[static_cast<size_t>(w)] = false;
                    res.comp[static_cast<size_t>(w)] = res.count;
                    if (w == f.node) break;
                }
                ++res.count;
            }
            int done = f.node;
            frames.pop_back();
            if (!frames.empty())
                low[static_cast<size_t>(frames.back().node)] =
                    std::min(low[static_cast<size_t>(frames.back().node)],
                             low[static_cast<size_t>(done)]);
        }
    }
    return res;
}

}  // namespace

Cfg unroll_loops(const Cfg& input, int bound, size_t block_budget) {
    Cfg g = input;
    g.unroll_bound = bound;
    if (bound < 1) bound = 1;

    // Each round unrolls the current outermost cyclic components with respect
    // to one header each; cycles that avoid the header survive inside the
    // copies and are handled by the next round.
    for (int round = 0; round < 64; ++round) {
        if (!g.has_cycle()) break;
        auto scc = tarjan_scc(g);

        std::vector<bool> cyclic(static_cast<size_t>(scc.count), false);
        std::vector<int> size(static_cast<size_t>(scc.count), 0);
        for (const auto& b : g.blocks) ++size[static_cast<size_t>(scc.comp[static_cast<size_t>(b.id)])];
        for (const auto& b : g.blocks)
            for (auto [succ, kind] : b.successors)
                if (scc.comp[static_cast<size_t>(b.id)] == scc.comp[static_cast<size_t>(succ)] &&
                    (size[static_cast<size_t>(scc.comp[static_cast<size_t>(b.id)])] > 1 || succ == b.id))
                    cyclic[static_cast<size_t>(scc.comp[static_cast<size_t>(b.id)])] = true;

        // Pick one header per cyclic component: the entry if inside, else the
        // lowest-id block targeted from outside, else the lowest id.
        std::vector<int> header(static_cast<size_t>(scc.count), -1);
        for (int c = 0; c < scc.count; ++c) {
            if (!cyclic[static_cast<size_t>(c)]) continue;
            if (scc.comp[static_cast<size_t>(g.entry)] == c) {
                header[static_cast<size_t>(c)] = g.entry;
                continue;
            }
            int best = -1;
            for (const auto& b : g.blocks)
                for (auto [succ, kind] : b.successors)
                    if (scc.comp[static_cast<size_t>(succ)] == c &&
                        scc.comp[static_cast<size_t>(b.id)] != c)
                        if (best == -1 || succ < best) best = succ;
            if (best == -1)
                for (const auto& b : g.blocks)
                    if (scc.comp[static_cast<size_t>(b.id)] == c && (best == -1 || b.id < best))
                        best = b.id;
            header[static_cast<size_t>(c)] = best;
        }

        // copy_id[c][k][node] for k in 1..bound-1.
        Cfg next = g;
        std::unordered_map<long long, int> copy_id;  // (comp * bound + k) * N + node
        auto key = [&](int c, int k, int node) {
            return (static_cast<long long>(c) * (bound + 1) + k) *
                       static_cast<long long>(g.blocks.size()) +
                   node;
        };
        for (int c = 0; c < scc.count; ++c) {
            if (!cyclic[static_cast<size_t>(c)]) continue;
            for (int k = 1; k < bound; ++k) {
                for (const auto& b : g.blocks) {
                    if (scc.comp[static_cast<size_t>(b.id)] != c) continue;
                    BasicBlock copy = b;
                    copy.id = static_cast<int>(next.blocks.size());
                    copy.iteration = b.iteration + k;
                    copy.successors.clear();
                    copy_id[key(c, k, b.id)] = copy.id;
                    next.blocks.push_back(copy);
                    if (next.blocks.size() > block_budget)
                        throw UnrollBudgetExceeded(
                            "loop unrolling exceeded block budget of " +
                            std::to_string(block_budget) + " blocks");
                }
            }
        }

        // Rewire edges.
        auto resolved = [&](int c, int k, int node) {
            if (k == 0) return node;
            return copy_id.at(key(c, k, node));
        };
        for (const auto& b : g.blocks) {
            int c = scc.comp[static_cast<size_t>(b.id)];
            bool in_loop = cyclic[static_cast<size_t>(c)];
            if (!in_loop) continue;  // edges into a loop already hit copy 0
            for (int k = 0; k < bound; ++k) {
                int src = resolved(c, k, b.id);
                auto& out = next.blocks[static_cast<size_t>(src)].successors;
                out.clear();
                for (auto [succ, kind] : b.successors) {
                    int sc = scc.comp[static_cast<size_t>(succ)];
                    if (sc != c) {
                        // Leaving the loop: target copy 0.
                        out.push_back({succ, kind});
                    } else if (succ == header[static_cast<size_t>(c)]) {
                        if (k + 1 < bound)
                            out.push_back({resolved(c, k + 1, succ), kind});
                        // else: final copy's back edge removed
                    } else {
                        out.push_back({resolved(c, k, succ), kind});
                    }
                }
            }
        }
        g = std::move(next);
    }

    if (g.has_cycle())
        throw UnrollBudgetExceeded("loop unrolling did not converge");

    // Refresh reachability on the unrolled graph.
    std::vector<bool> seen(g.blocks.size(), false);
    std::deque<int> work{g.entry};
    seen[static_cast<size_t>(g.entry)] = true;
    while (!work.empty()) {
        int id = work.front();
        work.pop_front();
        for (auto [succ, kind] : g.blocks[static_cast<size_t>(id)].successors)
            if (!seen[static_cast<size_t>(succ)]) {
                seen[static_cast<size_t>(succ)] = true;
                work.push_back(succ);
            }
    }
    for (auto& b : g.blocks) b.dead = !seen[static_cast<size_t>(b.id)];
    return g;
}

CfgIndex CfgIndex::build(const Cfg& cfg) {
    CfgIndex idx;
    idx.entry = cfg.entry;
    for (const auto& b : cfg.blocks) {
        if (b.role != BlockRole::Code || b.iteration != 0) continue;
        for (const Instruction& ins : b.instructions) {
            idx.block_of_pc[ins.pc] = b.id;
            if (ins.op == Op::JUMPDEST) idx.jumpdests.insert(ins.pc);
        }
        if (!b.instructions.empty()) idx.block_at_start[b.start_pc] = b.id;
    }
    return idx;
}

std::vector<int> dominator_tree(const Cfg& cfg) {
    size_t n = cfg.blocks.size();
    std::vector<int> idom(n, -1);
    idom[static_cast<size_t>(cfg.entry)] = cfg.entry;

    // Reverse postorder over reachable blocks.
    std::vector<int> order;
    {
        std::vector<bool> seen(n, false);
        std::vector<std::pair<int, size_t>> stack{{cfg.entry, 0}};
        seen[static_cast<size_t>(cfg.entry)] = true;
        while (!stack.empty()) {
            auto& [node, i] = stack.back();
            const auto& succs = cfg.blocks[static_cast<size_t>(node)].successors;
            if (i < succs.size()) {
                int next = succs[i++].first;
                if (!seen[static_cast<size_t>(next)]) {
                    seen[static_cast<size_t>(next)] = true;
                    stack.push_back({next, 0});
                }
            } else {
                order.push_back(node);
                stack.pop_back();
            }
        }
        std::reverse(order.begin(), order.end());
    }
    std::vector<int> rpo_index(n, -1);
    for (size_t i = 0; i < order.size(); ++i) rpo_index[static_cast<size_t>(order[i])] = static_cast<int>(i);

    auto preds = cfg.predecessors();
    auto intersect = [&](int a, int b) {
        while (a != b) {
            while (rpo_index[static_cast<size_t>(a)] > rpo_index[static_cast<size_t>(b)])
                a = idom[static_cast<size_t>(a)];
            while (rpo_index[static_cast<size_t>(b)] > rpo_index[static_cast<size_t>(a)])
                b = idom[static_cast<size_t>(b)];
        }
        return a;
    };

    bool changed = true;
    while (changed) {
        changed = false;
        for (int node : order) {
            if (node == cfg.entry) continue;
            int new_idom = -1;
            for (int p : preds[static_cast<size_t>(node)]) {
                if (idom[static_cast<size_t>(p)] == -1) continue;
                new_idom = new_idom == -1 ? p : intersect(p, new_idom);
            }
            if (new_idom != -1 && idom[static_cast<size_t>(node)] != new_idom) {
                idom[static_cast<size_t>(node)] = new_idom;
                changed = true;
            }
        }
    }
    return idom;
}

bool dominates(const std::vector<int>& idom, int maybe_dom, int block, int entry) {
    if (idom[static_cast<size_t>(block)] == -1) return false;
    int cur = block;
    while (true) {
        if (cur == maybe_dom) return true;
        if (cur == entry) return false;
        cur = idom[static_cast<size_t>(cur)];
        if (cur == -1) return false;
    }
}

}  // namespace sdfuzz
