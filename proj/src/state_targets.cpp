#include "sdfuzz/state_targets.hpp"

#include <algorithm>

namespace sdfuzz {

namespace {

// A "world": one consistent assignment of interval sets to concrete slots.
using World = std::map<u256, IntervalSet>;

constexpr size_t kWorldCap = 256;

struct Worlds {
    std::vector<World> list;  // empty list = unsatisfiable
    bool truncated = false;

    static Worlds truth() { return {{World{}}, false}; }
    static Worlds falsity() { return {{}, false}; }
};

bool world_consistent(const World& w) {
    for (const auto& [slot, set] : w)
        if (set.empty()) return false;
    return true;
}

Worlds conjoin(const Worlds& a, const Worlds& b) {
    Worlds out;
    out.truncated = a.truncated || b.truncated;
    for (const World& wa : a.list) {
        for (const World& wb : b.list) {
            World merged = wa;
            bool ok = true;
            for (const auto& [slot, set] : wb) {
                auto it = merged.find(slot);
                if (it == merged.end()) {
                    merged[slot] = set;
                } else {
                    it->second = it->second.intersect(set);
                    if (it->second.empty()) {
                        ok = false;
                        break;
                    }
                }
            }
            if (!ok) continue;
            if (out.list.size() >= kWorldCap) {
                out.truncated = true;
                return out;
            }
            out.list.push_back(std::move(merged));
        }
    }
    return out;
}

Worlds disjoin(const Worlds& a, const Worlds& b) {
    Worlds out;
    out.truncated = a.truncated || b.truncated;
    out.list = a.list;
    for (const World& w : b.list) {
        if (out.list.size() >= kWorldCap) {
            out.truncated = true;
            break;
        }
        out.list.push_back(w);
    }
    return out;
}

// --- reduction of one side of a relation -----------------------------------

struct Reduced {
    enum class Kind {
        Const,       // value
        Affine,      // sign * storage[slot] + offset  (mod 2^256)
        Free,        // attacker-controlled or opaque: no storage restriction
    };
    Kind kind = Kind::Free;
    u256 value = 0;   // Const
    u256 slot = 0;    // Affine
    int sign = 1;     // Affine: +1 or -1
    u256 offset = 0;  // Affine
};

Reduced reduce(const SymRef& e) {
    Reduced r;
    if (!e) return r;
    switch (e->kind) {
    case SymKind::Const:
        r.kind = Reduced::Kind::Const;
        r.value = e->cval;
        return r;
    case SymKind::Storage:
        if (e->kids[0]->kind == SymKind::Const) {
            r.kind = Reduced::Kind::Affine;
            r.slot = e->kids[0]->cval;
            r.sign = 1;
            r.offset = 0;
        }
        return r;  // symbolic key -> Free (never a state target)
    case SymKind::BinOp: {
        if (e->op != Op::ADD && e->op != Op::SUB) return r;
        Reduced a = reduce(e->kids[0]);  // top operand
        Reduced b = reduce(e->kids[1]);
        if (e->op == Op::ADD) {
            if (a.kind == Reduced::Kind::Affine && b.kind == Reduced::Kind::Const) {
                a.offset += b.value;
                return a;
            }
            if (b.kind == Reduced::Kind::Affine && a.kind == Reduced::Kind::Const) {
                b.offset += a.value;
                return b;
            }
        } else {  // SUB: top - second
            if (a.kind == Reduced::Kind::Affine && b.kind == Reduced::Kind::Const) {
                a.offset -= b.value;
                return a;
            }
            if (a.kind == Reduced::Kind::Const && b.kind == Reduced::Kind::Affine) {
                // const - (sign*slot + off) = -sign*slot + (const - off)
                b.sign = -b.sign;
                b.offset = a.value - b.offset;
                return b;
            }
        }
        return r;
    }
    default:
        return r;
    }
}

// Solutions y of `y REL c` as an interval set, REL over unsigned order.
IntervalSet unsigned_rel(Op rel, const u256& c, bool holds) {
    const u256 kMax = IntervalSet::max_value();
    switch (rel) {
    case Op::LT:
        return holds ? (c == 0 ? IntervalSet::none() : IntervalSet::range(0, c - 1))
                     : IntervalSet::range(c, kMax);
    case Op::GT:
        return holds ? (c == kMax ? IntervalSet::none() : IntervalSet::range(c + 1, kMax))
                     : IntervalSet::range(0, c);
    case Op::EQ:
        return holds ? IntervalSet::point(c) : IntervalSet::point(c).complement();
    default:
        return IntervalSet::all();
    }
}

// Solutions of `value REL c` where value = sign*storage[slot] + offset.
Worlds affine_relation(const Reduced& affine, Op rel, const u256& c, bool holds) {
    IntervalSet y;
    if (rel == Op::SLT || rel == Op::SGT) {
        // Signed order: map through xor(2^255) monotone bijection.
        const u256 bias = u256(1) << 255;
        y = unsigned_rel(rel == Op::SLT ? Op::LT : Op::GT, c ^ bias, holds).map_xor_msb();
    } else {
        y = unsigned_rel(rel, c, holds);
    }
    // Undo the affine transform: y = sign*s + offset.
    IntervalSet s = affine.sign > 0 ? y.preimage_add(affine.offset)
                                    : y.preimage_sub_from(affine.offset);
    Worlds out;
    if (s.empty()) return Worlds::falsity();
    if (s.full()) return Worlds::truth();
    World w;
    w[affine.slot] = s;
    out.list.push_back(std::move(w));
    return out;
}

bool is_cmp(Op op) {
    return op == Op::LT || op == Op::GT || op == Op::SLT || op == Op::SGT || op == Op::EQ;
}

// Interpret `expr != 0` (nonzero) or `expr == 0` (!nonzero) into worlds.
Worlds interp(const SymRef& e, bool nonzero) {
    if (!e || e->contains_unknown()) return Worlds::truth();  // over-approximate

    switch (e->kind) {
    case SymKind::Const:
        return (e->cval != 0) == nonzero ? Worlds::truth() : Worlds::falsity();
    case SymKind::UnOp:
        if (e->op == Op::ISZERO) return interp(e->kids[0], !nonzero);
        if (e->op == Op::NOT) {
            // NOT(x) != 0  <=>  x != 2^256-1
            Reduced x = reduce(e->kids[0]);
            if (x.kind == Reduced::Kind::Affine)
                return affine_relation(x, Op::EQ, IntervalSet::max_value(), !nonzero);
            if (x.kind == Reduced::Kind::Const)
                return (x.value != IntervalSet::max_value()) == nonzero ? Worlds::truth()
                                                                        : Worlds::falsity();
            return Worlds::truth();
        }
        return Worlds::truth();
    case SymKind::BinOp: {
        Op op = e->op;
        if (op == Op::AND) {
            // AND(a,b) != 0 implies both operands nonzero.
            if (nonzero) return conjoin(interp(e->kids[0], true), interp(e->kids[1], true));
            return Worlds::truth();
        }
        if (op == Op::OR) {
            if (!nonzero) return conjoin(interp(e->kids[0], false), interp(e->kids[1], false));
            return disjoin(interp(e->kids[0], true), interp(e->kids[1], true));
        }
        if (is_cmp(op)) {
            Reduced a = reduce(e->kids[0]);
            Reduced b = reduce(e->kids[1]);
            bool holds = nonzero;  // cmp result is 0/1
            if (a.kind == Reduced::Kind::Const && b.kind == Reduced::Kind::Const) {
                SymRef v = sym_binop(op, sym_const(a.value), sym_const(b.value));
                return (v->cval != 0) == nonzero ? Worlds::truth() : Worlds::falsity();
            }
            if (a.kind == Reduced::Kind::Affine && b.kind == Reduced::Kind::Const)
                return affine_relation(a, op, b.value, holds);
            if (a.kind == Reduced::Kind::Const && b.kind == Reduced::Kind::Affine) {
                // c REL x: flip the comparison.
                Op flipped = op;
                if (op == Op::LT) flipped = Op::GT;
                else if (op == Op::GT) flipped = Op::LT;
                else if (op == Op::SLT) flipped = Op::SGT;
                else if (op == Op::SGT) flipped = Op::SLT;
                return affine_relation(b, flipped, a.value, holds);
            }
            return Worlds::truth();  // slot-vs-slot or attacker-controlled side
        }
        // Other arithmetic used directly as a truth value.
        Reduced x = reduce(e);
        if (x.kind == Reduced::Kind::Affine) return affine_relation(x, Op::EQ, 0, !nonzero);
        return Worlds::truth();
    }
    case SymKind::Storage: {
        Reduced x = reduce(e);
        if (x.kind == Reduced::Kind::Affine) return affine_relation(x, Op::EQ, 0, !nonzero);
        return Worlds::truth();
    }
    default:
        // Calldata / Caller / CallValue / BlockField / Sha3 / ...: the fuzzer
        // controls these; no storage restriction follows.
        return Worlds::truth();
    }
}

Worlds eval_constraint(const Constraint& c) {
    switch (c.kind) {
    case Constraint::Kind::True: return Worlds::truth();
    case Constraint::Kind::False: return Worlds::falsity();
    case Constraint::Kind::Atom: return interp(c.atom.cond, c.atom.expect_nonzero);
    case Constraint::Kind::And: {
        Worlds acc = Worlds::truth();
        for (const auto& k : c.kids) {
            acc = conjoin(acc, eval_constraint(k));
            if (acc.list.empty()) return acc;
        }
        return acc;
    }
    case Constraint::Kind::Or: {
        Worlds acc = Worlds::falsity();
        for (const auto& k : c.kids) acc = disjoin(acc, eval_constraint(k));
        return acc;
    }
    }
    return Worlds::truth();
}

SolveResult project(const Worlds& worlds) {
    SolveResult res;
    std::vector<const World*> consistent;
    for (const World& w : worlds.list)
        if (world_consistent(w)) consistent.push_back(&w);
    if (consistent.empty()) {
        res.satisfiable = false;
        return res;
    }
    res.satisfiable = true;

    // A slot is constrained only if every disjunct constrains it; its range
    // is the union over disjuncts (a necessary condition for reachability).
    std::map<u256, IntervalSet> merged;
    for (const auto& [slot, set] : *consistent[0]) merged[slot] = set;
    for (size_t i = 1; i < consistent.size(); ++i) {
        for (auto it = merged.begin(); it != merged.end();) {
            auto jt = consistent[i]->find(it->first);
            if (jt == consistent[i]->end()) {
                it = merged.erase(it);
            } else {
                it->second = it->second.unite(jt->second);
                ++it;
            }
        }
    }
    for (auto& [slot, set] : merged)
        if (!set.full() && !set.empty()) res.ranges[slot] = set;
    return res;
}

}  // namespace

SolveResult solve(const Constraint& c) {
    return project(eval_constraint(c));
}

StateTarget derive_state_target(const Cfg& unrolled, const CodeTarget& target,
                                size_t target_index, const StateTargetOptions& opt) {
    StateTarget st;
    st.target_index = target_index;

    std::vector<int> goal_blocks = unrolled.copies_of(target.block_id);
    bool truncated = false;
    std::vector<Path> paths = find_paths(unrolled, goal_blocks, opt.path_limit, &truncated);
    st.truncated = truncated;
    if (paths.empty()) {
        st.satisfiable = false;
        return st;
    }

    std::vector<Constraint> disjuncts;
    for (const Path& p : paths) {
        std::vector<Constraint> conj;
        for (size_t i = 0; i < p.branch_points.size(); ++i)
            conj.push_back(
                Constraint::make_atom(backward_branch_constraints(unrolled, p, i, opt.depth_cap)));
        disjuncts.push_back(conj.empty() ? Constraint::make_true()
                                         : Constraint::make_and(std::move(conj)));
    }

    SolveResult solved = solve(Constraint::make_or(std::move(disjuncts)));
    st.ranges = std::move(solved.ranges);
    st.satisfiable = solved.satisfiable;
    return st;
}

}  // namespace sdfuzz
