#pragma once

#include "sdfuzz/backward.hpp"
#include "sdfuzz/intervals.hpp"
#include "sdfuzz/targets.hpp"

#include <map>

namespace sdfuzz {

// Boolean combination of branch constraints; the unit the solver consumes.
struct Constraint {
    enum class Kind { True, False, Atom, And, Or };
    Kind kind = Kind::True;
    BranchConstraint atom;          // Kind::Atom
    std::vector<Constraint> kids;   // And / Or

    static Constraint make_true() { return {}; }
    static Constraint make_false() {
        Constraint c;
        c.kind = Kind::False;
        return c;
    }
    static Constraint make_atom(BranchConstraint bc) {
        Constraint c;
        c.kind = Kind::Atom;
        c.atom = std::move(bc);
        return c;
    }
    static Constraint make_and(std::vector<Constraint> kids) {
        Constraint c;
        c.kind = Kind::And;
        c.kids = std::move(kids);
        return c;
    }
    static Constraint make_or(std::vector<Constraint> kids) {
        Constraint c;
        c.kind = Kind::Or;
        c.kids = std::move(kids);
        return c;
    }
};

struct SolveResult {
    std::map<u256, IntervalSet> ranges;  // only constrained concrete slots
    bool satisfiable = true;
};

// Interval propagation over 256-bit unsigned values. Supported relations:
// LT/GT/SLT/SGT/EQ/ISZERO over a storage slot shifted by constants, plus
// AND/OR combinations. Relations over attacker-controlled leaves (calldata,
// caller, value, block fields) and anything Unknown over-approximate to TRUE;
// constant-only relations evaluate exactly. Storage slots with symbolic keys
// never appear in the result.
SolveResult solve(const Constraint& c);

struct StateTarget {
    size_t target_index = 0;  // index into the CodeTarget list
    std::map<u256, IntervalSet> ranges;
    bool satisfiable = true;
    bool truncated = false;  // path or disjunct cap was hit
};

struct StateTargetOptions {
    size_t path_limit = 10'000;
    int depth_cap = 64;
};

// Paths to every unrolled copy of the target block; per path, conjoin branch
// constraints; across paths, disjoin; then solve.
StateTarget derive_state_target(const Cfg& unrolled, const CodeTarget& target,
                                size_t target_index, const StateTargetOptions& opt = {});

}  // namespace sdfuzz
