#pragma once

#include "sdfuzz/cfg.hpp"
#include "sdfuzz/symexpr.hpp"

#include <vector>

namespace sdfuzz {

struct Path {
    std::vector<int> blocks;  // entry ... target over the unrolled graph
    struct BranchPoint {
        size_t block_index;  // position within `blocks`
        int block;           // JUMPI-terminated block id
        bool direction;      // true = branch taken
    };
    std::vector<BranchPoint> branch_points;
};

// Enumerate entry-to-target paths over the acyclic (unrolled) graph. Targets
// are given as block ids; enumeration stops after `limit` paths and sets
// *truncated. Unreachable targets yield an empty list.
std::vector<Path> find_paths(const Cfg& unrolled, const std::vector<int>& target_blocks,
                             size_t limit = 10'000, bool* truncated = nullptr);

// Reconstruct the branch condition at path.branch_points[branch_index] by
// walking the path's instructions in reverse: stack slots start as
// placeholders seeded from the JUMPI operands and get defined by the
// instructions that produced them, until every traced value bottoms out in a
// storage slot, an input leaf, or a constant. Memory and storage reads resolve
// against earlier constant-offset writes on the same path; everything else
// becomes Unknown.
BranchConstraint backward_branch_constraints(const Cfg& unrolled, const Path& path,
                                             size_t branch_index, int depth_cap = 64);

}  // namespace sdfuzz
