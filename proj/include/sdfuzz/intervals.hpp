#pragma once

#include "sdfuzz/u256.hpp"

#include <vector>

namespace sdfuzz {

struct Interval {
    u256 lo, hi;  // inclusive bounds, lo <= hi
};

// Set of disjoint, sorted, inclusive intervals over the full 256-bit unsigned
// range. The abstract domain for storage-slot value constraints.
class IntervalSet {
public:
    static IntervalSet none() { return IntervalSet{}; }
    static IntervalSet all() { return range(0, max_value()); }
    static IntervalSet point(const u256& v) { return range(v, v); }
    static IntervalSet range(const u256& lo, const u256& hi);
    static u256 max_value() { return ~u256(0); }

    bool empty() const { return ivs_.empty(); }
    bool full() const;
    bool contains(const u256& v) const;

    IntervalSet intersect(const IntervalSet& o) const;
    IntervalSet unite(const IntervalSet& o) const;
    IntervalSet complement() const;

    // {x : (x + c) mod 2^256 ∈ this}
    IntervalSet preimage_add(const u256& c) const;
    // {x : (c - x) mod 2^256 ∈ this}
    IntervalSet preimage_sub_from(const u256& c) const;
    // {x ^ 2^255 : x ∈ this}; maps between signed and unsigned order.
    IntervalSet map_xor_msb() const;

    // Saturating distance from v to the nearest interval endpoint; 0 inside.
    u256 gap_to(const u256& v) const;

    const std::vector<Interval>& intervals() const { return ivs_; }
    size_t count() const { return ivs_.size(); }

    // Interval endpoints plus midpoints, deduplicated: the values the fuzzer
    // seeds its mutation pool with.
    std::vector<u256> bounds_and_midpoints() const;

    bool operator==(const IntervalSet& o) const {
        if (ivs_.size() != o.ivs_.size()) return false;
        for (size_t i = 0; i < ivs_.size(); ++i)
            if (ivs_[i].lo != o.ivs_[i].lo || ivs_[i].hi != o.ivs_[i].hi) return false;
        return true;
    }

private:
    std::vector<Interval> ivs_;
    void normalize();
};

// ceil(log2(gap + 1)): compresses astronomic 256-bit gaps into [0, 256].
int log2_compress(const u256& gap);

}  // namespace sdfuzz
