#include "sdfuzz/intervals.hpp"

#include <algorithm>

namespace sdfuzz {

IntervalSet IntervalSet::range(const u256& lo, const u256& hi) {
    IntervalSet s;
    if (lo <= hi) s.ivs_.push_back({lo, hi});
    return s;
}

bool IntervalSet::full() const {
    return ivs_.size() == 1 && ivs_[0].lo == 0 && ivs_[0].hi == max_value();
}

bool IntervalSet::contains(const u256& v) const {
    for (const auto& iv : ivs_)
        if (v >= iv.lo && v <= iv.hi) return true;
    return false;
}

void IntervalSet::normalize() {
    if (ivs_.empty()) return;
    std::sort(ivs_.begin(), ivs_.end(),
              [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    std::vector<Interval> out;
    out.push_back(ivs_[0]);
    for (size_t i = 1; i < ivs_.size(); ++i) {
        Interval& last = out.back();
        const Interval& cur = ivs_[i];
        bool adjacent = last.hi != max_value() && u256(last.hi + 1) == cur.lo;
        if (cur.lo <= last.hi || adjacent)
            last.hi = std::max(last.hi, cur.hi);
        else
            out.push_back(cur);
    }
    ivs_ = std::move(out);
}

IntervalSet IntervalSet::intersect(const IntervalSet& o) const {
    IntervalSet out;
    for (const auto& a : ivs_)
        for (const auto& b : o.ivs_) {
            u256 lo = std::max(a.lo, b.lo);
            u256 hi = std::min(a.hi, b.hi);
            if (lo <= hi) out.ivs_.push_back({lo, hi});
        }
    out.normalize();
    return out;
}

IntervalSet IntervalSet::unite(const IntervalSet& o) const {
    IntervalSet out;
    out.ivs_ = ivs_;
    out.ivs_.insert(out.ivs_.end(), o.ivs_.begin(), o.ivs_.end());
    out.normalize();
    return out;
}

IntervalSet IntervalSet::complement() const {
    IntervalSet out;
    u256 next = 0;
    bool open = true;  // region [next, ...] still outside all intervals
    for (const auto& iv : ivs_) {
        if (iv.lo > next) out.ivs_.push_back({next, iv.lo - 1});
        if (iv.hi == max_value()) {
            open = false;
            break;
        }
        next = iv.hi + 1;
    }
    if (open && (ivs_.empty() || ivs_.back().hi != max_value()))
        out.ivs_.push_back({next, max_value()});
    out.normalize();
    return out;
}

IntervalSet IntervalSet::preimage_add(const u256& c) const {
    IntervalSet out;
    for (const auto& iv : ivs_) {
        u256 lo = iv.lo - c;  // wrapping
        u256 hi = iv.hi - c;
        if (lo <= hi) {
            out.ivs_.push_back({lo, hi});
        } else {  // wrapped around zero
            out.ivs_.push_back({lo, max_value()});
            out.ivs_.push_back({0, hi});
        }
    }
    out.normalize();
    return out;
}

IntervalSet IntervalSet::preimage_sub_from(const u256& c) const {
    // x such that c - x ∈ [lo, hi]  <=>  x ∈ [c - hi, c - lo] (wrapping)
    IntervalSet out;
    for (const auto& iv : ivs_) {
        u256 lo = c - iv.hi;
        u256 hi = c - iv.lo;
        if (lo <= hi) {
            out.ivs_.push_back({lo, hi});
        } else {
            out.ivs_.push_back({lo, max_value()});
            out.ivs_.push_back({0, hi});
        }
    }
    out.normalize();
    return out;
}

IntervalSet IntervalSet::map_xor_msb() const {
    const u256 bias = u256(1) << 255;
    IntervalSet out;
    auto emit = [&](u256 lo, u256 hi) {
        if (lo <= hi) out.ivs_.push_back({lo ^ bias, hi ^ bias});
    };
    for (const auto& iv : ivs_) {
        if (iv.hi < bias || iv.lo >= bias) {
            emit(iv.lo, iv.hi);
        } else {  // straddles the sign boundary
            emit(iv.lo, bias - 1);
            emit(bias, iv.hi);
        }
    }
    out.normalize();
    return out;
}

u256 IntervalSet::gap_to(const u256& v) const {
    if (ivs_.empty()) return max_value();
    u256 best = max_value();
    for (const auto& iv : ivs_) {
        if (v >= iv.lo && v <= iv.hi) return 0;
        u256 d_lo = v > iv.lo ? u256(v - iv.lo) : u256(iv.lo - v);
        u256 d_hi = v > iv.hi ? u256(v - iv.hi) : u256(iv.hi - v);
        best = std::min(best, std::min(d_lo, d_hi));
    }
    return best;
}

std::vector<u256> IntervalSet::bounds_and_midpoints() const {
    std::vector<u256> out;
    for (const auto& iv : ivs_) {
        out.push_back(iv.lo);
        out.push_back(iv.hi);
        out.push_back(iv.lo + (iv.hi - iv.lo) / 2);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

int log2_compress(const u256& gap) {
    if (gap == 0) return 0;
    // ceil(log2(gap + 1)) == bit position of the highest set bit of gap, + 1,
    // unless gap + 1 is an exact power of two.
    u256 g = gap;
    int bits = 0;
    while (g > 0) {
        g >>= 1;
        ++bits;
    }
    // bits = floor(log2(gap)) + 1 = ceil(log2(gap+1)) except when gap+1 is a
    // power of two, where both coincide.
    u256 gp1 = gap + 1;
    if (gp1 != 0 && (gp1 & (gp1 - 1)) == 0) {
        int b = 0;
        u256 t = gp1;
        while (t > 1) {
            t >>= 1;
            ++b;
        }
        return b;
    }
    return bits;
}

}  // namespace sdfuzz
