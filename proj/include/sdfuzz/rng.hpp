#pragma once

#include "sdfuzz/u256.hpp"

#include <cstdint>

namespace sdfuzz {

// xoshiro256** seeded via splitmix64. Hand-rolled so that sequences are
// identical across platforms and standard library versions, which campaign
// reproducibility depends on.
class Rng {
public:
    explicit Rng(uint64_t seed) {
        uint64_t x = seed;
        for (auto& word : s_) {
            x += 0x9e3779b97f4a7c15ULL;
            uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            word = z ^ (z >> 31);
        }
    }

    uint64_t next() {
        auto rotl = [](uint64_t v, int k) { return (v << k) | (v >> (64 - k)); };
        uint64_t result = rotl(s_[1] * 5, 7) * 9;
        uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0, n). n == 0 returns 0.
    uint64_t below(uint64_t n) {
        if (n == 0) return 0;
        // Rejection sampling keeps the draw unbiased.
        uint64_t threshold = (0 - n) % n;
        while (true) {
            uint64_t r = next();
            if (r >= threshold) return r % n;
        }
    }

    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    bool chance(double p) {
        if (p <= 0) return false;
        if (p >= 1) return true;
        return unit() < p;
    }

    u256 bits(int nbits) {
        u256 v = 0;
        int full = nbits / 64;
        for (int i = 0; i < full; ++i) v = (v << 64) | next();
        int rem = nbits % 64;
        if (rem) v = (v << rem) | (next() >> (64 - rem));
        return v;
    }

private:
    uint64_t s_[4];
};

}  // namespace sdfuzz
