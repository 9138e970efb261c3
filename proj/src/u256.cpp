#include "sdfuzz/u256.hpp"

#include <cctype>
#include <stdexcept>

namespace sdfuzz {

u256 u256_from_bytes(const uint8_t* data, size_t len) {
    u256 v = 0;
    for (size_t i = 0; i < len && i < 32; ++i) {
        v <<= 8;
        v |= data[i];
    }
    return v;
}

void u256_to_bytes32(const u256& v, uint8_t out[32]) {
    u256 t = v;
    for (int i = 31; i >= 0; --i) {
        out[i] = static_cast<uint8_t>(t & 0xff);
        t >>= 8;
    }
}

static const char* kHexDigits = "0123456789abcdef";

std::string to_hex(const u256& v) {
    if (v == 0) return "0x0";
    uint8_t buf[32];
    u256_to_bytes32(v, buf);
    std::string out = "0x";
    bool started = false;
    for (uint8_t b : buf) {
        if (!started) {
            if (b == 0) continue;
            started = true;
            if (b >> 4) out.push_back(kHexDigits[b >> 4]);
            out.push_back(kHexDigits[b & 0xf]);
        } else {
            out.push_back(kHexDigits[b >> 4]);
            out.push_back(kHexDigits[b & 0xf]);
        }
    }
    return out;
}

std::string to_hex32(const u256& v) {
    uint8_t buf[32];
    u256_to_bytes32(v, buf);
    std::string out = "0x";
    for (uint8_t b : buf) {
        out.push_back(kHexDigits[b >> 4]);
        out.push_back(kHexDigits[b & 0xf]);
    }
    return out;
}

std::string bytes_to_hex(const bytes& b) {
    std::string out;
    out.reserve(b.size() * 2);
    for (uint8_t c : b) {
        out.push_back(kHexDigits[c >> 4]);
        out.push_back(kHexDigits[c & 0xf]);
    }
    return out;
}

static int hex_digit(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

bytes parse_hex(const std::string& text) {
    std::string digits;
    digits.reserve(text.size());
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) continue;
        digits.push_back(c);
    }
    if (digits.size() >= 2 && digits[0] == '0' && (digits[1] == 'x' || digits[1] == 'X'))
        digits.erase(0, 2);
    if (digits.size() % 2 != 0)
        throw std::runtime_error("hex input has odd digit count");
    bytes out;
    out.reserve(digits.size() / 2);
    for (size_t i = 0; i < digits.size(); i += 2) {
        int hi = hex_digit(digits[i]);
        int lo = hex_digit(digits[i + 1]);
        if (hi < 0 || lo < 0)
            throw std::runtime_error(std::string("bad hex digit in input: ") + digits[i]);
        out.push_back(static_cast<uint8_t>(hi << 4 | lo));
    }
    return out;
}

u256 parse_u256(const std::string& text) {
    if (text.empty()) throw std::runtime_error("empty numeric literal");
    u256 v = 0;
    if (text.size() >= 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) {
        if (text.size() == 2 || text.size() > 2 + 64)
            throw std::runtime_error("bad hex literal: " + text);
        for (size_t i = 2; i < text.size(); ++i) {
            int d = hex_digit(text[i]);
            if (d < 0) throw std::runtime_error("bad hex literal: " + text);
            v = (v << 4) | d;
        }
        return v;
    }
    const u256 kMax = ~u256(0);
    for (char c : text) {
        if (c < '0' || c > '9') throw std::runtime_error("bad decimal literal: " + text);
        if (v > kMax / 10) throw std::runtime_error("decimal literal overflows 256 bits: " + text);
        v *= 10;
        u256 d = c - '0';
        if (v > kMax - d) throw std::runtime_error("decimal literal overflows 256 bits: " + text);
        v += d;
    }
    return v;
}

// ---------------------------------------------------------------------------
// keccak-256 (the pre-FIPS padding variant used by EVM SHA3)

namespace {

constexpr uint64_t kRoundConstants[24] = {
    0x0000000000000001ULL, 0x0000000000008082ULL, 0x800000000000808aULL,
    0x8000000080008000ULL, 0x000000000000808bULL, 0x0000000080000001ULL,
    0x8000000080008081ULL, 0x8000000000008009ULL, 0x000000000000008aULL,
    0x0000000000000088ULL, 0x0000000080008009ULL, 0x000000008000000aULL,
    0x000000008000808bULL, 0x800000000000008bULL, 0x8000000000008089ULL,
    0x8000000000008003ULL, 0x8000000000008002ULL, 0x8000000000000080ULL,
    0x000000000000800aULL, 0x800000008000000aULL, 0x8000000080008081ULL,
    0x8000000000008080ULL, 0x0000000080000001ULL, 0x8000000080008008ULL};

constexpr int kRotations[25] = {0,  1,  62, 28, 27, 36, 44, 6,  55, 20, 3,  10, 43,
                                25, 39, 41, 45, 15, 21, 8,  18, 2,  61, 56, 14};

inline uint64_t rotl64(uint64_t x, int n) {
    return n == 0 ? x : (x << n) | (x >> (64 - n));
}

void keccak_f1600(uint64_t st[25]) {
    for (int round = 0; round < 24; ++round) {
        uint64_t c[5], d[5];
        for (int x = 0; x < 5; ++x)
            c[x] = st[x] ^ st[x + 5] ^ st[x + 10] ^ st[x + 15] ^ st[x + 20];
        for (int x = 0; x < 5; ++x) {
            d[x] = c[(x + 4) % 5] ^ rotl64(c[(x + 1) % 5], 1);
            for (int y = 0; y < 5; ++y) st[x + 5 * y] ^= d[x];
        }
        // rho + pi
        uint64_t b[25];
        for (int x = 0; x < 5; ++x)
            for (int y = 0; y < 5; ++y)
                b[y + 5 * ((2 * x + 3 * y) % 5)] = rotl64(st[x + 5 * y], kRotations[x + 5 * y]);
        // chi
        for (int x = 0; x < 5; ++x)
            for (int y = 0; y < 5; ++y)
                st[x + 5 * y] = b[x + 5 * y] ^ (~b[(x + 1) % 5 + 5 * y] & b[(x + 2) % 5 + 5 * y]);
        st[0] ^= kRoundConstants[round];
    }
}

}  // namespace

u256 keccak256(const uint8_t* data, size_t len) {
    constexpr size_t kRate = 136;  // 1088-bit rate for 256-bit output
    uint64_t st[25] = {};
    uint8_t block[kRate];

    while (len >= kRate) {
        for (size_t i = 0; i < kRate / 8; ++i) {
            uint64_t w = 0;
            for (int b = 7; b >= 0; --b) w = (w << 8) | data[i * 8 + b];
            st[i] ^= w;
        }
        keccak_f1600(st);
        data += kRate;
        len -= kRate;
    }

    for (size_t i = 0; i < len; ++i) block[i] = data[i];
    for (size_t i = len; i < kRate; ++i) block[i] = 0;
    block[len] ^= 0x01;  // keccak (not SHA3-FIPS) domain padding
    block[kRate - 1] ^= 0x80;
    for (size_t i = 0; i < kRate / 8; ++i) {
        uint64_t w = 0;
        for (int b = 7; b >= 0; --b) w = (w << 8) | block[i * 8 + b];
        st[i] ^= w;
    }
    keccak_f1600(st);

    uint8_t out[32];
    for (int i = 0; i < 4; ++i) {
        uint64_t w = st[i];
        for (int b = 0; b < 8; ++b) {
            out[i * 8 + b] = static_cast<uint8_t>(w & 0xff);
            w >>= 8;
        }
    }
    return u256_from_bytes(out, 32);
}

}  // namespace sdfuzz
