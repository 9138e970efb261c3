#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace sdfuzz {

namespace mp = boost::multiprecision;

// 256-bit unsigned word with wrap-around (mod 2^256) arithmetic.
using u256 = mp::number<
    mp::cpp_int_backend<256, 256, mp::unsigned_magnitude, mp::unchecked, void>>;

// Addresses are 160-bit values carried in the low bytes of a u256.
using Address = u256;

using bytes = std::vector<uint8_t>;

u256 u256_from_bytes(const uint8_t* data, size_t len);  // big-endian, len <= 32
void u256_to_bytes32(const u256& v, uint8_t out[32]);   // big-endian, zero-padded

std::string to_hex(const u256& v);    // minimal "0x..." form
std::string to_hex32(const u256& v);  // fixed 64-nibble "0x..." form
std::string bytes_to_hex(const bytes& b);

// Hex text -> bytes. Accepts an optional 0x prefix; whitespace is ignored.
// Throws std::runtime_error on odd length or bad digits.
bytes parse_hex(const std::string& text);

// Decimal or 0x-prefixed hex literal -> u256. Throws on overflow/garbage.
u256 parse_u256(const std::string& text);

inline bool sign_bit(const u256& v) {
    return mp::bit_test(v, 255);
}

u256 keccak256(const uint8_t* data, size_t len);
inline u256 keccak256(const bytes& b) {
    return keccak256(b.data(), b.size());
}

}  // namespace sdfuzz
