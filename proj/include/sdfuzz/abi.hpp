#pragma once

#include "sdfuzz/u256.hpp"

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

namespace sdfuzz {

enum class ParamKind { UInt, Int, Bool, Address, BytesN, Bytes, String };

struct Param {
    ParamKind kind = ParamKind::UInt;
    int bits = 256;   // UInt/Int width
    int nbytes = 32;  // BytesN width
    std::string spec; // original type string, e.g. "uint32"

    bool is_dynamic() const { return kind == ParamKind::Bytes || kind == ParamKind::String; }
};

struct AbiFunction {
    std::string name;
    std::array<uint8_t, 4> selector{};
    std::vector<Param> params;
    bool payable = false;
};

struct AbiDescriptor {
    std::vector<AbiFunction> functions;
    u256 initial_contract_balance = 0;  // optional pre-funding for fixtures

    const AbiFunction& fn(size_t i) const { return functions.at(i); }
};

struct AbiError : std::runtime_error {
    explicit AbiError(const std::string& msg) : std::runtime_error(msg) {}
};

Param parse_param_kind(const std::string& type_string);

// Parse the .abi.json descriptor format:
//   {"functions":[{"name":"withdraw","selector":"0x11223344",
//                  "params":["uint32"],"payable":false}],
//    "initial_balance":"1000000"}
// Selectors are explicit and must be unique.
AbiDescriptor parse_abi(const std::string& json_text);
AbiDescriptor load_abi_file(const std::string& path);

}  // namespace sdfuzz
