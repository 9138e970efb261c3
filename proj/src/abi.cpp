#include "sdfuzz/abi.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace sdfuzz {

using nlohmann::json;

Param parse_param_kind(const std::string& t) {
    Param p;
    p.spec = t;
    auto parse_width = [&](size_t prefix_len) {
        std::string digits = t.substr(prefix_len);
        if (digits.empty()) return 256;
        int bits = std::stoi(digits);
        if (bits < 8 || bits > 256 || bits % 8 != 0)
            throw AbiError("unsupported integer width in '" + t + "'");
        return bits;
    };
    if (t == "bool") {
        p.kind = ParamKind::Bool;
    } else if (t == "address") {
        p.kind = ParamKind::Address;
    } else if (t == "bytes") {
        p.kind = ParamKind::Bytes;
    } else if (t == "string") {
        p.kind = ParamKind::String;
    } else if (t.rfind("uint", 0) == 0) {
        p.kind = ParamKind::UInt;
        p.bits = parse_width(4);
    } else if (t.rfind("int", 0) == 0) {
        p.kind = ParamKind::Int;
        p.bits = parse_width(3);
    } else if (t.rfind("bytes", 0) == 0) {
        p.kind = ParamKind::BytesN;
        int n = std::stoi(t.substr(5));
        if (n < 1 || n > 32) throw AbiError("unsupported bytesN width in '" + t + "'");
        p.nbytes = n;
    } else {
        throw AbiError("unsupported parameter type '" + t + "'");
    }
    return p;
}

AbiDescriptor parse_abi(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const std::exception& e) {
        throw AbiError(std::string("malformed ABI JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("functions") || !doc["functions"].is_array())
        throw AbiError("ABI descriptor must be an object with a 'functions' array");

    AbiDescriptor abi;
    std::set<std::array<uint8_t, 4>> seen;
    for (const auto& f : doc["functions"]) {
        AbiFunction fn;
        fn.name = f.value("name", "");
        if (fn.name.empty()) throw AbiError("function entry missing 'name'");
        std::string sel = f.value("selector", "");
        bytes sel_bytes;
        try {
            sel_bytes = parse_hex(sel);
        } catch (const std::exception&) {
            throw AbiError("function '" + fn.name + "' has malformed selector '" + sel + "'");
        }
        if (sel_bytes.size() != 4)
            throw AbiError("function '" + fn.name + "' selector must be 4 bytes");
        std::copy(sel_bytes.begin(), sel_bytes.end(), fn.selector.begin());
        if (!seen.insert(fn.selector).second)
            throw AbiError("duplicate selector " + sel);
        fn.payable = f.value("payable", false);
        if (f.contains("params")) {
            for (const auto& p : f["params"]) {
                if (p.is_string())
                    fn.params.push_back(parse_param_kind(p.get<std::string>()));
                else if (p.is_object() && p.contains("kind"))
                    fn.params.push_back(parse_param_kind(p["kind"].get<std::string>()));
                else
                    throw AbiError("bad param entry in function '" + fn.name + "'");
            }
        }
        abi.functions.push_back(std::move(fn));
    }
    if (doc.contains("initial_balance")) {
        const auto& v = doc["initial_balance"];
        abi.initial_contract_balance =
            v.is_string() ? parse_u256(v.get<std::string>()) : u256(v.get<uint64_t>());
    }
    return abi;
}

AbiDescriptor load_abi_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw AbiError("cannot read ABI file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_abi(ss.str());
}

}  // namespace sdfuzz
