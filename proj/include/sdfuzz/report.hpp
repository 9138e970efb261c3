#pragma once

#include "sdfuzz/engine.hpp"

#include <json.hpp>

#include <string>

namespace sdfuzz {

using ordered_json = nlohmann::ordered_json;

inline constexpr int kReportSchemaVersion = 1;

// Static section shared verbatim by `analyze` output and the fuzz report.
ordered_json static_section_json(const StaticAnalysis& st);

// Full campaign report. Field order is fixed; identical campaigns serialize
// to identical bytes.
ordered_json campaign_report_json(const CampaignResult& result, const bytes& code,
                                  const std::string& contract_name,
                                  const AbiDescriptor& abi);

// Per-generation metrics stream, one CSV row per generation.
std::string metrics_csv(const CampaignResult& result);

// Witness transactions parsed back out of a report for replay.
struct ReplayWitness {
    BugClass bug_class;
    uint32_t anchor_pc = 0;
    size_t tx_index = 0;
    std::vector<Transaction> txs;
    std::string description;
};

struct ReplayBundle {
    bytes code;
    std::string code_hash;
    std::vector<ReplayWitness> findings;
};

ReplayBundle parse_report_for_replay(const ordered_json& report);

std::string code_digest(const bytes& code);

}  // namespace sdfuzz
