#pragma once

#include "sdfuzz/report.hpp"

namespace sdfuzz {

struct ReplayOutcome {
    bool reproduced = false;
    std::string detail;
};

// Re-deploy the recorded bytecode, run the witness transactions, and check
// that a finding of the same class (and anchor, where one exists) fires.
ReplayOutcome replay_witness(const bytes& code, const ReplayWitness& witness,
                             uint64_t max_steps = 100'000);

}  // namespace sdfuzz
