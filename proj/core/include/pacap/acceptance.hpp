// acceptance.hpp — the verification battery behind the `verify` CLI command
// and the acceptance test binary. Each criterion is self-contained,
// deterministic under the fixed seed, and reports pass/fail with a detail
// string and its wall time.

#pragma once

#include "pacap/channel.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace pacap {

struct CriterionResult {
    int id{};
    std::string name;
    bool pass{};
    std::string detail;
    double seconds{};
};

struct AcceptanceOptions {
    bool quick = false;             // reduced sample counts, same thresholds
    std::uint64_t seed = 20250810;  // stream seed for all randomized criteria
    std::ostream* progress = nullptr;
    bool measure_quick_total = true;
    int only = 0;                   // run a single criterion id; 0 = all
};

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts = {});

bool all_passed(const std::vector<CriterionResult>& results);

void print_results(std::ostream& os, const std::vector<CriterionResult>& results);

// Fixed 2x2 test channel used by the power-split verification and the docs.
ChannelMatrix reference_channel_2x2();

}  // namespace pacap
