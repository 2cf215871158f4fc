#pragma once

#include <string>
#include <vector>

#include "oubridge/config.hpp"

namespace oubridge {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Closed-form identities of the linear theory plus a small Monte Carlo check
/// of the exact bridge sampler, all on the configured model and horizon.
std::vector<CheckResult> run_invariant_suite(const ExperimentConfig& config);

}  // namespace oubridge
