#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "guipilot/environment.hpp"
#include "guipilot/utg.hpp"

namespace guipilot {

struct ExploreOptions {
    int budget = 300;  // number of actions performed
    uint64_t seed = 1;
    double restart_prob = 0.05;  // chance of jumping back to the initial state
};

// Random exploration: repeatedly clicks buttons and toggles checkboxes on the
// composed view of the current screen, recording deduplicated transitions.
// Same seed and budget reproduce the same graph byte for byte.
Utg explore(Environment& env, const ExploreOptions& options);

struct PathHop {
    std::string source_signature;
    int element_local_id = -1;
    ElementClass element_class = ElementClass::Button;
    std::string element_label;
};

// Minimum-length click path from the graph's initial node to the target
// signature. Ties are broken by the lexicographically smallest
// (element label, local id) at each hop, so the result is deterministic.
// Throws std::invalid_argument for unknown targets and std::runtime_error
// when the target is not click-reachable.
std::vector<PathHop> shortest_click_path(const Utg& utg, const std::string& target_signature);

}  // namespace guipilot
