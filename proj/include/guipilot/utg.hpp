#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "guipilot/gui_model.hpp"

namespace guipilot {

// One transition observed during exploration. element_* identify the element
// acted on within the source node's representative state.
struct UtgEdge {
    std::string source;
    int element_local_id = -1;
    ElementClass element_class = ElementClass::Button;
    std::string element_label;
    ActionKind kind = ActionKind::Click;
    std::string target;

    bool operator==(const UtgEdge&) const = default;
};

struct UtgNode {
    std::string signature;
    UiState representative;  // first state observed with this signature
    int depth = -1;          // shortest click distance from initial, -1 if unreachable
};

// UI transition graph: nodes are state signatures, edges are actions.
struct Utg {
    std::string initial;
    std::vector<UtgNode> nodes;
    std::vector<UtgEdge> edges;

    bool has_node(const std::string& signature) const;
    const UtgNode* node(const std::string& signature) const;
    UtgNode* node(const std::string& signature);
    // Adds the node if its signature is new; returns true when added.
    bool add_node(UiState representative);
    // Deduplicates on (source, element, kind, target); returns true when added.
    bool add_edge(UtgEdge edge);

    std::vector<const UtgEdge*> edges_from(const std::string& signature) const;
    // The unique click target recorded for (state, element), if exactly one.
    std::optional<std::string> click_target(const std::string& signature, int element_local_id) const;

    // BFS over click edges from the initial node.
    void recompute_depths();
};

void save_utg(const Utg& utg, const std::string& path);
Utg load_utg(const std::string& path);
nlohmann::json utg_json(const Utg& utg);
Utg utg_from_json(const nlohmann::json& j);

}  // namespace guipilot
