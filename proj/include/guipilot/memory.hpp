#pragma once

#include <string>
#include <vector>

#include "guipilot/llm_gateway.hpp"
#include "guipilot/prompt_engine.hpp"
#include "guipilot/utg.hpp"

namespace guipilot {

struct ElementRef {
    std::string signature;  // state the element lives on
    int local_id = -1;
    ElementClass cls = ElementClass::Button;
    std::string label;

    bool operator==(const ElementRef&) const = default;
};

// One simulated task: what interacting with terminal_element accomplishes,
// plus the click path that reaches it. ui_states runs from the initial state
// to the element's owning state inclusive; ui_elements are the elements
// clicked along the way, one per hop.
struct MemoryEntry {
    std::string simulated_task;
    std::vector<std::string> ui_states;
    std::vector<ElementRef> ui_elements;
    ElementRef terminal_element;
};

struct UiFunctionEntry {
    std::string signature;
    std::string function_summary;
};

struct AppMemory {
    std::string app_name;
    std::string utg_reference;  // path of the graph this was built from
    std::vector<MemoryEntry> simulated_tasks;
    std::vector<UiFunctionEntry> ui_functions;
    std::vector<std::string> warnings;  // skipped elements etc.

    const UiFunctionEntry* function_of(const std::string& signature) const;
};

struct MemoryBuildOptions {
    int max_attempts = 3;
    int backoff_ms = 10;
    std::string utg_reference;
};

// One-sentence task summary for an element, by prompt id, on a rendered view.
// Retries transient backend failures with exponential backoff.
std::string summarize_element(LlmBackend& llm, CostLedger* ledger, const PromptTemplates& templates,
                              const std::string& app_name, const HtmlView& view, int prompt_id,
                              const MemoryBuildOptions& options = {});

// Walks the explored graph and builds the app memory: one entry per distinct
// interactive element, anchored at its depth-minimal owning state (ties go to
// the lexicographically smallest signature), plus one function summary per
// state. Elements are identified across states by (class, label).
AppMemory build_memory(const Utg& utg, LlmBackend& llm, CostLedger* ledger,
                       const PromptTemplates& templates, const std::string& app_name,
                       const MemoryBuildOptions& options = {});

void save_memory(const AppMemory& memory, const std::string& path);
AppMemory load_memory(const std::string& path);
nlohmann::json memory_json(const AppMemory& memory);
AppMemory memory_from_json(const nlohmann::json& j);

}  // namespace guipilot
