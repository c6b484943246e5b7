#include "guipilot/memory.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <map>
#include <thread>

#include "guipilot/explorer.hpp"
#include "guipilot/serializer.hpp"

namespace guipilot {

namespace {

using nlohmann::json;

std::string retry_complete(LlmBackend& llm, CostLedger* ledger, const LlmRequest& request,
                           const MemoryBuildOptions& options) {
    std::string last_error;
    for (int attempt = 0; attempt < options.max_attempts; ++attempt) {
        if (attempt > 0)
            std::this_thread::sleep_for(std::chrono::milliseconds(options.backoff_ms << (attempt - 1)));
        try {
            return complete(llm, ledger, request);
        } catch (const std::exception& e) {
            last_error = e.what();
        }
    }
    throw std::runtime_error("summary query failed after " + std::to_string(options.max_attempts) +
                             " attempts: " + last_error);
}

json element_ref_json(const ElementRef& ref) {
    json j = json::object();
    j["signature"] = ref.signature;
    j["local_id"] = ref.local_id;
    j["class"] = class_tag(ref.cls);
    j["label"] = ref.label;
    return j;
}

ElementRef element_ref_from_json(const json& j) {
    ElementRef ref;
    ref.signature = j["signature"].get<std::string>();
    ref.local_id = j["local_id"].get<int>();
    ref.cls = class_from_tag(j["class"].get<std::string>());
    ref.label = j.value("label", std::string{});
    return ref;
}

}  // namespace

const UiFunctionEntry* AppMemory::function_of(const std::string& signature) const {
    for (const auto& f : ui_functions)
        if (f.signature == signature) return &f;
    return nullptr;
}

std::string summarize_element(LlmBackend& llm, CostLedger* ledger, const PromptTemplates& templates,
                              const std::string& app_name, const HtmlView& view, int prompt_id,
                              const MemoryBuildOptions& options) {
    LlmRequest request;
    request.user = build_summarize_element_prompt(templates, app_name, view, prompt_id);
    request.purpose = "summarize";
    request.temperature = 0.25;
    return retry_complete(llm, ledger, request, options);
}

AppMemory build_memory(const Utg& utg, LlmBackend& llm, CostLedger* ledger,
                       const PromptTemplates& templates, const std::string& app_name,
                       const MemoryBuildOptions& options) {
    AppMemory memory;
    memory.app_name = app_name;
    memory.utg_reference = options.utg_reference;

    // Nodes in (depth, signature) order; this fixes both the owning-state
    // choice and the order of backend queries.
    std::vector<const UtgNode*> nodes;
    for (const auto& n : utg.nodes) nodes.push_back(&n);
    std::sort(nodes.begin(), nodes.end(), [](const UtgNode* a, const UtgNode* b) {
        if (a->depth != b->depth) return a->depth < b->depth;
        return a->signature < b->signature;
    });

    // Distinct interactive elements by (class, display name), anchored at the
    // first node (in sort order) that carries them. Display names stand in for
    // labels on label-less list rows so each row keeps its own identity.
    struct Owned {
        const UtgNode* node;
        int local_id;
        ElementClass cls;
        std::string label;
    };
    std::map<std::pair<std::string, std::string>, Owned> owners;  // (tag, name) -> anchor
    std::vector<std::pair<std::string, std::string>> order;
    for (const UtgNode* node : nodes) {
        if (node->depth < 0) continue;  // not click-reachable, cannot be replayed
        for (const UiElement* e : interactive_elements(node->representative)) {
            std::pair<std::string, std::string> key{class_tag(e->cls), display_name(*e)};
            if (!owners.count(key)) {
                owners[key] = {node, e->local_id, e->cls, key.second};
                order.push_back(key);
            }
        }
    }

    for (const auto& key : order) {
        const Owned& owned = owners.at(key);
        std::vector<PathHop> path;
        try {
            path = shortest_click_path(utg, owned.node->signature);
        } catch (const std::exception& e) {
            memory.warnings.push_back("skipped element '" + owned.label + "': " + e.what());
            continue;
        }

        MemoryEntry entry;
        entry.terminal_element = {owned.node->signature, owned.local_id, owned.cls, owned.label};
        for (const PathHop& hop : path) {
            entry.ui_states.push_back(hop.source_signature);
            ElementRef ref;
            ref.signature = hop.source_signature;
            ref.local_id = hop.element_local_id;
            ref.cls = hop.element_class;
            ref.label = hop.element_label;
            entry.ui_elements.push_back(std::move(ref));
        }
        entry.ui_states.push_back(owned.node->signature);

        // The summary view is rendered without graph-based merging so every
        // element keeps its own line: a merged group line would describe all
        // of its members by the head fragment of the first one.
        HtmlView view = render_state(owned.node->representative);
        int prompt_id = -1;
        for (const auto& [pid, target] : view.id_map) {
            if (std::find(target.local_ids.begin(), target.local_ids.end(), owned.local_id) !=
                target.local_ids.end()) {
                prompt_id = pid;
                break;
            }
        }
        if (prompt_id < 0) {
            memory.warnings.push_back("skipped element '" + owned.label + "': it does not render");
            continue;
        }
        entry.simulated_task =
            summarize_element(llm, ledger, templates, app_name, view, prompt_id, options);
        memory.simulated_tasks.push_back(std::move(entry));
    }

    for (const UtgNode* node : nodes) {
        HtmlView view = render_state(node->representative, {&utg, {}});
        LlmRequest request;
        request.user = build_ui_function_prompt(templates, app_name, view);
        request.purpose = "summarize";
        request.temperature = 0.25;
        UiFunctionEntry f;
        f.signature = node->signature;
        f.function_summary = retry_complete(llm, ledger, request, options);
        memory.ui_functions.push_back(std::move(f));
    }

    return memory;
}

json memory_json(const AppMemory& memory) {
    json j = json::object();
    j["app_name"] = memory.app_name;
    j["utg_reference"] = memory.utg_reference;
    json tasks = json::array();
    for (const auto& entry : memory.simulated_tasks) {
        json ej = json::object();
        ej["simulated_task"] = entry.simulated_task;
        ej["ui_states"] = entry.ui_states;
        json elements = json::array();
        for (const auto& ref : entry.ui_elements) elements.push_back(element_ref_json(ref));
        ej["ui_elements"] = elements;
        ej["terminal_element"] = element_ref_json(entry.terminal_element);
        tasks.push_back(ej);
    }
    j["simulated_tasks"] = tasks;
    json functions = json::array();
    for (const auto& f : memory.ui_functions) {
        json fj = json::object();
        fj["signature"] = f.signature;
        fj["function_summary"] = f.function_summary;
        functions.push_back(fj);
    }
    j["ui_functions"] = functions;
    if (!memory.warnings.empty()) j["warnings"] = memory.warnings;
    return j;
}

AppMemory memory_from_json(const json& j) {
    AppMemory memory;
    memory.app_name = j.value("app_name", std::string{});
    memory.utg_reference = j.value("utg_reference", std::string{});
    for (const auto& ej : j.value("simulated_tasks", json::array())) {
        MemoryEntry entry;
        entry.simulated_task = ej["simulated_task"].get<std::string>();
        for (const auto& s : ej["ui_states"]) entry.ui_states.push_back(s.get<std::string>());
        for (const auto& rj : ej["ui_elements"]) entry.ui_elements.push_back(element_ref_from_json(rj));
        entry.terminal_element = element_ref_from_json(ej["terminal_element"]);
        if (entry.ui_elements.size() + 1 != entry.ui_states.size())
            throw SchemaError("", "memory entry path lengths are inconsistent");
        memory.simulated_tasks.push_back(std::move(entry));
    }
    for (const auto& fj : j.value("ui_functions", json::array())) {
        UiFunctionEntry f;
        f.signature = fj["signature"].get<std::string>();
        f.function_summary = fj["function_summary"].get<std::string>();
        memory.ui_functions.push_back(std::move(f));
    }
    for (const auto& w : j.value("warnings", json::array()))
        memory.warnings.push_back(w.get<std::string>());
    return memory;
}

void save_memory(const AppMemory& memory, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write memory to '" + path + "'");
    out << memory_json(memory).dump(2) << "\n";
}

AppMemory load_memory(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open memory file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::runtime_error("memory file '" + path + "' is not valid JSON: " + e.what());
    }
    return memory_from_json(j);
}

}  // namespace guipilot
