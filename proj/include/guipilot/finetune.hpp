#pragma once

#include <string>
#include <vector>

#include "guipilot/llm_gateway.hpp"
#include "guipilot/memory.hpp"
#include "guipilot/prompt_engine.hpp"
#include "guipilot/utg.hpp"

namespace guipilot {

// One supervised training example. system/prompt mirror what the agent sends
// at inference; completion is the target output.
struct QaPair {
    std::string system;
    std::string prompt;
    std::string completion;
    std::string task;
    std::string state_signature;
    int step_index = 0;
    bool cot = false;
};

struct FinetuneOptions {
    bool chain_of_thought = false;  // completions carry the reasoning template
    int max_attempts = 3;           // retries for a malformed reasoning answer
    PromptTemplates templates = PromptTemplates::defaults();
};

// Turns every memorized task into step-wise training pairs: one per click
// along the recorded path, so the pair count equals the summed path lengths.
// Views are rendered without graph-based merging so pairs do not depend on
// having the graph at inference time.
// chain_of_thought asks cot_llm to produce the reasoning sections; answers
// missing a section are retried and skipped (with a warning) when they never
// come back well-formed.
std::vector<QaPair> export_pairs(const AppMemory& memory, const Utg& utg, LlmBackend* cot_llm,
                                 CostLedger* ledger, const FinetuneOptions& options,
                                 std::vector<std::string>* warnings = nullptr);

nlohmann::json qa_json(const QaPair& pair);
QaPair qa_from_json(const nlohmann::json& j);

// One JSON object per line.
void write_jsonl(const std::vector<QaPair>& pairs, const std::string& path);
std::vector<QaPair> read_jsonl(const std::string& path);

}  // namespace guipilot
