#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "guipilot/environment.hpp"
#include "guipilot/llm_gateway.hpp"
#include "guipilot/memory.hpp"
#include "guipilot/pii.hpp"
#include "guipilot/prompt_engine.hpp"
#include "guipilot/retrieval.hpp"

namespace guipilot {

struct SessionConfig {
    int max_steps = 15;
    double gamma = 0.9;  // shortcut similarity threshold
    int k = 3;           // memory entries consulted for hints
    double temperature = 0.25;
    bool risk_gate = true;
    bool privacy_filter = true;
    bool compose_scroll = true;
    bool use_memory = true;
    bool auto_confirm = false;  // applies when no confirm callback is set
    std::function<bool(const std::string&)> confirm;  // risky-action prompt
    PromptTemplates templates = PromptTemplates::defaults();
    PiiConfig pii = PiiConfig::defaults();
};

struct SessionResources {
    const Utg* utg = nullptr;
    const AppMemory* memory = nullptr;
    EmbeddingProvider* embedder = nullptr;
};

enum class RunOutcome { CompletedByModel, ShortcutCompleted, MaxStepsExceeded, Error };

std::string outcome_name(RunOutcome outcome);

struct TraceStep {
    int index = 0;
    std::string state_signature;
    std::string view_text;  // exactly what left the process (masked if filtering)
    std::string response;   // raw model output; empty for replayed hops
    LlmDecision decision;
    std::optional<Action> action;
    bool performed = false;
    bool via_shortcut = false;
    bool risky = false;
    bool confirmed = false;
    bool rejected = false;
    std::string note;  // extra prompt note this step carried
};

struct RunTrace {
    std::string task;
    RunOutcome outcome = RunOutcome::Error;
    std::string error;
    bool shortcut_fired = false;
    double shortcut_similarity = -1.0;
    int llm_decided_actions = 0;  // actions executed because the model chose them
    int action_llm_calls = 0;     // action-purpose completions issued
    std::vector<TraceStep> steps;
    PiiMaskTable pii;
    std::vector<std::string> warnings;
};

std::vector<std::string> default_risk_phrases();  // warning, delete, remove, call, send

// The screen the agent reasons over: the union of scroll windows when
// compose_scroll is on, the raw current view otherwise.
UiState composed_screen(Environment& env, bool compose_scroll);

// An action needs confirmation when the model flagged it, when any group
// member is a declared-destructive target, or when the rendered line contains
// a risk phrase as a whole word (case-insensitive).
bool gate_risky(const LlmDecision& decision, const HtmlView& view,
                const std::vector<int>& destructive_ids,
                const std::vector<std::string>& phrases = default_risk_phrases());

// Maps a parsed decision onto the element behind its prompt id: tap clicks
// buttons, toggles checkboxes and scrolls scrollers; input types into inputs.
// Throws EnvError on a class/kind mismatch.
Action decision_to_action(const LlmDecision& decision, const HtmlView& view, const UiState& full);

// Runs one task end to end: optional memory shortcut replay, then the model
// loop. A malformed answer is retried once with a format reminder; a vetoed
// risky action feeds a rejection note into the next prompt.
RunTrace run_task(Environment& env, LlmBackend& llm, CostLedger* ledger,
                  const SessionResources& resources, const std::string& task,
                  const SessionConfig& config = {});

}  // namespace guipilot
