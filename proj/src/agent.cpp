#include "guipilot/agent.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>
#include <utility>

#include "guipilot/serializer.hpp"

namespace guipilot {

std::string outcome_name(RunOutcome outcome) {
    switch (outcome) {
        case RunOutcome::CompletedByModel: return "completed";
        case RunOutcome::ShortcutCompleted: return "shortcut_completed";
        case RunOutcome::MaxStepsExceeded: return "max_steps_exceeded";
        case RunOutcome::Error: return "error";
    }
    return "error";
}

std::vector<std::string> default_risk_phrases() {
    return {"warning", "delete", "remove", "call", "send"};
}

namespace {

const HtmlLine* line_for(const HtmlView& view, int prompt_id) {
    for (const auto& line : view.lines) {
        if (line.prompt_id == prompt_id) return &line;
    }
    return nullptr;
}

std::string first_fragment(const std::string& text) {
    auto pos = text.find("<br>");
    return pos == std::string::npos ? text : text.substr(0, pos);
}

std::string display_label(const HtmlView& view, int prompt_id) {
    const HtmlLine* line = line_for(view, prompt_id);
    if (!line) return "";
    if (!line->label.empty()) return line->label;
    return first_fragment(line->text);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

bool contains_word(const std::string& haystack, const std::string& word) {
    auto is_word = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; };
    std::size_t pos = 0;
    while ((pos = haystack.find(word, pos)) != std::string::npos) {
        bool left_ok = pos == 0 || !is_word(haystack[pos - 1]);
        std::size_t end = pos + word.size();
        bool right_ok = end >= haystack.size() || !is_word(haystack[end]);
        if (left_ok && right_ok) return true;
        pos += 1;
    }
    return false;
}

// Leak check after masking. Name spans are whole words so "Bob" inside
// "Bobby" is not a leak; emails and phones match as substrings.
std::string mask_and_check(const std::string& text, PiiMaskTable& table, const PiiConfig& config) {
    std::string masked = mask_pii(text, table, config);
    for (const auto& span : table.spans) {
        bool leaked = span.category == "name" ? contains_word(masked, span.original)
                                              : masked.find(span.original) != std::string::npos;
        if (leaked) throw std::logic_error("privacy filter leaked a " + span.category + " span");
    }
    return masked;
}

std::string join_notes(const std::string& a, const std::string& b) {
    if (a.empty()) return b;
    if (b.empty()) return a;
    return a + "\n" + b;
}

HistoryItem history_item(const LlmDecision& decision, const HtmlView& view) {
    HistoryItem item;
    item.kind_word = decision.kind;
    item.label = display_label(view, decision.prompt_id);
    if (decision.kind == "input") item.input_text = decision.input_text.value_or("");
    return item;
}

}  // namespace

UiState composed_screen(Environment& env, bool compose_scroll) {
    if (!compose_scroll) return env.current();
    std::vector<UiState> views = env.scroll_views();
    if (views.size() <= 1) return env.current();
    return compose_scrolled(views);
}

bool gate_risky(const LlmDecision& decision, const HtmlView& view,
                const std::vector<int>& destructive_ids, const std::vector<std::string>& phrases) {
    if (decision.requires_confirmation) return true;
    auto it = view.id_map.find(decision.prompt_id);
    if (it == view.id_map.end()) return false;
    for (int member : it->second.local_ids) {
        if (std::find(destructive_ids.begin(), destructive_ids.end(), member) != destructive_ids.end())
            return true;
    }
    const HtmlLine* line = line_for(view, decision.prompt_id);
    if (!line) return false;
    std::string haystack = lower(line->label + " " + line->text);
    for (const auto& phrase : phrases) {
        if (contains_word(haystack, lower(phrase))) return true;
    }
    return false;
}

Action decision_to_action(const LlmDecision& decision, const HtmlView& view, const UiState& full) {
    auto it = view.id_map.find(decision.prompt_id);
    if (it == view.id_map.end())
        throw EnvError("id " + std::to_string(decision.prompt_id) + " is not on the screen");
    int target = it->second.primary_local_id;
    const UiElement* element = find_element(full, target);
    if (!element) throw EnvError("element " + std::to_string(target) + " missing from the screen");

    if (decision.kind == "input") {
        if (element->cls != ElementClass::Input)
            throw EnvError("input action on a non-input element id=" + std::to_string(decision.prompt_id));
        Action a{ActionKind::Input, target, decision.input_text.value_or(""), std::nullopt};
        return a;
    }
    // tap
    switch (element->cls) {
        case ElementClass::Button:
            return Action{ActionKind::Click, target, "", std::nullopt};
        case ElementClass::Checkbox:
            return Action{element->checked.value_or(false) ? ActionKind::Uncheck : ActionKind::Check,
                          target, "", std::nullopt};
        case ElementClass::Scroller:
            if (element->scroll_directions.empty())
                throw EnvError("scroller without directions id=" + std::to_string(decision.prompt_id));
            return Action{ActionKind::Scroll, target, "", element->scroll_directions.front()};
        default:
            throw EnvError("tap on a non-interactive element id=" + std::to_string(decision.prompt_id));
    }
}

namespace {

// Replays a memorized click path. Returns false (with a warning) as soon as
// the live screen stops matching the memorized one; the model loop then takes
// over from wherever the app is.
bool replay_shortcut(Environment& env, const MemoryEntry& entry, const SessionConfig& config,
                     RunTrace& trace, std::vector<HistoryItem>& history) {
    auto click = [&](int local_id, const std::string& label, const std::string& signature,
                     ActionKind kind) -> bool {
        Action a{kind, local_id, "", std::nullopt};
        TraceStep ts;
        ts.index = static_cast<int>(trace.steps.size());
        ts.state_signature = signature;
        ts.via_shortcut = true;
        ts.action = a;
        try {
            env.perform(a);
        } catch (const EnvError& e) {
            trace.warnings.push_back("shortcut replay aborted: " + std::string(e.what()));
            return false;
        }
        ts.performed = true;
        trace.steps.push_back(ts);
        history.push_back(HistoryItem{"tap", label, std::nullopt});
        return true;
    };

    for (std::size_t i = 0; i < entry.ui_elements.size(); ++i) {
        UiState composed = composed_screen(env, config.compose_scroll);
        if (composed.signature != entry.ui_states[i]) {
            trace.warnings.push_back("shortcut replay aborted: screen " + composed.signature +
                                     " does not match memorized " + entry.ui_states[i]);
            return false;
        }
        const ElementRef& hop = entry.ui_elements[i];
        if (!click(hop.local_id, hop.label, composed.signature, ActionKind::Click)) return false;
    }

    UiState composed = composed_screen(env, config.compose_scroll);
    if (composed.signature != entry.ui_states.back()) {
        trace.warnings.push_back("shortcut replay aborted: final screen " + composed.signature +
                                 " does not match memorized " + entry.ui_states.back());
        return false;
    }
    const ElementRef& terminal = entry.terminal_element;
    if (terminal.cls == ElementClass::Button) {
        return click(terminal.local_id, terminal.label, composed.signature, ActionKind::Click);
    }
    if (terminal.cls == ElementClass::Checkbox) {
        const UiElement* element = find_element(composed, terminal.local_id);
        ActionKind kind = element && element->checked.value_or(false) ? ActionKind::Uncheck
                                                                      : ActionKind::Check;
        return click(terminal.local_id, terminal.label, composed.signature, kind);
    }
    // Inputs and scrollers need model-provided content; stop at their screen.
    return true;
}

}  // namespace

RunTrace run_task(Environment& env, LlmBackend& llm, CostLedger* ledger,
                  const SessionResources& resources, const std::string& task,
                  const SessionConfig& config) {
    RunTrace trace;
    trace.task = task;
    env.reset();

    std::vector<HistoryItem> history;

    if (config.use_memory && resources.memory && resources.embedder &&
        !resources.memory->simulated_tasks.empty()) {
        ShortcutDecision sd = decide_shortcut(task, *resources.memory, *resources.embedder, config.gamma);
        trace.shortcut_similarity = sd.similarity;
        if (sd.fired) {
            trace.shortcut_fired = true;
            replay_shortcut(env, *sd.entry, config, trace, history);
        }
    }

    std::string next_note;
    for (int step = 0; step < config.max_steps; ++step) {
        UiState composed = composed_screen(env, config.compose_scroll);

        std::map<int, std::string> hints;
        if (config.use_memory && resources.memory && resources.embedder &&
            !resources.memory->simulated_tasks.empty()) {
            auto selected = top_k(task, *resources.memory, *resources.embedder, config.k);
            HintPlan plan = build_hint_plan(selected, *resources.memory);
            if (const auto* state_hints = plan.for_state(composed.signature)) hints = *state_hints;
        }
        RenderOptions render_options;
        render_options.utg = resources.utg;
        render_options.hints = hints;
        HtmlView view = render_state(composed, render_options);

        std::string note = std::exchange(next_note, std::string());
        auto ask = [&](const std::string& extra_note) {
            PromptBundle bundle =
                build_action_prompt(config.templates, task, history, view, config.risk_gate, extra_note);
            std::string user = bundle.user_text();
            if (config.privacy_filter) user = mask_and_check(user, trace.pii, config.pii);
            LlmRequest request{bundle.system_preamble, user, config.temperature, "action"};
            ++trace.action_llm_calls;
            return complete(llm, ledger, request);
        };

        std::string response = ask(note);
        LlmDecision decision;
        bool parsed = false;
        bool out_of_range = false;
        try {
            decision = parse_decision(response, view);
            parsed = true;
        } catch (const FormatError&) {
            response = ask(join_notes(note, "Answer ONLY in the required format."));
            try {
                decision = parse_decision(response, view);
                parsed = true;
            } catch (const FormatError& e) {
                trace.outcome = RunOutcome::Error;
                trace.error = e.what();
            } catch (const RangeError&) {
                out_of_range = true;
            }
        } catch (const RangeError&) {
            out_of_range = true;
        }

        TraceStep ts;
        ts.index = static_cast<int>(trace.steps.size());
        ts.state_signature = composed.signature;
        ts.view_text = config.privacy_filter ? mask_pii(view.text(), trace.pii, config.pii) : view.text();
        ts.response = response;
        ts.note = note;

        if (!parsed) {
            trace.steps.push_back(ts);
            if (out_of_range) {
                next_note = "The previous answer referenced an id that is not on the screen.";
                continue;
            }
            return trace;  // outcome already set to Error
        }

        if (config.privacy_filter && decision.input_text)
            decision.input_text = unmask_pii(*decision.input_text, trace.pii);
        ts.decision = decision;

        if (decision.prompt_id == -1) {
            trace.steps.push_back(ts);
            trace.outcome = trace.shortcut_fired && trace.llm_decided_actions == 0
                                ? RunOutcome::ShortcutCompleted
                                : RunOutcome::CompletedByModel;
            return trace;
        }

        if (config.risk_gate) {
            ts.risky = gate_risky(decision, view, env.risky_targets());
            if (ts.risky) {
                std::string describe = decision.kind + " on '" + display_label(view, decision.prompt_id) + "'";
                bool ok = config.confirm ? config.confirm(describe) : config.auto_confirm;
                ts.confirmed = ok;
                if (!ok) {
                    ts.rejected = true;
                    trace.steps.push_back(ts);
                    next_note = "The previous action was rejected by the user.";
                    continue;
                }
            }
        }

        try {
            Action action = decision_to_action(decision, view, composed);
            ts.action = action;
            env.perform(action);
            ts.performed = true;
            ++trace.llm_decided_actions;
            history.push_back(history_item(decision, view));
            if (!env.last_action_had_effect()) next_note = "The previous action had no effect.";
        } catch (const EnvError&) {
            next_note = "The previous action could not be executed on the current screen.";
        }
        trace.steps.push_back(ts);
    }

    trace.outcome = RunOutcome::MaxStepsExceeded;
    return trace;
}

}  // namespace guipilot
