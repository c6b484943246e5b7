#pragma once

#include <optional>
#include <string>
#include <vector>

#include "guipilot/serializer.hpp"

namespace guipilot {

// Prompt text blocks. Defaults are compiled in; from_dir overrides any block
// with the content of <name>.txt in the given directory.
struct PromptTemplates {
    std::string system_preamble;
    std::string output_requirements;
    std::string risk_clause;
    std::string cot_requirements;
    std::string summarize_element;  // placeholders: {app} {html} {id}
    std::string ui_function;        // placeholders: {app} {html}

    static PromptTemplates defaults();
    static PromptTemplates from_dir(const std::string& dir);
};

// Assembled prompt, kept in blocks so backends can split system from user
// content. full_text() is the canonical byte sequence used for hashing,
// scripted assertions and token accounting.
struct PromptBundle {
    std::string system_preamble;
    std::string task_line;
    std::string history_block;
    std::string ui_block;
    std::string output_requirements;
    std::string risk_clause;  // empty when the risk gate is off

    std::string user_text() const;
    std::string full_text() const;
};

struct HistoryItem {
    std::string kind_word;  // "tap" or "input"
    std::string label;
    std::optional<std::string> input_text;
};

// Rendered as "step i: tap on 'X'" / "step i: input on 'X' with text 'v'".
std::string render_history(const std::vector<HistoryItem>& history);

PromptBundle build_action_prompt(const PromptTemplates& templates, const std::string& task,
                                 const std::vector<HistoryItem>& history, const HtmlView& view,
                                 bool with_risk_clause, const std::string& extra_note = "");

// Response parse errors. FormatError: no action line found (the agent retries
// once with a format reminder). RangeError: the id does not resolve.
class FormatError : public std::runtime_error {
public:
    explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};
class RangeError : public std::runtime_error {
public:
    explicit RangeError(const std::string& what) : std::runtime_error(what) {}
};

// A parsed model decision. prompt_id -1 means "task complete" and carries no
// action. kind is "tap" or "input"; input_text is present exactly for input.
struct LlmDecision {
    int prompt_id = -1;
    std::string kind;
    std::optional<std::string> input_text;
    bool requires_confirmation = false;

    bool operator==(const LlmDecision&) const = default;
};

// Scans the response for lines of the shape
//   - id=<n> - action=<tap/input> - input text=<text or N/A>
// tolerating surrounding prose and missing dashes; the last well-formed line
// wins, which lets chain-of-thought answers end with the actual action.
LlmDecision parse_decision(const std::string& raw, const HtmlView& view);

// Canonical single-line rendering; parse_decision(render_decision(d)) == d.
std::string render_decision(const LlmDecision& decision);

// Teaching prompt: action prompt with the correct action disclosed and the
// output requirements replaced by the four-part reasoning template.
PromptBundle build_cot_prompt(const PromptTemplates& templates, const std::string& task,
                              const std::vector<HistoryItem>& history, const HtmlView& view,
                              const LlmDecision& correct_action);

// True when a response carries all four numbered reasoning sections.
bool has_cot_sections(const std::string& response);

std::string build_summarize_element_prompt(const PromptTemplates& templates, const std::string& app_name,
                                           const HtmlView& view, int prompt_id);
std::string build_ui_function_prompt(const PromptTemplates& templates, const std::string& app_name,
                                     const HtmlView& view);

}  // namespace guipilot
