#pragma once

#include <string>
#include <vector>

#include "guipilot/llm_gateway.hpp"

namespace guipilot {

// One line of rendered UI markup, reduced to what a scripted or synthetic
// responder needs: the tag, the prompt id and a human-readable name.
struct ParsedHtmlLine {
    std::string tag;
    int id = -1;
    std::string label;
    std::string text_head;  // first text fragment, entities decoded

    std::string display() const { return label.empty() ? text_head : label; }
};

std::string unescape_html(const std::string& text);
std::vector<ParsedHtmlLine> parse_html_lines(const std::string& html);

// Extracts the markup lines out of a prompt: everything between the
// "UI state:" header and end_marker.
std::string prompt_html_block(const std::string& prompt, const std::string& end_marker);

// Deterministic stand-in for a language model on summary prompts: derives the
// answer from the element's tag and label. Task-decision prompts are out of
// scope and raise.
class SynthBackend : public LlmBackend {
public:
    std::string complete(const LlmRequest& request) override;
    std::string name() const override { return "synth"; }
};

}  // namespace guipilot
