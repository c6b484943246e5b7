#include "guipilot/synth_backend.hpp"

#include <regex>
#include <sstream>
#include <stdexcept>

namespace guipilot {

std::string unescape_html(const std::string& text) {
    std::string out = text;
    auto replace_all = [&](const std::string& from, const std::string& to) {
        std::size_t pos = 0;
        while ((pos = out.find(from, pos)) != std::string::npos) {
            out.replace(pos, from.size(), to);
            pos += to.size();
        }
    };
    replace_all("&lt;", "<");
    replace_all("&gt;", ">");
    replace_all("&amp;", "&");
    return out;
}

std::vector<ParsedHtmlLine> parse_html_lines(const std::string& html) {
    static const std::regex line_re(
        R"re(^<(button|checkbox|scroller|input|p) id=(\d+)((?: [a-z]+="[^"]*")*)>(.*)$)re");
    static const std::regex label_re(R"re( label="([^"]*)")re");
    std::vector<ParsedHtmlLine> lines;
    std::istringstream in(html);
    std::string raw;
    while (std::getline(in, raw)) {
        std::smatch m;
        if (!std::regex_match(raw, m, line_re)) continue;
        ParsedHtmlLine line;
        line.tag = m[1];
        line.id = std::stoi(m[2]);
        std::string attrs = m[3];
        std::smatch lm;
        if (std::regex_search(attrs, lm, label_re)) line.label = unescape_html(lm[1]);
        std::string rest = m[4];
        auto close = rest.rfind("</");
        if (close != std::string::npos) rest = rest.substr(0, close);
        auto br = rest.find("<br>");
        if (br != std::string::npos) rest = rest.substr(0, br);
        line.text_head = unescape_html(rest);
        lines.push_back(std::move(line));
    }
    return lines;
}

std::string prompt_html_block(const std::string& prompt, const std::string& end_marker) {
    auto start = prompt.find("UI state:\n");
    auto end = prompt.find(end_marker);
    if (start == std::string::npos || end == std::string::npos || end <= start) return "";
    start += std::string("UI state:\n").size();
    return prompt.substr(start, end - start);
}

std::string SynthBackend::complete(const LlmRequest& request) {
    std::string prompt = request.full_text();
    auto consider = prompt.find("Consider the element with id=");
    if (consider != std::string::npos) {
        int id = std::stoi(prompt.substr(consider + std::string("Consider the element with id=").size()));
        for (const auto& line : parse_html_lines(prompt_html_block(prompt, "\nConsider the element"))) {
            if (line.id != id) continue;
            std::string name = line.display();
            if (line.tag == "button") return "tap the '" + name + "' button";
            if (line.tag == "checkbox") return "toggle the '" + name + "' checkbox";
            if (line.tag == "input") return "enter text into the '" + name + "' field";
            if (line.tag == "scroller")
                return "scroll the '" + (name.empty() ? std::string("items") : name) + "' list";
            return "read '" + name + "'";
        }
        throw std::runtime_error("synth backend: id " + std::to_string(id) + " not in the prompt view");
    }
    auto summarize = prompt.find("\nSummarize, in one short sentence");
    if (summarize != std::string::npos) {
        std::vector<std::string> names;
        for (const auto& line : parse_html_lines(prompt_html_block(prompt, "\nSummarize,"))) {
            if (line.tag == "p" || line.display().empty()) continue;
            names.push_back("'" + line.display() + "'");
            if (names.size() == 3) break;
        }
        if (names.empty()) return "view information";
        std::string joined = names[0];
        for (std::size_t i = 1; i < names.size(); ++i) joined += ", " + names[i];
        return "interact with " + joined;
    }
    throw std::runtime_error("synth backend only answers summary prompts (purpose '" +
                             request.purpose + "')");
}

}  // namespace guipilot
