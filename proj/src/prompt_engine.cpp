#include "guipilot/prompt_engine.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

namespace guipilot {

namespace {

const char* kDefaultPreamble =
    "You are a smartphone assistant to help users complete tasks by interacting with mobile apps. "
    "Given a task, the previous UI actions, and the content of the current UI state, your job is to "
    "decide whether the task is already finished and, if not, which UI element in the current UI "
    "state should be interacted with.";

const char* kDefaultOutputRequirements =
    "Your answer must strictly follow the format below, and you must not output the id or the input "
    "in any other form:\n"
    "- id=<id number> - action=<tap/input> input text=<text or N/A> (in the event of task "
    "completion, id=-1)";

const char* kDefaultRiskClause =
    "If this action potentially leads to a change of user data or server state that requires user "
    "confirmation, please answer requires_confirmation=Yes)\n"
    "Extend your answer with: - requires_confirmation=<Yes/No>";

const char* kDefaultCotRequirements =
    "Your answer should always use the following format:\n"
    "1. Completing this task on a smartphone usually involves these steps: <?>.\n"
    "2. Analyses of the relations between the task and the previous UI actions and current UI "
    "state: \n"
    "3. Based on the previous actions, is the task already finished? <Y/N>. The next step should "
    "be <?/None>.\n"
    "4. Can the task be proceeded with the current UI state? <Y/N>. Fill in the blanks about the "
    "next one interaction: - id=<id number> - action=<tap/input> - input text=<text or N/A>.";

const char* kDefaultSummarizeElement =
    "A smartphone app named '{app}' is showing the following UI state:\n"
    "{html}\n"
    "Consider the element with id={id}. Describe, in one short sentence, the task a user would "
    "accomplish by interacting with this element. Answer with the task description only.";

const char* kDefaultUiFunction =
    "A smartphone app named '{app}' is showing the following UI state:\n"
    "{html}\n"
    "Summarize, in one short sentence, what a user can do on this UI state. Answer with the "
    "summary only.";

std::string replace_all(std::string text, const std::string& from, const std::string& to) {
    size_t pos = 0;
    while ((pos = text.find(from, pos)) != std::string::npos) {
        text.replace(pos, from.size(), to);
        pos += to.size();
    }
    return text;
}

std::string read_override(const std::filesystem::path& dir, const std::string& name,
                          const std::string& fallback) {
    std::filesystem::path file = dir / (name + ".txt");
    if (!std::filesystem::exists(file)) return fallback;
    std::ifstream in(file);
    std::stringstream buf;
    buf << in.rdbuf();
    std::string content = buf.str();
    while (!content.empty() && (content.back() == '\n' || content.back() == '\r')) content.pop_back();
    return content;
}

std::string trim(const std::string& s) {
    size_t begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    size_t end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

// One line of a model response, possibly a decision.
std::optional<LlmDecision> parse_line(const std::string& line) {
    static const std::regex id_re(R"(\bid\s*=\s*(-?\d+))", std::regex::icase);
    static const std::regex action_re(R"(\baction\s*=\s*<?([A-Za-z]+)>?)", std::regex::icase);
    static const std::regex text_re(R"(\binput[ _]text\s*=\s*(.*)$)", std::regex::icase);

    std::smatch id_match;
    if (!std::regex_search(line, id_match, id_re)) return std::nullopt;
    LlmDecision d;
    d.prompt_id = std::stoi(id_match[1].str());
    if (d.prompt_id == -1) return d;  // completion; the rest of the line is irrelevant

    std::smatch action_match;
    if (!std::regex_search(line, action_match, action_re)) return std::nullopt;
    std::string kind = lower(action_match[1].str());
    if (kind != "tap" && kind != "input") return std::nullopt;
    d.kind = kind;

    std::smatch text_match;
    std::string text;
    bool has_text = false;
    if (std::regex_search(line, text_match, text_re)) {
        text = trim(text_match[1].str());
        // strip a trailing requires_confirmation clause if it shares the line
        static const std::regex conf_tail(R"(\s*-?\s*requires_confirmation\s*=.*$)", std::regex::icase);
        text = std::regex_replace(text, conf_tail, "");
        text = trim(text);
        has_text = !text.empty() && lower(text) != "n/a";
    }
    if (d.kind == "input") d.input_text = has_text ? text : "";
    if (d.kind == "tap") d.input_text = std::nullopt;
    return d;
}

bool line_confirms(const std::string& line) {
    static const std::regex conf_re(R"(\brequires_confirmation\s*=\s*<?(yes|y)\b)", std::regex::icase);
    return std::regex_search(line, conf_re);
}

}  // namespace

PromptTemplates PromptTemplates::defaults() {
    PromptTemplates t;
    t.system_preamble = kDefaultPreamble;
    t.output_requirements = kDefaultOutputRequirements;
    t.risk_clause = kDefaultRiskClause;
    t.cot_requirements = kDefaultCotRequirements;
    t.summarize_element = kDefaultSummarizeElement;
    t.ui_function = kDefaultUiFunction;
    return t;
}

PromptTemplates PromptTemplates::from_dir(const std::string& dir) {
    std::filesystem::path p(dir);
    if (!std::filesystem::is_directory(p))
        throw std::runtime_error("template directory '" + dir + "' does not exist");
    PromptTemplates t = defaults();
    t.system_preamble = read_override(p, "system_preamble", t.system_preamble);
    t.output_requirements = read_override(p, "output_requirements", t.output_requirements);
    t.risk_clause = read_override(p, "risk_clause", t.risk_clause);
    t.cot_requirements = read_override(p, "cot_requirements", t.cot_requirements);
    t.summarize_element = read_override(p, "summarize_element", t.summarize_element);
    t.ui_function = read_override(p, "ui_function", t.ui_function);
    return t;
}

std::string PromptBundle::user_text() const {
    std::string out = task_line;
    out += "\n\n";
    out += history_block;
    out += "\n\n";
    out += ui_block;
    out += "\n\n";
    out += output_requirements;
    if (!risk_clause.empty()) {
        out += "\n";
        out += risk_clause;
    }
    return out;
}

std::string PromptBundle::full_text() const { return system_preamble + "\n\n" + user_text(); }

std::string render_history(const std::vector<HistoryItem>& history) {
    if (history.empty()) return "Previous UI actions:\nNone";
    std::string out = "Previous UI actions:";
    for (size_t i = 0; i < history.size(); ++i) {
        out += "\nstep " + std::to_string(i + 1) + ": " + history[i].kind_word + " on '" +
               history[i].label + "'";
        if (history[i].input_text.has_value()) out += " with text '" + *history[i].input_text + "'";
    }
    return out;
}

PromptBundle build_action_prompt(const PromptTemplates& templates, const std::string& task,
                                 const std::vector<HistoryItem>& history, const HtmlView& view,
                                 bool with_risk_clause, const std::string& extra_note) {
    PromptBundle bundle;
    bundle.system_preamble = templates.system_preamble;
    bundle.task_line = "Task: " + task;
    bundle.history_block = render_history(history);
    if (!extra_note.empty()) bundle.history_block += "\n" + extra_note;
    bundle.ui_block = "Current UI state:\n" + view.text();
    bundle.output_requirements = templates.output_requirements;
    if (with_risk_clause) bundle.risk_clause = templates.risk_clause;
    return bundle;
}

LlmDecision parse_decision(const std::string& raw, const HtmlView& view) {
    std::optional<LlmDecision> best;
    bool confirmation = false;
    std::istringstream stream(raw);
    std::string line;
    while (std::getline(stream, line)) {
        if (line_confirms(line)) confirmation = true;
        auto candidate = parse_line(line);
        if (candidate) {
            if (line_confirms(line)) candidate->requires_confirmation = true;
            best = candidate;
        }
    }
    if (!best)
        throw FormatError("response contains no action line of the form '- id=<n> - action=<tap/input> - input text=<text or N/A>'");
    if (confirmation) best->requires_confirmation = true;
    if (best->prompt_id != -1 && !view.id_map.count(best->prompt_id))
        throw RangeError("id " + std::to_string(best->prompt_id) + " is not present in the UI state");
    if (best->prompt_id == -1) {
        best->kind.clear();
        best->input_text = std::nullopt;
    }
    return *best;
}

std::string render_decision(const LlmDecision& decision) {
    std::string out;
    if (decision.prompt_id == -1) {
        out = "- id=-1";
    } else if (decision.kind == "input") {
        std::string text = decision.input_text.value_or("");
        out = "- id=" + std::to_string(decision.prompt_id) + " - action=input - input text=" +
              (text.empty() ? "N/A" : text);
    } else {
        out = "- id=" + std::to_string(decision.prompt_id) + " - action=tap - input text=N/A";
    }
    if (decision.requires_confirmation) out += " - requires_confirmation=Yes";
    return out;
}

PromptBundle build_cot_prompt(const PromptTemplates& templates, const std::string& task,
                              const std::vector<HistoryItem>& history, const HtmlView& view,
                              const LlmDecision& correct_action) {
    PromptBundle bundle = build_action_prompt(templates, task, history, view, false);
    bundle.output_requirements =
        "The correct next interaction is known to be: " + render_decision(correct_action) +
        "\nExplain the reasoning that leads to this interaction.\n" + templates.cot_requirements;
    return bundle;
}

bool has_cot_sections(const std::string& response) {
    for (int n = 1; n <= 4; ++n) {
        std::regex anchor("(^|\\n)\\s*" + std::to_string(n) + "\\.");
        if (!std::regex_search(response, anchor)) return false;
    }
    return true;
}

std::string build_summarize_element_prompt(const PromptTemplates& templates, const std::string& app_name,
                                           const HtmlView& view, int prompt_id) {
    std::string out = replace_all(templates.summarize_element, "{app}", app_name);
    out = replace_all(out, "{html}", view.text());
    out = replace_all(out, "{id}", std::to_string(prompt_id));
    return out;
}

std::string build_ui_function_prompt(const PromptTemplates& templates, const std::string& app_name,
                                     const HtmlView& view) {
    std::string out = replace_all(templates.ui_function, "{app}", app_name);
    out = replace_all(out, "{html}", view.text());
    return out;
}

}  // namespace guipilot
