#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "guipilot/environment.hpp"
#include "guipilot/explorer.hpp"
#include "guipilot/prompt_engine.hpp"
#include "helpers.hpp"

using namespace guipilot;
using namespace guipilot::testing;
using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Parsing only consults the id map's keys; lines are irrelevant.
HtmlView view_with_ids(int count) {
    HtmlView view;
    for (int i = 0; i < count; ++i) view.id_map[i] = IdTarget{"sig", {i}, i};
    return view;
}

HtmlView tiny_view() {
    return render_state(state_of(with_children(plain(""), {button("A"), button("B")})));
}

}  // namespace

TEST_CASE("history renders step lines") {
    CHECK(render_history({}) == "Previous UI actions:\nNone");
    std::vector<HistoryItem> items = {
        {"tap", "Alarms", std::nullopt},
        {"input", "Hours", std::string("10")},
        {"tap", "Save alarm", std::nullopt},
    };
    CHECK(render_history(items) ==
          "Previous UI actions:\n"
          "step 1: tap on 'Alarms'\n"
          "step 2: input on 'Hours' with text '10'\n"
          "step 3: tap on 'Save alarm'");
}

TEST_CASE("action prompts assemble from fixed blocks") {
    PromptTemplates t = PromptTemplates::defaults();
    HtmlView view = tiny_view();
    std::vector<HistoryItem> history = {{"tap", "A", std::nullopt}};

    PromptBundle b = build_action_prompt(t, "do the thing", history, view, true, "Note of advice.");
    CHECK(b.system_preamble == t.system_preamble);
    CHECK(b.task_line == "Task: do the thing");
    CHECK(b.history_block == "Previous UI actions:\nstep 1: tap on 'A'\nNote of advice.");
    CHECK(b.ui_block == "Current UI state:\n<button id=0 label=\"A\">\n<button id=1 label=\"B\">");
    CHECK(b.risk_clause == t.risk_clause);
    CHECK(b.user_text() == b.task_line + "\n\n" + b.history_block + "\n\n" + b.ui_block + "\n\n" +
                               t.output_requirements + "\n" + t.risk_clause);
    CHECK(b.full_text() == t.system_preamble + "\n\n" + b.user_text());

    PromptBundle safe = build_action_prompt(t, "do the thing", {}, view, false);
    CHECK(safe.risk_clause.empty());
    CHECK(safe.history_block == "Previous UI actions:\nNone");
    CHECK(safe.user_text().find("requires_confirmation") == std::string::npos);

    // The output contract and risk clause are load-bearing for parsing and
    // for scripted replay; pin their wording.
    CHECK(t.output_requirements ==
          "Your answer must strictly follow the format below, and you must not output the id or "
          "the input in any other form:\n"
          "- id=<id number> - action=<tap/input> input text=<text or N/A> (in the event of task "
          "completion, id=-1)");
    CHECK(t.risk_clause ==
          "If this action potentially leads to a change of user data or server state that "
          "requires user confirmation, please answer requires_confirmation=Yes)\n"
          "Extend your answer with: - requires_confirmation=<Yes/No>");
    CHECK(t.system_preamble.rfind("You are a smartphone assistant", 0) == 0);
}

TEST_CASE("full action prompt matches the pinned golden transcript") {
    AppDefinition app = load_app(repo_path("apps/clock.json"));
    SimEnvironment env(app);
    Utg utg = explore(env, {4000, 7, 0.05});
    HtmlView view = render_state(utg.node(utg.initial)->representative, {&utg, {}});
    PromptBundle bundle = build_action_prompt(PromptTemplates::defaults(),
                                              "Create an alarm at 10:00 am", {}, view, true);
    std::string golden = read_file(fixture_path("golden_action_prompt.txt"));
    CHECK(bundle.full_text() == golden);
    CHECK(bundle.full_text().find("<button id=5>Alarms<br>0 items</button>") != std::string::npos);
}

TEST_CASE("template overrides load from a directory") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "guipilot_templates_test";
    fs::remove_all(dir);
    fs::create_directories(dir);
    {
        std::ofstream(dir / "system_preamble.txt") << "custom preamble\n\n";
        std::ofstream(dir / "risk_clause.txt") << "careful now\nplease\r\n";
    }
    PromptTemplates t = PromptTemplates::from_dir(dir.string());
    CHECK(t.system_preamble == "custom preamble");
    CHECK(t.risk_clause == "careful now\nplease");
    CHECK(t.output_requirements == PromptTemplates::defaults().output_requirements);
    CHECK(t.cot_requirements == PromptTemplates::defaults().cot_requirements);
    fs::remove_all(dir);

    CHECK_THROWS_WITH_AS(PromptTemplates::from_dir((dir / "missing").string()),
                         doctest::Contains("does not exist"), std::runtime_error);
}

TEST_CASE("decision rendering is canonical") {
    CHECK(render_decision({-1, "", std::nullopt, false}) == "- id=-1");
    CHECK(render_decision({3, "tap", std::nullopt, false}) ==
          "- id=3 - action=tap - input text=N/A");
    CHECK(render_decision({2, "input", std::string("10"), false}) ==
          "- id=2 - action=input - input text=10");
    CHECK(render_decision({2, "input", std::string(""), false}) ==
          "- id=2 - action=input - input text=N/A");
    CHECK(render_decision({4, "tap", std::nullopt, true}) ==
          "- id=4 - action=tap - input text=N/A - requires_confirmation=Yes");
    CHECK(render_decision({-1, "", std::nullopt, true}) == "- id=-1 - requires_confirmation=Yes");
}

TEST_CASE("the labeled extraction corpus parses exactly") {
    json doc = json::parse(read_file(fixture_path("parse_cases.json")));
    HtmlView view = view_with_ids(static_cast<int>(doc["view_ids"].size()));
    int passed = 0;
    for (const auto& c : doc["cases"]) {
        INFO("case: ", c["name"].get<std::string>());
        std::string response = c["response"].get<std::string>();
        const json& expect = c["expect"];
        if (expect.contains("error")) {
            if (expect["error"] == "format") {
                CHECK_THROWS_AS(parse_decision(response, view), FormatError);
            } else {
                CHECK_THROWS_AS(parse_decision(response, view), RangeError);
            }
            ++passed;
            continue;
        }
        LlmDecision d = parse_decision(response, view);
        CHECK(d.prompt_id == expect["id"].get<int>());
        CHECK(d.kind == expect.value("kind", std::string{}));
        if (expect.contains("text")) {
            CHECK(d.input_text == expect["text"].get<std::string>());
        } else {
            CHECK_FALSE(d.input_text.has_value());
        }
        CHECK(d.requires_confirmation == expect.value("confirm", false));
        ++passed;
    }
    CHECK(passed == 30);  // the corpus is complete and every case ran
}

TEST_CASE("parse details beyond the corpus") {
    HtmlView view = view_with_ids(8);

    // Completion clears any action words on the same line.
    LlmDecision fin = parse_decision("- id=-1 - action=tap - input text=whatever", view);
    CHECK(fin.prompt_id == -1);
    CHECK(fin.kind.empty());
    CHECK_FALSE(fin.input_text.has_value());

    // Input without any text field falls back to empty text.
    LlmDecision no_field = parse_decision("- id=2 - action=input", view);
    CHECK(no_field.input_text == std::string(""));

    // A confirmation line anywhere marks the decision, before or after it.
    LlmDecision before = parse_decision(
        "requires_confirmation=Yes\n- id=1 - action=tap - input text=N/A", view);
    CHECK(before.requires_confirmation);
    LlmDecision shouty = parse_decision(
        "- id=1 - action=tap - input text=N/A\nRequires_Confirmation = YES", view);
    CHECK(shouty.requires_confirmation);
    LlmDecision bracketed = parse_decision(
        "- id=1 - action=tap - input text=N/A - requires_confirmation=<Yes>", view);
    CHECK(bracketed.requires_confirmation);

    // The confirmation tail never leaks into the typed text.
    LlmDecision tail = parse_decision(
        "- id=2 - action=input - input text=Bob Diaz - requires_confirmation=Yes", view);
    CHECK(tail.input_text == std::string("Bob Diaz"));
    CHECK(tail.requires_confirmation);

    // "N/A" in any case means no text.
    CHECK(parse_decision("- id=2 - action=input - input text=n/a", view).input_text ==
          std::string(""));
    CHECK(parse_decision("- id=2 - action=input - input text=N/a", view).input_text ==
          std::string(""));
}

TEST_CASE("decisions round-trip through their canonical rendering") {
    HtmlView view = view_with_ids(8);
    std::mt19937_64 rng(24680);
    const std::string words = "abcdefghijklmnopqrstuvwxyz0123456789";
    auto safe_text = [&]() {
        // Word characters and single inner spaces or hyphens: free of the
        // hazards (N/A spellings, leading or trailing blanks, newlines,
        // confirmation clauses) that the line format cannot carry.
        int n = 1 + static_cast<int>(rng() % 4);
        std::string out;
        for (int w = 0; w < n; ++w) {
            if (w) out += rng() % 3 == 0 ? '-' : ' ';
            int len = 1 + static_cast<int>(rng() % 6);
            for (int i = 0; i < len; ++i) out += words[rng() % words.size()];
        }
        return out;
    };

    for (int iter = 0; iter < 250; ++iter) {
        LlmDecision d;
        switch (rng() % 3) {
            case 0:
                d.prompt_id = -1;
                break;
            case 1:
                d.prompt_id = static_cast<int>(rng() % 8);
                d.kind = "tap";
                break;
            default:
                d.prompt_id = static_cast<int>(rng() % 8);
                d.kind = "input";
                d.input_text = rng() % 4 == 0 ? std::string() : safe_text();
                break;
        }
        d.requires_confirmation = rng() % 2 == 0;
        CAPTURE(render_decision(d));
        CHECK(parse_decision(render_decision(d), view) == d);
    }
}

TEST_CASE("teaching prompts disclose the correct action") {
    PromptTemplates t = PromptTemplates::defaults();
    HtmlView view = tiny_view();
    LlmDecision correct{1, "tap", std::nullopt, false};
    PromptBundle b = build_cot_prompt(t, "open B", {}, view, correct);
    CHECK(b.risk_clause.empty());
    CHECK(b.output_requirements ==
          "The correct next interaction is known to be: - id=1 - action=tap - input text=N/A\n"
          "Explain the reasoning that leads to this interaction.\n" +
              t.cot_requirements);
    CHECK(b.task_line == "Task: open B");
    CHECK(b.full_text().find(t.cot_requirements) != std::string::npos);
}

TEST_CASE("reasoning sections are detected by their numbered anchors") {
    CHECK(has_cot_sections("1. steps\n2. analysis\n3. N. next tap\n4. Y. - id=1"));
    CHECK(has_cot_sections("  1. a\n\t2. b\n 3. c\n   4. d"));
    CHECK_FALSE(has_cot_sections("1. a\n2. b\n3. c"));
    CHECK_FALSE(has_cot_sections(""));
    CHECK_FALSE(has_cot_sections("1. a 2. b 3. c 4. d"));  // anchors must start lines
    CHECK(has_cot_sections("4. d\n3. c\n2. b\n1. a"));     // order is not enforced
}

TEST_CASE("summary prompts interpolate app, html and id") {
    PromptTemplates t = PromptTemplates::defaults();
    HtmlView view = tiny_view();

    std::string elem = build_summarize_element_prompt(t, "clock", view, 1);
    CHECK(elem ==
          "A smartphone app named 'clock' is showing the following UI state:\n" + view.text() +
              "\nConsider the element with id=1. Describe, in one short sentence, the task a user "
              "would accomplish by interacting with this element. Answer with the task "
              "description only.");

    std::string fn = build_ui_function_prompt(t, "clock", view);
    CHECK(fn ==
          "A smartphone app named 'clock' is showing the following UI state:\n" + view.text() +
              "\nSummarize, in one short sentence, what a user can do on this UI state. Answer "
              "with the summary only.");
    CHECK(fn.find("{app}") == std::string::npos);
    CHECK(fn.find("{html}") == std::string::npos);
}
