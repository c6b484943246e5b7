#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "guipilot/environment.hpp"
#include "guipilot/explorer.hpp"
#include "guipilot/finetune.hpp"
#include "guipilot/memory.hpp"
#include "guipilot/synth_backend.hpp"
#include "helpers.hpp"

using namespace guipilot;
using namespace guipilot::testing;
using nlohmann::json;

namespace {

// Same three-screen chain as the explorer and memory suites.
const char* kChainApp = R"json({
  "name": "chain",
  "initial_state": "a",
  "states": {
    "a": {"root": {"class": "p", "children": [
      {"class": "p", "text": "Screen A"},
      {"class": "button", "label": "Go"},
      {"class": "button", "label": "Self"},
      {"class": "checkbox", "label": "Flag"}
    ]}},
    "b": {"root": {"class": "p", "children": [
      {"class": "p", "text": "Screen B"},
      {"class": "button", "label": "Back"},
      {"class": "button", "label": "Onward"}
    ]}},
    "c": {"root": {"class": "p", "children": [
      {"class": "p", "text": "Screen C"},
      {"class": "button", "label": "Home"},
      {"class": "button", "label": "Dead end"}
    ]}}
  },
  "transitions": [
    {"from": "a", "element": "Go", "action": "click", "to": "b"},
    {"from": "a", "element": "Self", "action": "click", "to": "a"},
    {"from": "b", "element": "Back", "action": "click", "to": "a"},
    {"from": "b", "element": "Onward", "action": "click", "to": "c"},
    {"from": "c", "element": "Home", "action": "click", "to": "a"}
  ]
})json";

struct ChainFixture {
    AppDefinition app;
    SimEnvironment env;
    Utg utg;
    AppMemory memory;

    ChainFixture() : app(app_from_json(json::parse(kChainApp), "chain")), env(app) {
        utg = explore(env, {400, 11, 0.05});
        SynthBackend synth;
        memory = build_memory(utg, synth, nullptr, PromptTemplates::defaults(), "chain", {3, 1, ""});
    }

    size_t total_hops() const {
        size_t n = 0;
        for (const auto& e : memory.simulated_tasks) n += e.ui_elements.size();
        return n;
    }
};

const std::string kGoodCot =
    "1. Completing this task usually involves opening the right screen.\n"
    "2. The current UI state lists the entry points.\n"
    "3. Based on the previous actions, the task is not finished. The next step follows.\n"
    "4. Y. Fill in the blanks: - id=1 - action=tap - input text=N/A.";

}  // namespace

TEST_CASE("plain export emits one pair per recorded hop") {
    ChainFixture fx;
    REQUIRE(fx.memory.simulated_tasks.size() == 7);
    REQUIRE(fx.total_hops() == 6);  // 3 on-screen entries, 2 one-hop, 2 two-hop

    std::vector<std::string> warnings;
    std::vector<QaPair> pairs = export_pairs(fx.memory, fx.utg, nullptr, nullptr, {}, &warnings);
    CHECK(warnings.empty());
    REQUIRE(pairs.size() == fx.total_hops());

    const std::string preamble = PromptTemplates::defaults().system_preamble;
    for (const auto& pair : pairs) {
        CHECK(pair.system == preamble);
        CHECK_FALSE(pair.cot);
        CHECK(pair.prompt.find("Task: " + pair.task) == 0);
        CHECK(pair.prompt.find("Current UI state:\n") != std::string::npos);
        // Training targets never carry the risk clause.
        CHECK(pair.prompt.find("requires_confirmation") == std::string::npos);
        CHECK(pair.completion.rfind("- id=", 0) == 0);
        CHECK(pair.completion.find("- action=tap - input text=N/A") != std::string::npos);
    }

    // The exported question is byte-identical to the prompt the agent would
    // send at that step: same unmerged view, same accumulated history.
    const UtgNode* node_a = fx.utg.node(fx.utg.initial);
    HtmlView view_a = render_state(node_a->representative);

    const QaPair& back0 = pairs[0];  // first hop of the "Back" entry
    CHECK(back0.task == "tap the 'Back' button");
    CHECK(back0.step_index == 0);
    CHECK(back0.state_signature == fx.utg.initial);
    CHECK(back0.prompt ==
          build_action_prompt(PromptTemplates::defaults(), back0.task, {}, view_a, false).user_text());
    CHECK(back0.completion == "- id=1 - action=tap - input text=N/A");  // Go renders as id 1

    // Two-hop entry: second pair sees the first click in its history.
    const QaPair& home1 = pairs[3];
    CHECK(home1.task == "tap the 'Home' button");
    CHECK(home1.step_index == 1);
    std::string sig_b = fx.memory.simulated_tasks[5].ui_states[1];
    const UtgNode* node_b = fx.utg.node(sig_b);
    HtmlView view_b = render_state(node_b->representative);
    std::vector<HistoryItem> history = {{"tap", "Go", std::nullopt}};
    CHECK(home1.prompt ==
          build_action_prompt(PromptTemplates::defaults(), home1.task, history, view_b, false)
              .user_text());
    CHECK(home1.state_signature == sig_b);
    CHECK(home1.prompt.find("step 1: tap on 'Go'") != std::string::npos);

    // Pair order follows memory order; step indexes restart per task.
    CHECK(pairs[1].task == "tap the 'Onward' button");
    CHECK(pairs[2].task == "tap the 'Home' button");
    CHECK(pairs[2].step_index == 0);
    CHECK(pairs[4].task == "tap the 'Dead end' button");
    CHECK(pairs[4].step_index == 0);
    CHECK(pairs[5].step_index == 1);
}

TEST_CASE("reasoning export keeps only answers with all four sections") {
    ChainFixture fx;
    FinetuneOptions options;
    options.chain_of_thought = true;

    SUBCASE("well-formed answers export directly") {
        FixedBackend teacher(kGoodCot);
        CostLedger ledger;
        std::vector<std::string> warnings;
        std::vector<QaPair> pairs =
            export_pairs(fx.memory, fx.utg, &teacher, &ledger, options, &warnings);
        REQUIRE(pairs.size() == fx.total_hops());
        CHECK(warnings.empty());
        CHECK(teacher.calls() == static_cast<int>(fx.total_hops()));
        CHECK(ledger.calls_for("cot") == static_cast<int>(fx.total_hops()));
        for (const auto& pair : pairs) {
            CHECK(pair.cot);
            CHECK(pair.completion == kGoodCot);
            CHECK(has_cot_sections(pair.completion));
            CHECK(pair.prompt.find("The correct next interaction is known to be: - id=") !=
                  std::string::npos);
            CHECK(pair.prompt.find(PromptTemplates::defaults().cot_requirements) != std::string::npos);
        }
    }

    SUBCASE("a malformed answer is retried and then accepted") {
        std::vector<ScriptEntry> entries;
        for (size_t i = 0; i < fx.total_hops(); ++i) {
            entries.push_back({"thinking about it...", std::nullopt});
            entries.push_back({kGoodCot, std::nullopt});
        }
        ScriptedBackend teacher(std::move(entries));
        std::vector<std::string> warnings;
        std::vector<QaPair> pairs =
            export_pairs(fx.memory, fx.utg, &teacher, nullptr, options, &warnings);
        CHECK(pairs.size() == fx.total_hops());
        CHECK(warnings.empty());
        CHECK(teacher.remaining() == 0);
    }

    SUBCASE("persistently malformed answers are dropped with a warning") {
        FixedBackend stubborn("1. 2. 3. 4. all on one line never counts");
        std::vector<std::string> warnings;
        std::vector<QaPair> pairs =
            export_pairs(fx.memory, fx.utg, &stubborn, nullptr, options, &warnings);
        CHECK(pairs.empty());
        CHECK(warnings.size() == fx.total_hops());
        CHECK(stubborn.calls() == static_cast<int>(fx.total_hops()) * 3);
        for (const auto& w : warnings) CHECK(w.find("dropped reasoning pair for '") == 0);
    }

    SUBCASE("reasoning export without a teacher raises") {
        CHECK_THROWS_WITH_AS(export_pairs(fx.memory, fx.utg, nullptr, nullptr, options, nullptr),
                             doctest::Contains("needs a backend"), std::invalid_argument);
    }
}

TEST_CASE("stale memory entries are skipped with warnings") {
    ChainFixture fx;

    AppMemory stale;
    MemoryEntry ghost;
    ghost.simulated_task = "ghost walk";
    ghost.ui_states = {"vanished-state", fx.utg.initial};
    ghost.ui_elements = {{"vanished-state", 2, ElementClass::Button, "Go"}};
    ghost.terminal_element = {fx.utg.initial, 2, ElementClass::Button, "Go"};
    stale.simulated_tasks.push_back(ghost);

    MemoryEntry invisible;
    invisible.simulated_task = "press nothing";
    invisible.ui_states = {fx.utg.initial, fx.utg.initial};
    invisible.ui_elements = {{fx.utg.initial, 99, ElementClass::Button, "Phantom"}};
    invisible.terminal_element = {fx.utg.initial, 2, ElementClass::Button, "Go"};
    stale.simulated_tasks.push_back(invisible);

    MemoryEntry good = fx.memory.simulated_tasks[3];  // the one-hop "Back" entry
    stale.simulated_tasks.push_back(good);

    std::vector<std::string> warnings;
    std::vector<QaPair> pairs = export_pairs(stale, fx.utg, nullptr, nullptr, {}, &warnings);
    REQUIRE(warnings.size() == 2);
    CHECK(warnings[0] == "skipped 'ghost walk': state vanished-state missing from the graph");
    CHECK(warnings[1].find("skipped 'press nothing': element 99 not rendered on") == 0);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].task == good.simulated_task);
}

TEST_CASE("pairs round-trip through json lines") {
    QaPair plain;
    plain.system = "sys";
    plain.prompt = "Task: t\n\nCurrent UI state:\n<button id=0>";
    plain.completion = "- id=0 - action=tap - input text=N/A";
    plain.task = "t";
    plain.state_signature = "sig-1";
    plain.step_index = 2;

    QaPair cot;
    cot.system = "sys";
    cot.prompt = "teach me";
    cot.completion = kGoodCot;  // multi-line body must stay one jsonl record
    cot.task = "t2";
    cot.state_signature = "sig-2";
    cot.cot = true;

    CHECK(qa_json(qa_from_json(qa_json(plain))) == qa_json(plain));
    CHECK(qa_json(qa_from_json(qa_json(cot))) == qa_json(cot));

    namespace fs = std::filesystem;
    std::string path = (fs::temp_directory_path() / "finetune_roundtrip_tmp.jsonl").string();
    write_jsonl({plain, cot}, path);
    {
        std::ifstream in(path);
        std::string line;
        int lines = 0;
        while (std::getline(in, line))
            if (!line.empty()) ++lines;
        CHECK(lines == 2);
    }
    {
        std::ofstream out(path, std::ios::app);
        out << "\n\n";  // blank lines are tolerated
    }
    std::vector<QaPair> loaded = read_jsonl(path);
    REQUIRE(loaded.size() == 2);
    CHECK(qa_json(loaded[0]) == qa_json(plain));
    CHECK(qa_json(loaded[1]) == qa_json(cot));
    CHECK(loaded[1].completion.find('\n') != std::string::npos);
    std::remove(path.c_str());

    CHECK_THROWS_WITH_AS(read_jsonl("/nonexistent/pairs.jsonl"), doctest::Contains("cannot read"),
                         std::runtime_error);
}
