// Command-line front end for the pipeline: explore an app, build its memory,
// run tasks, evaluate suites and export training pairs.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <regex>

#include "CLI11.hpp"
#include "guipilot/agent.hpp"
#include "guipilot/bench.hpp"
#include "guipilot/explorer.hpp"
#include "guipilot/finetune.hpp"
#include "guipilot/serializer.hpp"
#include "guipilot/synth_backend.hpp"

using namespace guipilot;

namespace {

// Records every exchange as a replayable script entry with a prompt anchor.
class RecordingBackend : public LlmBackend {
public:
    explicit RecordingBackend(LlmBackend& inner) : inner_(inner) {}

    std::string complete(const LlmRequest& request) override {
        std::string response = inner_.complete(request);
        nlohmann::json entry = {{"response", response}};
        std::string anchor = anchor_for(request.full_text());
        if (!anchor.empty()) entry["expect_substring"] = anchor;
        entries_.push_back(std::move(entry));
        return response;
    }
    std::string name() const override { return inner_.name(); }
    const nlohmann::json& entries() const { return entries_; }

private:
    static std::string anchor_for(const std::string& prompt) {
        auto consider = prompt.find("with id=");
        if (prompt.find("Consider the element with id=") != std::string::npos) {
            auto end = prompt.find(". Describe", consider);
            if (end != std::string::npos) return prompt.substr(consider, end - consider + 10);
        }
        if (prompt.find("\nSummarize, in one short sentence") != std::string::npos) {
            std::string html = prompt_html_block(prompt, "\nSummarize,");
            auto nl = html.find('\n');
            return nl == std::string::npos ? html : html.substr(0, nl);
        }
        return "";
    }

    LlmBackend& inner_;
    nlohmann::json entries_ = nlohmann::json::array();
};

std::unique_ptr<LlmBackend> make_backend(const std::string& kind, const std::string& script_path) {
    if (kind == "synth") return std::make_unique<SynthBackend>();
    if (kind == "script") {
        if (script_path.empty()) throw std::runtime_error("--script is required with the script backend");
        return ScriptedBackend::from_file(script_path);
    }
    if (kind == "remote") return std::make_unique<RemoteBackend>(RemoteBackend::config_from_env());
    throw std::runtime_error("unknown backend '" + kind + "' (use synth, script or remote)");
}

nlohmann::json trace_json(const RunTrace& trace) {
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& s : trace.steps) {
        nlohmann::json row = {
            {"index", s.index},         {"state", s.state_signature}, {"via_shortcut", s.via_shortcut},
            {"performed", s.performed}, {"risky", s.risky},           {"rejected", s.rejected},
        };
        if (!s.via_shortcut) {
            row["decision"] = {{"id", s.decision.prompt_id}, {"kind", s.decision.kind}};
            if (s.decision.input_text) row["decision"]["text"] = *s.decision.input_text;
            row["response"] = s.response;
            row["view"] = s.view_text;
            if (!s.note.empty()) row["note"] = s.note;
        }
        if (s.action) row["action"] = action_json(*s.action);
        steps.push_back(std::move(row));
    }
    nlohmann::json warnings = nlohmann::json::array();
    for (const auto& w : trace.warnings) warnings.push_back(w);
    return nlohmann::json{{"task", trace.task},
                          {"outcome", outcome_name(trace.outcome)},
                          {"error", trace.error},
                          {"shortcut_fired", trace.shortcut_fired},
                          {"shortcut_similarity", trace.shortcut_similarity},
                          {"llm_calls", trace.action_llm_calls},
                          {"actions", trace.llm_decided_actions},
                          {"masked_spans", trace.pii.spans.size()},
                          {"steps", steps},
                          {"warnings", warnings}};
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

struct SessionFlags {
    bool no_memory = false;
    bool no_privacy = false;
    bool no_risk_gate = false;
    bool no_compose = false;
    bool auto_confirm = false;
    int max_steps = 15;
    double gamma = 0.9;
    int k = 3;
    double temperature = 0.25;
    std::string templates_dir;

    void attach(CLI::App* cmd) {
        cmd->add_flag("--no-memory", no_memory, "Skip memory shortcuts and hints");
        cmd->add_flag("--no-privacy", no_privacy, "Send prompts without masking personal data");
        cmd->add_flag("--no-risk-gate", no_risk_gate, "Execute risky actions without confirmation");
        cmd->add_flag("--no-compose", no_compose, "Use raw scroll windows instead of the composed screen");
        cmd->add_flag("--auto-confirm", auto_confirm, "Approve risky actions instead of rejecting them");
        cmd->add_option("--max-steps", max_steps, "Model-decided step budget");
        cmd->add_option("--gamma", gamma, "Shortcut similarity threshold");
        cmd->add_option("--k", k, "Memory entries consulted for hints");
        cmd->add_option("--temperature", temperature, "Sampling temperature for the model");
        cmd->add_option("--templates", templates_dir, "Directory with prompt template overrides");
    }

    SessionConfig config() const {
        SessionConfig c;
        c.max_steps = max_steps;
        c.gamma = gamma;
        c.k = k;
        c.temperature = temperature;
        c.use_memory = !no_memory;
        c.privacy_filter = !no_privacy;
        c.risk_gate = !no_risk_gate;
        c.compose_scroll = !no_compose;
        c.auto_confirm = auto_confirm;
        if (!templates_dir.empty()) c.templates = PromptTemplates::from_dir(templates_dir);
        return c;
    }
};

int run_cli(int argc, char** argv) {
    CLI::App app{"GUI task automation: explore apps, memorize their screens, run and score tasks"};
    app.require_subcommand(1);

    // ---- explore ----
    auto* explore_cmd = app.add_subcommand("explore", "Randomly explore an app and save its transition graph");
    std::string ex_app, ex_out;
    ExploreOptions ex_options;
    explore_cmd->add_option("--app", ex_app, "App definition file")->required();
    explore_cmd->add_option("--out", ex_out, "Output graph file")->required();
    explore_cmd->add_option("--budget", ex_options.budget, "Number of actions to spend");
    explore_cmd->add_option("--seed", ex_options.seed, "Exploration seed");
    explore_cmd->add_option("--restart-prob", ex_options.restart_prob, "Per-step restart probability");
    explore_cmd->callback([&] {
        SimEnvironment env(load_app(ex_app));
        Utg utg = explore(env, ex_options);
        save_utg(utg, ex_out);
        std::cout << "explored " << utg.nodes.size() << " states, " << utg.edges.size() << " transitions -> "
                  << ex_out << "\n";
    });

    // ---- memorize ----
    auto* mem_cmd = app.add_subcommand("memorize", "Build the app memory from an explored graph");
    std::string mem_app, mem_utg, mem_out, mem_backend = "synth", mem_script, mem_emit, mem_templates;
    mem_cmd->add_option("--app", mem_app, "App definition file")->required();
    mem_cmd->add_option("--utg", mem_utg, "Explored transition graph")->required();
    mem_cmd->add_option("--out", mem_out, "Output memory file")->required();
    mem_cmd->add_option("--backend", mem_backend, "synth, script or remote");
    mem_cmd->add_option("--script", mem_script, "Response script for the script backend");
    mem_cmd->add_option("--emit-script-template", mem_emit, "Record the exchanges as a replayable script");
    mem_cmd->add_option("--templates", mem_templates, "Directory with prompt template overrides");
    mem_cmd->callback([&] {
        AppDefinition def = load_app(mem_app);
        Utg utg = load_utg(mem_utg);
        std::unique_ptr<LlmBackend> backend = make_backend(mem_backend, mem_script);
        RecordingBackend recorder(*backend);
        LlmBackend& effective = mem_emit.empty() ? *backend : static_cast<LlmBackend&>(recorder);
        PromptTemplates templates =
            mem_templates.empty() ? PromptTemplates::defaults() : PromptTemplates::from_dir(mem_templates);
        CostLedger ledger;
        MemoryBuildOptions options;
        options.utg_reference = mem_utg;
        AppMemory memory = build_memory(utg, effective, &ledger, templates, def.name, options);
        save_memory(memory, mem_out);
        if (!mem_emit.empty()) write_text_file(mem_emit, recorder.entries().dump(2) + "\n");
        std::cout << "memorized " << memory.simulated_tasks.size() << " tasks, "
                  << memory.ui_functions.size() << " screen summaries (" << ledger.total_calls()
                  << " model calls, " << memory.warnings.size() << " warnings) -> " << mem_out << "\n";
        for (const auto& w : memory.warnings) std::cerr << "warning: " << w << "\n";
    });

    // ---- run ----
    auto* run_cmd = app.add_subcommand("run", "Run one task against an app");
    std::string run_app, run_utg, run_memory, run_task_text, run_backend = "script", run_script, run_cache,
                run_trace_out;
    SessionFlags run_flags;
    run_cmd->add_option("--app", run_app, "App definition file")->required();
    run_cmd->add_option("--task", run_task_text, "Task to perform")->required();
    run_cmd->add_option("--utg", run_utg, "Explored transition graph");
    run_cmd->add_option("--memory", run_memory, "App memory file");
    run_cmd->add_option("--backend", run_backend, "script or remote");
    run_cmd->add_option("--script", run_script, "Response script for the script backend");
    run_cmd->add_option("--cache", run_cache, "Response cache directory");
    run_cmd->add_option("--trace", run_trace_out, "Write the run trace to this file");
    run_flags.attach(run_cmd);
    run_cmd->callback([&] {
        SimEnvironment env(load_app(run_app));
        Utg utg;
        AppMemory memory;
        HashedBagProvider embedder;
        SessionResources resources;
        if (!run_utg.empty()) {
            utg = load_utg(run_utg);
            resources.utg = &utg;
        }
        if (!run_memory.empty()) {
            memory = load_memory(run_memory);
            resources.memory = &memory;
            resources.embedder = &embedder;
        }
        std::unique_ptr<LlmBackend> backend = make_backend(run_backend, run_script);
        std::unique_ptr<ReplayCacheBackend> cached;
        LlmBackend* effective = backend.get();
        if (!run_cache.empty()) {
            cached = std::make_unique<ReplayCacheBackend>(*backend, run_cache);
            effective = cached.get();
        }
        CostLedger ledger;
        RunTrace trace = run_task(env, *effective, &ledger, resources, run_task_text, run_flags.config());
        if (!run_trace_out.empty()) write_text_file(run_trace_out, trace_json(trace).dump(2) + "\n");
        std::cout << "outcome: " << outcome_name(trace.outcome) << " (" << trace.llm_decided_actions
                  << " actions, " << trace.action_llm_calls << " model calls";
        if (trace.shortcut_fired) std::cout << ", shortcut";
        std::cout << ")\n";
        if (cached) std::cout << "cache: " << cached->hits() << " hits, " << cached->misses() << " misses\n";
        for (const auto& w : trace.warnings) std::cerr << "warning: " << w << "\n";
        if (trace.outcome == RunOutcome::Error) throw std::runtime_error("run failed: " + trace.error);
        if (trace.outcome == RunOutcome::MaxStepsExceeded) std::exit(3);
    });

    // ---- eval ----
    auto* eval_cmd = app.add_subcommand("eval", "Score a task suite against an app");
    std::string ev_suite, ev_mode = "conditioned", ev_utg, ev_memory, ev_backend = "script", ev_script,
                ev_json_out, ev_paired_script;
    SessionFlags ev_flags;
    eval_cmd->add_option("--suite", ev_suite, "Suite file")->required();
    eval_cmd->add_option("--mode", ev_mode, "conditioned, risky or free");
    eval_cmd->add_option("--utg", ev_utg, "Explored transition graph");
    eval_cmd->add_option("--memory", ev_memory, "App memory file");
    eval_cmd->add_option("--backend", ev_backend, "script or remote");
    eval_cmd->add_option("--script", ev_script, "Response script for the script backend");
    eval_cmd->add_option("--paired-script", ev_paired_script,
                         "Free mode: second script, replayed with memory disabled for a call comparison");
    eval_cmd->add_option("--json", ev_json_out, "Write the report as JSON to this file");
    ev_flags.attach(eval_cmd);
    eval_cmd->callback([&] {
        Suite suite = load_suite(ev_suite);
        SimEnvironment env(load_app(suite.app_path));
        Utg utg;
        AppMemory memory;
        HashedBagProvider embedder;
        SessionResources resources;
        if (!ev_utg.empty()) {
            utg = load_utg(ev_utg);
            resources.utg = &utg;
        }
        if (!ev_memory.empty()) {
            memory = load_memory(ev_memory);
            resources.memory = &memory;
            resources.embedder = &embedder;
        }
        SessionConfig config = ev_flags.config();
        nlohmann::json out;
        if (ev_mode == "risky") {
            RiskReport report = evaluate_risky(env, suite, config);
            std::cout << report_text(report);
            out = report_json(report);
        } else if (ev_mode == "conditioned") {
            std::unique_ptr<LlmBackend> backend = make_backend(ev_backend, ev_script);
            CostLedger ledger;
            ConditionedReport report = evaluate_conditioned(env, *backend, &ledger, resources, suite, config);
            std::cout << report_text(report);
            out = report_json(report);
        } else if (ev_mode == "free") {
            std::unique_ptr<LlmBackend> backend = make_backend(ev_backend, ev_script);
            CostLedger ledger;
            FreeReport report = evaluate_free(env, *backend, &ledger, resources, suite, config);
            std::cout << report_text(report);
            out = report_json(report);
            if (!ev_paired_script.empty()) {
                std::unique_ptr<LlmBackend> second = make_backend(ev_backend, ev_paired_script);
                SessionConfig bare = config;
                bare.use_memory = false;
                FreeReport without = evaluate_free(env, *second, &ledger, resources, suite, bare);
                PairedReport paired = compare_free(report, without, "with_memory", "without_memory");
                std::cout << report_text(paired);
                out = nlohmann::json{{"with_memory", out},
                                     {"without_memory", report_json(without)},
                                     {"paired", report_json(paired)}};
            }
        } else {
            throw std::runtime_error("unknown mode '" + ev_mode + "'");
        }
        if (!ev_json_out.empty()) write_text_file(ev_json_out, out.dump(2) + "\n");
    });

    // ---- export-finetune ----
    auto* ft_cmd = app.add_subcommand("export-finetune", "Export training pairs from an app memory");
    std::string ft_utg, ft_memory, ft_out, ft_script;
    bool ft_cot = false;
    ft_cmd->add_option("--utg", ft_utg, "Explored transition graph")->required();
    ft_cmd->add_option("--memory", ft_memory, "App memory file")->required();
    ft_cmd->add_option("--out", ft_out, "Output JSONL file")->required();
    ft_cmd->add_flag("--cot", ft_cot, "Ask a model for reasoning-style completions");
    ft_cmd->add_option("--script", ft_script, "Response script for reasoning completions");
    ft_cmd->callback([&] {
        Utg utg = load_utg(ft_utg);
        AppMemory memory = load_memory(ft_memory);
        FinetuneOptions options;
        options.chain_of_thought = ft_cot;
        std::unique_ptr<LlmBackend> backend;
        if (ft_cot) backend = make_backend("script", ft_script);
        CostLedger ledger;
        std::vector<std::string> warnings;
        std::vector<QaPair> pairs = export_pairs(memory, utg, backend.get(), &ledger, options, &warnings);
        write_jsonl(pairs, ft_out);
        std::cout << "exported " << pairs.size() << " pairs -> " << ft_out << "\n";
        for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    });

    // ---- render ----
    auto* render_cmd = app.add_subcommand("render", "Print the simplified HTML view of an app screen");
    std::string rd_app, rd_state, rd_utg;
    bool rd_naive = false;
    render_cmd->add_option("--app", rd_app, "App definition file")->required();
    render_cmd->add_option("--state", rd_state, "Screen name (default: the initial screen)");
    render_cmd->add_option("--utg", rd_utg, "Transition graph enabling same-target merging");
    render_cmd->add_flag("--naive", rd_naive, "Print the unmerged one-line-per-leaf encoding");
    render_cmd->callback([&] {
        AppDefinition def = load_app(rd_app);
        std::string state_name = rd_state.empty() ? def.initial_state : rd_state;
        UiState state = def.initial_template(state_name);
        if (rd_naive) {
            std::cout << render_naive(state).text() << "\n";
            return;
        }
        Utg utg;
        RenderOptions options;
        if (!rd_utg.empty()) {
            utg = load_utg(rd_utg);
            options.utg = &utg;
        }
        std::cout << render_state(state, options).text() << "\n";
    });

    CLI11_PARSE(app, argc, argv);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
