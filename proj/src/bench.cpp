#include "guipilot/bench.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "guipilot/serializer.hpp"

namespace guipilot {

namespace {

std::string fmt3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

[[noreturn]] void suite_error(const std::string& origin, const std::string& what) {
    throw std::runtime_error("suite " + origin + ": " + what);
}

}  // namespace

Suite suite_from_json(const nlohmann::json& doc, const std::string& origin) {
    if (!doc.is_object()) suite_error(origin, "document must be an object");
    Suite suite;
    if (!doc.contains("name") || !doc["name"].is_string()) suite_error(origin, "missing string 'name'");
    suite.name = doc["name"].get<std::string>();
    if (!doc.contains("app") || !doc["app"].is_string()) suite_error(origin, "missing string 'app'");
    suite.app_path = doc["app"].get<std::string>();
    if (!doc.contains("tasks") || !doc["tasks"].is_array() || doc["tasks"].empty())
        suite_error(origin, "missing non-empty array 'tasks'");

    for (std::size_t t = 0; t < doc["tasks"].size(); ++t) {
        const auto& jt = doc["tasks"][t];
        std::string where = "tasks[" + std::to_string(t) + "]";
        if (!jt.is_object() || !jt.contains("task") || !jt["task"].is_string())
            suite_error(origin, where + " needs a string 'task'");
        SuiteTask task;
        task.task = jt["task"].get<std::string>();
        if (!jt.contains("steps") || !jt["steps"].is_array() || jt["steps"].empty())
            suite_error(origin, where + " needs a non-empty array 'steps'");
        for (std::size_t s = 0; s < jt["steps"].size(); ++s) {
            const auto& js = jt["steps"][s];
            std::string swhere = where + ".steps[" + std::to_string(s) + "]";
            if (!js.is_object() || !js.contains("action") || !js["action"].is_string())
                suite_error(origin, swhere + " needs a string 'action'");
            SuiteStep step;
            step.action = js["action"].get<std::string>();
            if (step.action != "tap" && step.action != "input" && step.action != "finish")
                suite_error(origin, swhere + " action must be tap, input or finish");
            if (step.action == "finish") {
                if (js.contains("target")) suite_error(origin, swhere + " finish steps take no target");
            } else {
                if (!js.contains("target") || !js["target"].is_string())
                    suite_error(origin, swhere + " needs a string 'target'");
                step.target = js["target"].get<std::string>();
            }
            if (step.action == "input") {
                if (!js.contains("text") || !js["text"].is_string())
                    suite_error(origin, swhere + " input steps need a string 'text'");
                step.text = js["text"].get<std::string>();
            } else if (js.contains("text")) {
                suite_error(origin, swhere + " only input steps take 'text'");
            }
            if (js.contains("risky")) {
                if (!js["risky"].is_boolean()) suite_error(origin, swhere + " 'risky' must be a boolean");
                step.risky = js["risky"].get<bool>();
            }
            task.steps.push_back(std::move(step));
        }
        suite.tasks.push_back(std::move(task));
    }
    return suite;
}

Suite load_suite(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error("suite " + path + ": " + e.what());
    }
    Suite suite = suite_from_json(doc, path);
    std::filesystem::path app(suite.app_path);
    if (app.is_relative()) suite.app_path = (std::filesystem::path(path).parent_path() / app).string();
    return suite;
}

namespace {

// The prompt id of the line whose label (or leading text fragment) equals the
// annotated target.
int resolve_target(const HtmlView& view, const std::string& target) {
    for (const auto& line : view.lines) {
        if (line.prompt_id >= 0 && line.label == target) return line.prompt_id;
    }
    for (const auto& line : view.lines) {
        if (line.prompt_id < 0) continue;
        auto pos = line.text.find("<br>");
        std::string head = pos == std::string::npos ? line.text : line.text.substr(0, pos);
        if (head == target) return line.prompt_id;
    }
    return -1;
}

LlmDecision expected_decision(const SuiteStep& step, const HtmlView& view, const std::string& task) {
    if (step.action == "finish") return LlmDecision{-1, "", std::nullopt, false};
    int pid = resolve_target(view, step.target);
    if (pid < 0)
        throw std::runtime_error("task '" + task + "': target '" + step.target +
                                 "' is not on screen " + view.state_signature);
    return LlmDecision{pid, step.action, step.text, false};
}

std::map<int, std::string> hints_for(const SessionResources& resources, const SessionConfig& config,
                                     const std::string& task, const std::string& signature) {
    std::map<int, std::string> hints;
    if (!config.use_memory || !resources.memory || !resources.embedder ||
        resources.memory->simulated_tasks.empty())
        return hints;
    auto selected = top_k(task, *resources.memory, *resources.embedder, config.k);
    HintPlan plan = build_hint_plan(selected, *resources.memory);
    if (const auto* state_hints = plan.for_state(signature)) hints = *state_hints;
    return hints;
}

HistoryItem history_from_step(const SuiteStep& step, const HtmlView& view, int pid) {
    std::string label = step.target;
    for (const auto& line : view.lines) {
        if (line.prompt_id == pid && !line.label.empty()) label = line.label;
    }
    return HistoryItem{step.action, label, step.text};
}

Metrics compute_metrics(const std::vector<StepResult>& steps, const std::vector<TaskResult>& tasks) {
    Metrics m;
    for (const auto& s : steps) {
        ++m.total_steps;
        auto& [matched, total] = m.by_kind[s.expected_kind];
        ++total;
        if (s.matched) {
            ++m.matched_steps;
            ++matched;
        }
    }
    m.step_accuracy = m.total_steps ? double(m.matched_steps) / m.total_steps : 0.0;
    m.tasks = static_cast<int>(tasks.size());
    for (const auto& t : tasks) {
        if (t.completed) ++m.completed_tasks;
        if (t.completed_actions_only) ++m.completed_tasks_actions_only;
    }
    m.completion_rate = m.tasks ? double(m.completed_tasks) / m.tasks : 0.0;
    m.action_completion_rate = m.tasks ? double(m.completed_tasks_actions_only) / m.tasks : 0.0;
    return m;
}

}  // namespace

ConditionedReport evaluate_conditioned(Environment& env, LlmBackend& llm, CostLedger* ledger,
                                       const SessionResources& resources, const Suite& suite,
                                       const SessionConfig& config) {
    ConditionedReport report;
    report.suite = suite.name;

    for (const auto& task : suite.tasks) {
        env.reset();
        std::vector<HistoryItem> history;
        PiiMaskTable pii;
        TaskResult tr;
        tr.task = task.task;
        tr.completed = true;
        tr.completed_actions_only = true;

        for (std::size_t s = 0; s < task.steps.size(); ++s) {
            const SuiteStep& step = task.steps[s];
            UiState composed = composed_screen(env, config.compose_scroll);
            RenderOptions render_options;
            render_options.utg = resources.utg;
            render_options.hints = hints_for(resources, config, task.task, composed.signature);
            HtmlView view = render_state(composed, render_options);

            LlmDecision expected = expected_decision(step, view, task.task);

            auto ask = [&](const std::string& extra_note) {
                PromptBundle bundle = build_action_prompt(config.templates, task.task, history, view,
                                                          config.risk_gate, extra_note);
                std::string user = bundle.user_text();
                if (config.privacy_filter) user = mask_pii(user, pii, config.pii);
                LlmRequest request{bundle.system_preamble, user, config.temperature, "action"};
                ++report.llm_calls;
                return complete(llm, ledger, request);
            };

            LlmDecision model{-2, "", std::nullopt, false};  // sentinel: unparseable
            bool parsed = false;
            try {
                model = parse_decision(ask(""), view);
                parsed = true;
            } catch (const FormatError&) {
                try {
                    model = parse_decision(ask("Answer ONLY in the required format."), view);
                    parsed = true;
                } catch (const std::exception&) {
                }
            } catch (const RangeError&) {
            }
            if (parsed && config.privacy_filter && model.input_text)
                model.input_text = unmask_pii(*model.input_text, pii);

            StepResult sr;
            sr.task = task.task;
            sr.step_index = static_cast<int>(s);
            sr.finish_step = step.action == "finish";
            sr.expected_kind = step.action;
            sr.expected = expected;
            sr.model = model;
            if (sr.finish_step) {
                sr.matched = parsed && model.prompt_id == -1;
            } else {
                sr.matched = parsed && model.prompt_id == expected.prompt_id && model.kind == expected.kind &&
                             (expected.kind != "input" || model.input_text == expected.input_text);
            }
            sr.annotated_risky = step.risky;
            report.steps.push_back(sr);

            ++tr.steps;
            if (sr.matched) ++tr.matched;
            if (!sr.matched) {
                tr.completed = false;
                if (!sr.finish_step) tr.completed_actions_only = false;
            }

            // teacher forcing: advance with the annotation, never the model
            if (!sr.finish_step) {
                Action action = decision_to_action(expected, view, composed);
                env.perform(action);
                history.push_back(history_from_step(step, view, expected.prompt_id));
            }
        }
        report.tasks.push_back(tr);
    }

    report.metrics = compute_metrics(report.steps, report.tasks);
    return report;
}

RiskReport evaluate_risky(Environment& env, const Suite& suite, const SessionConfig& config) {
    RiskReport report;
    report.suite = suite.name;

    for (const auto& task : suite.tasks) {
        env.reset();
        for (std::size_t s = 0; s < task.steps.size(); ++s) {
            const SuiteStep& step = task.steps[s];
            if (step.action == "finish") continue;
            UiState composed = composed_screen(env, config.compose_scroll);
            HtmlView view = render_state(composed);
            LlmDecision expected = expected_decision(step, view, task.task);

            StepResult sr;
            sr.task = task.task;
            sr.step_index = static_cast<int>(s);
            sr.expected_kind = step.action;
            sr.expected = expected;
            sr.predicted_risky = gate_risky(expected, view, env.risky_targets());
            sr.annotated_risky = step.risky;
            sr.matched = sr.predicted_risky == step.risky.value_or(false);
            report.steps.push_back(sr);

            bool truth = step.risky.value_or(false);
            if (sr.predicted_risky && truth) ++report.tp;
            if (sr.predicted_risky && !truth) ++report.fp;
            if (!sr.predicted_risky && truth) ++report.fn;
            if (!sr.predicted_risky && !truth) ++report.tn;

            Action action = decision_to_action(expected, view, composed);
            env.perform(action);
        }
    }
    report.precision = (report.tp + report.fp) ? double(report.tp) / (report.tp + report.fp) : 0.0;
    report.recall = (report.tp + report.fn) ? double(report.tp) / (report.tp + report.fn) : 0.0;
    return report;
}

FreeReport evaluate_free(Environment& env, LlmBackend& llm, CostLedger* ledger,
                         const SessionResources& resources, const Suite& suite,
                         const SessionConfig& config) {
    FreeReport report;
    report.suite = suite.name;
    for (const auto& task : suite.tasks) {
        RunTrace trace = run_task(env, llm, ledger, resources, task.task, config);
        FreeRunResult r;
        r.task = task.task;
        r.outcome = trace.outcome;
        r.llm_calls = trace.action_llm_calls;
        r.actions = trace.llm_decided_actions;
        r.shortcut = trace.shortcut_fired;
        report.total_llm_calls += r.llm_calls;
        report.runs.push_back(r);
    }
    return report;
}

PairedReport compare_free(const FreeReport& a, const FreeReport& b, const std::string& label_a,
                          const std::string& label_b) {
    if (a.runs.size() != b.runs.size())
        throw std::invalid_argument("paired reports need the same task list");
    PairedReport report;
    report.label_a = label_a;
    report.label_b = label_b;
    for (std::size_t i = 0; i < a.runs.size(); ++i) {
        if (a.runs[i].task != b.runs[i].task)
            throw std::invalid_argument("paired reports need the same task list");
        report.rows.push_back(PairedRow{a.runs[i].task, a.runs[i].llm_calls, b.runs[i].llm_calls});
        report.total_a += a.runs[i].llm_calls;
        report.total_b += b.runs[i].llm_calls;
    }
    return report;
}

nlohmann::json report_json(const ConditionedReport& report) {
    nlohmann::json by_kind = nlohmann::json::object();
    for (const auto& [kind, counts] : report.metrics.by_kind)
        by_kind[kind] = {{"matched", counts.first}, {"total", counts.second}};
    nlohmann::json tasks = nlohmann::json::array();
    for (const auto& t : report.tasks)
        tasks.push_back({{"task", t.task},
                         {"steps", t.steps},
                         {"matched", t.matched},
                         {"completed", t.completed},
                         {"completed_actions_only", t.completed_actions_only}});
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& s : report.steps) {
        nlohmann::json row = {{"task", s.task},        {"step", s.step_index},
                              {"kind", s.expected_kind}, {"matched", s.matched},
                              {"expected_id", s.expected.prompt_id}, {"model_id", s.model.prompt_id},
                              {"model_kind", s.model.kind}};
        if (s.model.input_text) row["model_text"] = *s.model.input_text;
        steps.push_back(row);
    }
    return nlohmann::json{
        {"suite", report.suite},
        {"llm_calls", report.llm_calls},
        {"metrics",
         {{"total_steps", report.metrics.total_steps},
          {"matched_steps", report.metrics.matched_steps},
          {"step_accuracy", report.metrics.step_accuracy},
          {"by_kind", by_kind},
          {"tasks", report.metrics.tasks},
          {"completed_tasks", report.metrics.completed_tasks},
          {"completion_rate", report.metrics.completion_rate},
          {"completed_tasks_actions_only", report.metrics.completed_tasks_actions_only},
          {"action_completion_rate", report.metrics.action_completion_rate}}},
        {"tasks", tasks},
        {"steps", steps},
    };
}

nlohmann::json report_json(const RiskReport& report) {
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& s : report.steps)
        steps.push_back({{"task", s.task},
                         {"step", s.step_index},
                         {"predicted_risky", s.predicted_risky},
                         {"annotated_risky", s.annotated_risky.value_or(false)}});
    return nlohmann::json{{"suite", report.suite}, {"tp", report.tp},
                          {"fp", report.fp},       {"fn", report.fn},
                          {"tn", report.tn},       {"precision", report.precision},
                          {"recall", report.recall}, {"steps", steps}};
}

nlohmann::json report_json(const FreeReport& report) {
    nlohmann::json runs = nlohmann::json::array();
    for (const auto& r : report.runs)
        runs.push_back({{"task", r.task},
                        {"outcome", outcome_name(r.outcome)},
                        {"llm_calls", r.llm_calls},
                        {"actions", r.actions},
                        {"shortcut", r.shortcut}});
    return nlohmann::json{
        {"suite", report.suite}, {"total_llm_calls", report.total_llm_calls}, {"runs", runs}};
}

nlohmann::json report_json(const PairedReport& report) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : report.rows)
        rows.push_back({{"task", r.task}, {report.label_a, r.calls_a}, {report.label_b, r.calls_b}});
    return nlohmann::json{{"label_a", report.label_a},
                          {"label_b", report.label_b},
                          {"total_a", report.total_a},
                          {"total_b", report.total_b},
                          {"rows", rows}};
}

std::string report_text(const ConditionedReport& report) {
    std::string out;
    out += "suite " + report.suite + ": " + std::to_string(report.metrics.matched_steps) + "/" +
           std::to_string(report.metrics.total_steps) + " steps matched (" +
           fmt3(report.metrics.step_accuracy) + ")\n";
    out += "  by kind:";
    for (const auto& [kind, counts] : report.metrics.by_kind)
        out += " " + kind + " " + std::to_string(counts.first) + "/" + std::to_string(counts.second);
    out += "\n";
    out += "tasks completed: " + std::to_string(report.metrics.completed_tasks) + "/" +
           std::to_string(report.metrics.tasks) + " (" + fmt3(report.metrics.completion_rate) +
           "), action steps only: " + std::to_string(report.metrics.completed_tasks_actions_only) + "/" +
           std::to_string(report.metrics.tasks) + " (" + fmt3(report.metrics.action_completion_rate) +
           ")\n";
    out += "model calls: " + std::to_string(report.llm_calls) + "\n";
    return out;
}

std::string report_text(const RiskReport& report) {
    std::string out;
    out += "suite " + report.suite + ": precision " + fmt3(report.precision) + " (tp " +
           std::to_string(report.tp) + ", fp " + std::to_string(report.fp) + "), recall " +
           fmt3(report.recall) + " (tp " + std::to_string(report.tp) + ", fn " +
           std::to_string(report.fn) + "), tn " + std::to_string(report.tn) + "\n";
    return out;
}

std::string report_text(const FreeReport& report) {
    std::string out;
    out += "suite " + report.suite + "\n";
    for (const auto& r : report.runs) {
        out += "  '" + r.task + "': " + outcome_name(r.outcome) + ", " + std::to_string(r.actions) +
               " actions, " + std::to_string(r.llm_calls) + " model calls";
        if (r.shortcut) out += ", shortcut";
        out += "\n";
    }
    out += "total model calls: " + std::to_string(report.total_llm_calls) + "\n";
    return out;
}

std::string report_text(const PairedReport& report) {
    std::string out;
    out += report.label_a + " vs " + report.label_b + "\n";
    for (const auto& r : report.rows)
        out += "  '" + r.task + "': " + std::to_string(r.calls_a) + " -> " + std::to_string(r.calls_b) +
               " calls\n";
    out += "totals: " + std::to_string(report.total_a) + " -> " + std::to_string(report.total_b) + "\n";
    return out;
}

}  // namespace guipilot
