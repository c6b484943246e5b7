#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "guipilot/agent.hpp"
#include "guipilot/environment.hpp"

namespace guipilot {

// One annotated ground-truth step. action is tap / input / finish; target is
// the visible label of the element (finish steps have none); text is the
// typed string for input steps; risky carries the human judgement used by the
// risk-gate evaluation.
struct SuiteStep {
    std::string action;
    std::string target;
    std::optional<std::string> text;
    std::optional<bool> risky;
};

struct SuiteTask {
    std::string task;
    std::vector<SuiteStep> steps;
};

struct Suite {
    std::string name;
    std::string app_path;  // relative paths resolve against the suite file
    std::vector<SuiteTask> tasks;
};

Suite load_suite(const std::string& path);
Suite suite_from_json(const nlohmann::json& doc, const std::string& origin);

struct StepResult {
    std::string task;
    int step_index = 0;
    bool finish_step = false;
    std::string expected_kind;  // tap / input / finish
    LlmDecision expected;
    LlmDecision model;
    bool matched = false;
    bool predicted_risky = false;
    std::optional<bool> annotated_risky;
};

struct TaskResult {
    std::string task;
    int steps = 0;
    int matched = 0;
    bool completed = false;               // every step matched, finish included
    bool completed_actions_only = false;  // every non-finish step matched
};

struct Metrics {
    int total_steps = 0;
    int matched_steps = 0;
    double step_accuracy = 0.0;
    std::map<std::string, std::pair<int, int>> by_kind;  // kind -> (matched, total)
    int tasks = 0;
    int completed_tasks = 0;
    double completion_rate = 0.0;
    int completed_tasks_actions_only = 0;
    double action_completion_rate = 0.0;
};

struct ConditionedReport {
    std::string suite;
    Metrics metrics;
    std::vector<TaskResult> tasks;
    std::vector<StepResult> steps;
    int llm_calls = 0;
};

// Teacher-forced evaluation: at every annotated step the model is asked for
// its action, the answer is scored against the annotation, and the app is
// advanced with the ground-truth action so later steps stay comparable.
// A model answer counts as a match when it lands on the annotated element's
// line with the annotated kind (and text, for input steps); finish steps
// match on id=-1.
ConditionedReport evaluate_conditioned(Environment& env, LlmBackend& llm, CostLedger* ledger,
                                       const SessionResources& resources, const Suite& suite,
                                       const SessionConfig& config = {});

struct RiskReport {
    std::string suite;
    int tp = 0, fp = 0, fn = 0, tn = 0;
    double precision = 0.0;
    double recall = 0.0;
    std::vector<StepResult> steps;
};

// Runs the risk gate over every annotated non-finish step (advancing with
// ground truth, no model involved) and scores it against the risky
// annotations.
RiskReport evaluate_risky(Environment& env, const Suite& suite, const SessionConfig& config = {});

struct FreeRunResult {
    std::string task;
    RunOutcome outcome = RunOutcome::Error;
    int llm_calls = 0;
    int actions = 0;
    bool shortcut = false;
};

struct FreeReport {
    std::string suite;
    std::vector<FreeRunResult> runs;
    int total_llm_calls = 0;
};

// Unconstrained runs of every task through run_task.
FreeReport evaluate_free(Environment& env, LlmBackend& llm, CostLedger* ledger,
                         const SessionResources& resources, const Suite& suite,
                         const SessionConfig& config = {});

struct PairedRow {
    std::string task;
    int calls_a = 0;
    int calls_b = 0;
};

struct PairedReport {
    std::string label_a;
    std::string label_b;
    std::vector<PairedRow> rows;
    int total_a = 0;
    int total_b = 0;
};

// Per-task model-call comparison of two free runs of the same suite.
PairedReport compare_free(const FreeReport& a, const FreeReport& b, const std::string& label_a,
                          const std::string& label_b);

nlohmann::json report_json(const ConditionedReport& report);
nlohmann::json report_json(const RiskReport& report);
nlohmann::json report_json(const FreeReport& report);
nlohmann::json report_json(const PairedReport& report);
std::string report_text(const ConditionedReport& report);
std::string report_text(const RiskReport& report);
std::string report_text(const FreeReport& report);
std::string report_text(const PairedReport& report);

}  // namespace guipilot
