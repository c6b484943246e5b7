#include "guipilot/finetune.hpp"

#include <fstream>
#include <stdexcept>

#include "guipilot/serializer.hpp"

namespace guipilot {

namespace {

int prompt_id_of(const HtmlView& view, int local_id) {
    for (const auto& [pid, target] : view.id_map) {
        for (int member : target.local_ids) {
            if (member == local_id) return pid;
        }
    }
    return -1;
}

std::string label_of(const HtmlView& view, int prompt_id) {
    for (const auto& line : view.lines) {
        if (line.prompt_id != prompt_id) continue;
        if (!line.label.empty()) return line.label;
        auto pos = line.text.find("<br>");
        return pos == std::string::npos ? line.text : line.text.substr(0, pos);
    }
    return "";
}

struct PairContext {
    const FinetuneOptions& options;
    LlmBackend* cot_llm;
    CostLedger* ledger;
    std::vector<std::string>* warnings;
    std::vector<QaPair>& pairs;

    void warn(const std::string& message) const {
        if (warnings) warnings->push_back(message);
    }
};

// Emits one pair for (view, decision). Plain pairs restate the decision line;
// reasoning pairs ask the teacher model and keep only well-formed answers.
void emit_pair(PairContext& ctx, const std::string& task, const std::vector<HistoryItem>& history,
               const HtmlView& view, const LlmDecision& decision, int step_index) {
    QaPair pair;
    pair.task = task;
    pair.state_signature = view.state_signature;
    pair.step_index = step_index;

    if (!ctx.options.chain_of_thought) {
        PromptBundle bundle =
            build_action_prompt(ctx.options.templates, task, history, view, /*with_risk_clause=*/false);
        pair.system = bundle.system_preamble;
        pair.prompt = bundle.user_text();
        pair.completion = render_decision(decision);
        ctx.pairs.push_back(pair);
        return;
    }

    if (!ctx.cot_llm) throw std::invalid_argument("chain-of-thought export needs a backend");
    PromptBundle bundle = build_cot_prompt(ctx.options.templates, task, history, view, decision);
    pair.system = bundle.system_preamble;
    pair.prompt = bundle.user_text();
    pair.cot = true;
    LlmRequest request{bundle.system_preamble, bundle.user_text(), 0.25, "cot"};
    for (int attempt = 1; attempt <= ctx.options.max_attempts; ++attempt) {
        std::string response = complete(*ctx.cot_llm, ctx.ledger, request);
        if (has_cot_sections(response)) {
            pair.completion = response;
            ctx.pairs.push_back(pair);
            return;
        }
        if (attempt == ctx.options.max_attempts) {
            ctx.warn("dropped reasoning pair for '" + task + "' step " + std::to_string(step_index) +
                     ": answer never carried all sections");
        }
    }
}

}  // namespace

std::vector<QaPair> export_pairs(const AppMemory& memory, const Utg& utg, LlmBackend* cot_llm,
                                 CostLedger* ledger, const FinetuneOptions& options,
                                 std::vector<std::string>* warnings) {
    std::vector<QaPair> pairs;
    PairContext ctx{options, cot_llm, ledger, warnings, pairs};

    for (const auto& entry : memory.simulated_tasks) {
        std::vector<HistoryItem> history;
        int step_index = 0;

        for (std::size_t i = 0; i < entry.ui_elements.size(); ++i) {
            const UtgNode* node = utg.node(entry.ui_states[i]);
            if (!node) {
                ctx.warn("skipped '" + entry.simulated_task + "': state " + entry.ui_states[i] +
                         " missing from the graph");
                break;
            }
            HtmlView view = render_state(node->representative);
            int pid = prompt_id_of(view, entry.ui_elements[i].local_id);
            if (pid < 0) {
                ctx.warn("skipped '" + entry.simulated_task + "': element " +
                         std::to_string(entry.ui_elements[i].local_id) + " not rendered on " +
                         entry.ui_states[i]);
                break;
            }
            LlmDecision decision{pid, "tap", std::nullopt, false};
            emit_pair(ctx, entry.simulated_task, history, view, decision, step_index++);
            history.push_back(HistoryItem{"tap", label_of(view, pid), std::nullopt});
        }
    }
    return pairs;
}

nlohmann::json qa_json(const QaPair& pair) {
    return nlohmann::json{
        {"system", pair.system},       {"prompt", pair.prompt},
        {"completion", pair.completion}, {"task", pair.task},
        {"state", pair.state_signature}, {"step", pair.step_index},
        {"cot", pair.cot},
    };
}

QaPair qa_from_json(const nlohmann::json& j) {
    QaPair pair;
    pair.system = j.at("system").get<std::string>();
    pair.prompt = j.at("prompt").get<std::string>();
    pair.completion = j.at("completion").get<std::string>();
    pair.task = j.at("task").get<std::string>();
    pair.state_signature = j.at("state").get<std::string>();
    pair.step_index = j.at("step").get<int>();
    pair.cot = j.at("cot").get<bool>();
    return pair;
}

void write_jsonl(const std::vector<QaPair>& pairs, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (const auto& pair : pairs) out << qa_json(pair).dump() << "\n";
}

std::vector<QaPair> read_jsonl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::vector<QaPair> pairs;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        pairs.push_back(qa_from_json(nlohmann::json::parse(line)));
    }
    return pairs;
}

}  // namespace guipilot
