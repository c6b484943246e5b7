#include "guipilot/retrieval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "httplib.h"

#include "guipilot/digest.hpp"

namespace guipilot {

namespace {

using nlohmann::json;

std::vector<std::string> word_tokens(const std::string& text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            cur += static_cast<char>(std::tolower(c));
        } else if (!cur.empty()) {
            tokens.push_back(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(cur);
    return tokens;
}

std::pair<std::string, std::string> split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw std::runtime_error("endpoint '" + url + "' must include a scheme");
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

std::vector<double> HashedBagProvider::embed(const std::string& text) {
    std::vector<double> v(dimension_, 0.0);
    for (const std::string& token : word_tokens(text))
        v[fnv1a64(token) % static_cast<uint64_t>(dimension_)] += 1.0;
    double norm = 0.0;
    for (double x : v) norm += x * x;
    if (norm > 0.0) {
        norm = std::sqrt(norm);
        for (double& x : v) x /= norm;
    }
    return v;
}

HttpEmbeddingProvider::HttpEmbeddingProvider(std::string endpoint, int dimension)
    : endpoint_(std::move(endpoint)), dimension_(dimension) {}

std::vector<double> HttpEmbeddingProvider::embed(const std::string& text) {
    auto [base, path] = split_url(endpoint_);
    httplib::Client client(base);
    json body = json::object();
    body["text"] = text;
    auto res = client.Post(path, body.dump(), "application/json");
    if (!res) throw std::runtime_error("embedding endpoint unreachable: " + httplib::to_string(res.error()));
    if (res->status != 200)
        throw std::runtime_error("embedding endpoint returned status " + std::to_string(res->status));
    json reply = json::parse(res->body);
    if (!reply.contains("vector") || !reply["vector"].is_array())
        throw std::runtime_error("embedding endpoint reply has no 'vector' array");
    std::vector<double> v;
    for (const auto& x : reply["vector"]) v.push_back(x.get<double>());
    if (static_cast<int>(v.size()) != dimension_)
        throw std::runtime_error("embedding endpoint returned dimension " + std::to_string(v.size()) +
                                 ", expected " + std::to_string(dimension_));
    return v;
}

double cosine(const std::vector<double>& u, const std::vector<double>& v) {
    if (u.size() != v.size())
        throw std::invalid_argument("cosine: dimension mismatch (" + std::to_string(u.size()) +
                                    " vs " + std::to_string(v.size()) + ")");
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    if (nu == 0.0 || nv == 0.0) throw std::invalid_argument("cosine: zero vector");
    return dot / (std::sqrt(nu) * std::sqrt(nv));
}

std::vector<ScoredEntry> top_k(const std::string& task, const AppMemory& memory,
                               EmbeddingProvider& provider, int k) {
    if (k < 1) throw std::invalid_argument("top_k requires k >= 1");
    if (memory.simulated_tasks.empty()) return {};
    std::vector<double> query = provider.embed(task);
    std::vector<ScoredEntry> scored;
    for (const auto& entry : memory.simulated_tasks)
        scored.push_back({&entry, cosine(query, provider.embed(entry.simulated_task))});
    std::stable_sort(scored.begin(), scored.end(),
                     [](const ScoredEntry& a, const ScoredEntry& b) { return a.similarity > b.similarity; });
    if (static_cast<int>(scored.size()) > k) scored.resize(static_cast<size_t>(k));
    return scored;
}

const std::map<int, std::string>* HintPlan::for_state(const std::string& signature) const {
    auto it = hints.find(signature);
    return it == hints.end() ? nullptr : &it->second;
}

HintPlan build_hint_plan(const std::vector<ScoredEntry>& selected, const AppMemory& memory,
                         size_t max_chars) {
    // Collect per-element summary lists first so duplicates across entries
    // merge into one enumeration.
    std::map<std::string, std::map<int, std::vector<std::string>>> collected;
    for (const auto& scored : selected) {
        const MemoryEntry& entry = *scored.entry;
        for (size_t j = 0; j < entry.ui_elements.size(); ++j) {
            const ElementRef& clicked = entry.ui_elements[j];
            auto& items = collected[clicked.signature][clicked.local_id];
            for (size_t down = j + 1; down < entry.ui_states.size(); ++down) {
                const UiFunctionEntry* f = memory.function_of(entry.ui_states[down]);
                if (!f || f->function_summary.empty()) continue;
                if (std::find(items.begin(), items.end(), f->function_summary) == items.end())
                    items.push_back(f->function_summary);
            }
        }
    }

    HintPlan plan;
    for (const auto& [signature, elements] : collected) {
        for (const auto& [local_id, items] : elements) {
            if (items.empty()) continue;
            std::string text = "navigate to GUIs that can: ";
            bool truncated = false;
            for (size_t i = 0; i < items.size(); ++i) {
                std::string piece = (i ? ", " : "") + std::to_string(i + 1) + "." + items[i];
                if (i > 0 && text.size() + piece.size() > max_chars) {
                    truncated = true;
                    break;
                }
                text += piece;
            }
            if (truncated) text += ", etc.";
            plan.hints[signature][local_id] = std::move(text);
        }
    }
    return plan;
}

ShortcutDecision decide_shortcut(const std::string& task, const AppMemory& memory,
                                 EmbeddingProvider& provider, double gamma) {
    ShortcutDecision decision;
    auto ranked = top_k(task, memory, provider, 1);
    if (ranked.empty()) return decision;
    decision.entry = ranked.front().entry;
    decision.similarity = ranked.front().similarity;
    decision.fired = decision.similarity > gamma;
    return decision;
}

}  // namespace guipilot
