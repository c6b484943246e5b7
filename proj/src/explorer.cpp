#include "guipilot/explorer.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <random>

#include "guipilot/serializer.hpp"

namespace guipilot {

namespace {

// Thin wrapper over mt19937_64 with our own bounded draw; the standard
// distributions are implementation-defined, this keeps runs reproducible
// across toolchains.
class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    double uniform01() { return (gen_() >> 11) * (1.0 / 9007199254740992.0); }

    size_t bounded(size_t n) {
        uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return static_cast<size_t>(x % n);
    }

private:
    std::mt19937_64 gen_;
};

struct Candidate {
    const UiElement* element;
    ActionKind kind;
};

std::vector<Candidate> candidate_actions(const UiState& composed) {
    std::vector<Candidate> out;
    for (const UiElement* e : interactive_elements(composed)) {
        if (e->cls == ElementClass::Button) {
            out.push_back({e, ActionKind::Click});
        } else if (e->cls == ElementClass::Checkbox) {
            out.push_back({e, e->checked.value_or(false) ? ActionKind::Uncheck : ActionKind::Check});
        }
    }
    return out;
}

}  // namespace

Utg explore(Environment& env, const ExploreOptions& options) {
    Rng rng(options.seed);
    Utg utg;

    env.reset();
    UiState composed = compose_scrolled(env.scroll_views());
    utg.initial = composed.signature;
    utg.add_node(composed);

    int performed = 0;
    while (performed < options.budget) {
        if (rng.uniform01() < options.restart_prob) {
            env.reset();
            composed = compose_scrolled(env.scroll_views());
            utg.add_node(composed);
            continue;
        }
        auto candidates = candidate_actions(composed);
        if (candidates.empty()) {
            env.reset();
            composed = compose_scrolled(env.scroll_views());
            utg.add_node(composed);
            continue;
        }
        const Candidate& pick = candidates[rng.bounded(candidates.size())];

        Action action;
        action.kind = pick.kind;
        action.target = pick.element->local_id;
        UtgEdge edge;
        edge.source = composed.signature;
        edge.element_local_id = pick.element->local_id;
        edge.element_class = pick.element->cls;
        edge.element_label = display_name(*pick.element);
        edge.kind = pick.kind;

        env.perform(action);
        ++performed;

        composed = compose_scrolled(env.scroll_views());
        utg.add_node(composed);
        edge.target = composed.signature;
        utg.add_edge(std::move(edge));
    }

    utg.recompute_depths();
    return utg;
}

std::vector<PathHop> shortest_click_path(const Utg& utg, const std::string& target_signature) {
    const UtgNode* target = utg.node(target_signature);
    if (!target)
        throw std::invalid_argument("no node with signature '" + target_signature + "' in the graph");

    // Click distance from every node to the target.
    std::map<std::string, int> dist_to_target;
    dist_to_target[target_signature] = 0;
    std::deque<std::string> queue{target_signature};
    while (!queue.empty()) {
        std::string cur = queue.front();
        queue.pop_front();
        int d = dist_to_target[cur];
        for (const auto& e : utg.edges) {
            if (e.kind != ActionKind::Click || e.target != cur) continue;
            if (!dist_to_target.count(e.source)) {
                dist_to_target[e.source] = d + 1;
                queue.push_back(e.source);
            }
        }
    }
    if (!dist_to_target.count(utg.initial))
        throw std::runtime_error("node '" + target_signature + "' is not click-reachable from the initial state");

    std::vector<PathHop> path;
    std::string cur = utg.initial;
    while (cur != target_signature) {
        int remaining = dist_to_target[cur];
        const UtgEdge* best = nullptr;
        for (const auto& e : utg.edges) {
            if (e.kind != ActionKind::Click || e.source != cur) continue;
            auto it = dist_to_target.find(e.target);
            if (it == dist_to_target.end() || it->second != remaining - 1) continue;
            if (!best || std::make_pair(e.element_label, e.element_local_id) <
                             std::make_pair(best->element_label, best->element_local_id))
                best = &e;
        }
        if (!best) throw std::runtime_error("inconsistent click distances in the graph");
        path.push_back({cur, best->element_local_id, best->element_class, best->element_label});
        cur = best->target;
    }
    return path;
}

}  // namespace guipilot
