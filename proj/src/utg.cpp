#include "guipilot/utg.hpp"

#include <algorithm>
#include <deque>
#include <fstream>

namespace guipilot {

using nlohmann::json;

bool Utg::has_node(const std::string& signature) const { return node(signature) != nullptr; }

const UtgNode* Utg::node(const std::string& signature) const {
    for (const auto& n : nodes)
        if (n.signature == signature) return &n;
    return nullptr;
}

UtgNode* Utg::node(const std::string& signature) {
    for (auto& n : nodes)
        if (n.signature == signature) return &n;
    return nullptr;
}

bool Utg::add_node(UiState representative) {
    if (has_node(representative.signature)) return false;
    UtgNode n;
    n.signature = representative.signature;
    n.representative = std::move(representative);
    nodes.push_back(std::move(n));
    return true;
}

bool Utg::add_edge(UtgEdge edge) {
    for (const auto& e : edges)
        if (e == edge) return false;
    edges.push_back(std::move(edge));
    return true;
}

std::vector<const UtgEdge*> Utg::edges_from(const std::string& signature) const {
    std::vector<const UtgEdge*> out;
    for (const auto& e : edges)
        if (e.source == signature) out.push_back(&e);
    return out;
}

std::optional<std::string> Utg::click_target(const std::string& signature, int element_local_id) const {
    std::optional<std::string> target;
    for (const auto& e : edges) {
        if (e.source != signature || e.element_local_id != element_local_id ||
            e.kind != ActionKind::Click)
            continue;
        if (target.has_value() && *target != e.target) return std::nullopt;  // ambiguous
        target = e.target;
    }
    return target;
}

void Utg::recompute_depths() {
    for (auto& n : nodes) n.depth = -1;
    UtgNode* start = node(initial);
    if (!start) return;
    start->depth = 0;
    std::deque<std::string> queue{initial};
    while (!queue.empty()) {
        std::string cur = queue.front();
        queue.pop_front();
        int d = node(cur)->depth;
        for (const UtgEdge* e : edges_from(cur)) {
            if (e->kind != ActionKind::Click) continue;
            UtgNode* t = node(e->target);
            if (t && t->depth < 0) {
                t->depth = d + 1;
                queue.push_back(t->signature);
            }
        }
    }
}

json utg_json(const Utg& utg) {
    // Sorted emission keeps serialization byte-stable across runs.
    std::vector<const UtgNode*> nodes_sorted;
    for (const auto& n : utg.nodes) nodes_sorted.push_back(&n);
    std::sort(nodes_sorted.begin(), nodes_sorted.end(), [](const UtgNode* a, const UtgNode* b) {
        if (a->depth != b->depth) return a->depth < b->depth;
        return a->signature < b->signature;
    });
    std::vector<const UtgEdge*> edges_sorted;
    for (const auto& e : utg.edges) edges_sorted.push_back(&e);
    std::sort(edges_sorted.begin(), edges_sorted.end(), [](const UtgEdge* a, const UtgEdge* b) {
        auto key = [](const UtgEdge& e) {
            return std::tuple<const std::string&, int, int, const std::string&>(
                e.source, e.element_local_id, static_cast<int>(e.kind), e.target);
        };
        return key(*a) < key(*b);
    });

    json j = json::object();
    j["initial"] = utg.initial;
    json nodes = json::array();
    for (const UtgNode* n : nodes_sorted) {
        json nj = json::object();
        nj["signature"] = n->signature;
        nj["depth"] = n->depth;
        nj["source"] = n->representative.source.name;
        nj["state"] = snapshot_json(n->representative);
        nodes.push_back(nj);
    }
    j["nodes"] = nodes;
    json edges = json::array();
    for (const UtgEdge* e : edges_sorted) {
        json ej = json::object();
        ej["source"] = e->source;
        ej["element_id"] = e->element_local_id;
        ej["element_class"] = class_tag(e->element_class);
        ej["element_label"] = e->element_label;
        ej["kind"] = action_kind_name(e->kind);
        ej["target"] = e->target;
        edges.push_back(ej);
    }
    j["edges"] = edges;
    return j;
}

Utg utg_from_json(const json& j) {
    Utg utg;
    if (!j.is_object() || !j.contains("initial") || !j.contains("nodes") || !j.contains("edges"))
        throw SchemaError("", "transition graph requires 'initial', 'nodes' and 'edges'");
    utg.initial = j["initial"].get<std::string>();
    for (const auto& nj : j["nodes"]) {
        UiState state = parse_snapshot(nj["state"], nj.value("source", std::string{}));
        state.source.kind = StateSource::Kind::Simulator;
        std::string recorded = nj["signature"].get<std::string>();
        if (state.signature != recorded)
            throw SchemaError("", "node signature mismatch for '" + recorded + "'");
        UtgNode n;
        n.signature = recorded;
        n.representative = std::move(state);
        n.depth = nj.value("depth", -1);
        utg.nodes.push_back(std::move(n));
    }
    for (const auto& ej : j["edges"]) {
        UtgEdge e;
        e.source = ej["source"].get<std::string>();
        e.element_local_id = ej["element_id"].get<int>();
        e.element_class = class_from_tag(ej["element_class"].get<std::string>());
        e.element_label = ej.value("element_label", std::string{});
        auto kind = action_kind_from_name(ej["kind"].get<std::string>());
        if (!kind) throw SchemaError("", "unknown edge action kind");
        e.kind = *kind;
        e.target = ej["target"].get<std::string>();
        utg.edges.push_back(std::move(e));
    }
    return utg;
}

void save_utg(const Utg& utg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write transition graph to '" + path + "'");
    out << utg_json(utg).dump(2) << "\n";
}

Utg load_utg(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open transition graph '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::runtime_error("transition graph '" + path + "' is not valid JSON: " + e.what());
    }
    return utg_from_json(j);
}

}  // namespace guipilot
