#include "guipilot/gui_model.hpp"

#include <algorithm>
#include <fstream>

#include "guipilot/digest.hpp"

namespace guipilot {

namespace {

using nlohmann::json;

const char* kClassTags[] = {"button", "checkbox", "scroller", "input", "p"};
const char* kDirectionNames[] = {"up", "down", "left", "right"};
const char* kActionNames[] = {"click", "check", "uncheck", "input", "scroll", "back", "finish"};

int assign_ids(UiElement& e, int next) {
    e.local_id = next++;
    for (auto& child : e.children) next = assign_ids(child, next);
    return next;
}

void validate_fields(const UiElement& e, const std::string& path) {
    if (e.checked.has_value() && e.cls != ElementClass::Checkbox)
        throw SchemaError(path, "'checked' is only valid on checkbox elements");
    if (e.cls == ElementClass::Checkbox && !e.checked.has_value())
        throw SchemaError(path, "checkbox elements require 'checked'");
    if (e.value.has_value() && e.cls != ElementClass::Input)
        throw SchemaError(path, "'value' is only valid on input elements");
    if (e.cls == ElementClass::Input && !e.value.has_value())
        throw SchemaError(path, "input elements require 'value'");
    if (!e.scroll_directions.empty() && e.cls != ElementClass::Scroller)
        throw SchemaError(path, "'scroll_directions' is only valid on scroller elements");
    if (e.cls == ElementClass::Scroller && e.scroll_directions.empty())
        throw SchemaError(path, "scroller elements require non-empty 'scroll_directions'");
    for (size_t i = 0; i < e.children.size(); ++i)
        validate_fields(e.children[i], path + "/children/" + std::to_string(i));
}

void signature_feed(const UiElement& e, int depth, std::string& buf) {
    buf += 'd';
    buf += std::to_string(depth);
    buf += '|';
    buf += class_tag(e.cls);
    buf += '|';
    buf += std::to_string(e.label.size());
    buf += ':';
    buf += e.label;
    buf += '|';
    buf += e.visible ? 'v' : 'h';
    buf += '|';
    unsigned mask = 0;
    for (auto d : e.scroll_directions) mask |= 1u << static_cast<unsigned>(d);
    buf += std::to_string(mask);
    buf += ';';
    for (const auto& child : e.children) signature_feed(child, depth + 1, buf);
}

void flatten_into(const UiElement& e, std::vector<const UiElement*>& out) {
    out.push_back(&e);
    for (const auto& child : e.children) flatten_into(child, out);
}

UiElement parse_node(const json& node, const std::string& path) {
    if (!node.is_object()) throw SchemaError(path, "node must be an object");
    UiElement e;
    if (node.contains("class")) {
        if (!node["class"].is_string()) throw SchemaError(path, "'class' must be a string");
        e.cls = class_from_tag(node["class"].get<std::string>());
    }
    if (node.contains("label")) {
        if (!node["label"].is_string()) throw SchemaError(path, "'label' must be a string");
        e.label = node["label"].get<std::string>();
    }
    if (node.contains("text")) {
        if (!node["text"].is_string()) throw SchemaError(path, "'text' must be a string");
        e.text = node["text"].get<std::string>();
    }
    if (node.contains("visible")) {
        if (!node["visible"].is_boolean()) throw SchemaError(path, "'visible' must be a boolean");
        e.visible = node["visible"].get<bool>();
    }
    if (node.contains("checked")) {
        if (!node["checked"].is_boolean()) throw SchemaError(path, "'checked' must be a boolean");
        if (e.cls != ElementClass::Checkbox)
            throw SchemaError(path, "'checked' is only valid on checkbox elements");
        e.checked = node["checked"].get<bool>();
    } else if (e.cls == ElementClass::Checkbox) {
        e.checked = false;
    }
    if (node.contains("value")) {
        if (!node["value"].is_string()) throw SchemaError(path, "'value' must be a string");
        if (e.cls != ElementClass::Input)
            throw SchemaError(path, "'value' is only valid on input elements");
        e.value = node["value"].get<std::string>();
    } else if (e.cls == ElementClass::Input) {
        e.value = "";
    }
    if (node.contains("scroll_directions")) {
        if (!node["scroll_directions"].is_array())
            throw SchemaError(path, "'scroll_directions' must be an array");
        if (e.cls != ElementClass::Scroller)
            throw SchemaError(path, "'scroll_directions' is only valid on scroller elements");
        for (const auto& d : node["scroll_directions"]) {
            if (!d.is_string()) throw SchemaError(path, "scroll direction must be a string");
            auto dir = direction_from_name(d.get<std::string>());
            if (!dir) throw SchemaError(path, "unknown scroll direction '" + d.get<std::string>() + "'");
            e.scroll_directions.push_back(*dir);
        }
    }
    if (e.cls == ElementClass::Scroller && e.scroll_directions.empty())
        throw SchemaError(path, "scroller elements require non-empty 'scroll_directions'");
    if (node.contains("children")) {
        if (!node["children"].is_array()) throw SchemaError(path, "'children' must be an array");
        size_t i = 0;
        for (const auto& child : node["children"]) {
            e.children.push_back(parse_node(child, path + "/children/" + std::to_string(i)));
            ++i;
        }
    }
    return e;
}

}  // namespace

const char* class_tag(ElementClass cls) { return kClassTags[static_cast<int>(cls)]; }

ElementClass class_from_tag(const std::string& tag) {
    for (int i = 0; i < 5; ++i)
        if (tag == kClassTags[i]) return static_cast<ElementClass>(i);
    return ElementClass::Plain;
}

const char* direction_name(ScrollDirection d) { return kDirectionNames[static_cast<int>(d)]; }

std::optional<ScrollDirection> direction_from_name(const std::string& name) {
    for (int i = 0; i < 4; ++i)
        if (name == kDirectionNames[i]) return static_cast<ScrollDirection>(i);
    return std::nullopt;
}

bool is_interactive(ElementClass cls) { return cls != ElementClass::Plain; }

UiState make_state(UiElement root, StateSource source) {
    validate_fields(root, "");
    assign_ids(root, 0);
    UiState state;
    state.signature = compute_signature(root);
    state.root = std::move(root);
    state.source = std::move(source);
    return state;
}

std::string compute_signature(const UiElement& root) {
    std::string buf;
    buf.reserve(256);
    signature_feed(root, 0, buf);
    return hex_digest(buf);
}

std::vector<const UiElement*> flatten(const UiState& state) {
    std::vector<const UiElement*> out;
    flatten_into(state.root, out);
    return out;
}

const UiElement* find_element(const UiState& state, int local_id) {
    for (const UiElement* e : flatten(state))
        if (e->local_id == local_id) return e;
    return nullptr;
}

std::vector<const UiElement*> interactive_elements(const UiState& state) {
    std::vector<const UiElement*> out;
    for (const UiElement* e : flatten(state))
        if (e->visible && is_interactive(e->cls)) out.push_back(e);
    return out;
}

std::string display_name(const UiElement& e) {
    if (!e.label.empty()) return e.label;
    if (!e.text.empty()) return e.text;
    for (const auto& child : e.children) {
        std::string name = display_name(child);
        if (!name.empty()) return name;
    }
    return {};
}

UiState parse_snapshot(const nlohmann::json& doc, const std::string& source_name) {
    UiElement root = parse_node(doc, "");
    return make_state(std::move(root), {StateSource::Kind::Snapshot, source_name});
}

UiState load_snapshot(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open snapshot file '" + path + "'");
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        throw std::runtime_error("snapshot file '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_snapshot(doc, path);
}

nlohmann::json snapshot_json(const UiElement& e) {
    json node = json::object();
    node["class"] = class_tag(e.cls);
    if (!e.label.empty()) node["label"] = e.label;
    if (!e.text.empty()) node["text"] = e.text;
    if (e.checked.has_value()) node["checked"] = *e.checked;
    if (e.value.has_value()) node["value"] = *e.value;
    if (!e.scroll_directions.empty()) {
        json dirs = json::array();
        for (auto d : e.scroll_directions) dirs.push_back(direction_name(d));
        node["scroll_directions"] = dirs;
    }
    if (!e.visible) node["visible"] = false;
    if (!e.children.empty()) {
        json kids = json::array();
        for (const auto& child : e.children) kids.push_back(snapshot_json(child));
        node["children"] = kids;
    }
    return node;
}

nlohmann::json snapshot_json(const UiState& state) { return snapshot_json(state.root); }

const char* action_kind_name(ActionKind kind) { return kActionNames[static_cast<int>(kind)]; }

std::optional<ActionKind> action_kind_from_name(const std::string& name) {
    for (int i = 0; i < 7; ++i)
        if (name == kActionNames[i]) return static_cast<ActionKind>(i);
    return std::nullopt;
}

bool action_compatible(ActionKind kind, ElementClass cls) {
    switch (kind) {
        case ActionKind::Click: return cls == ElementClass::Button;
        case ActionKind::Check:
        case ActionKind::Uncheck: return cls == ElementClass::Checkbox;
        case ActionKind::Input: return cls == ElementClass::Input;
        case ActionKind::Scroll: return cls == ElementClass::Scroller;
        case ActionKind::Back:
        case ActionKind::Finish: return true;
    }
    return false;
}

nlohmann::json action_json(const Action& a) {
    json j = json::object();
    j["kind"] = action_kind_name(a.kind);
    if (a.target.has_value()) j["target"] = *a.target;
    if (!a.input_text.empty()) j["input_text"] = a.input_text;
    if (a.direction.has_value()) j["direction"] = direction_name(*a.direction);
    return j;
}

Action action_from_json(const nlohmann::json& j) {
    Action a;
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
        throw SchemaError("", "action requires a 'kind' string");
    auto kind = action_kind_from_name(j["kind"].get<std::string>());
    if (!kind) throw SchemaError("", "unknown action kind '" + j["kind"].get<std::string>() + "'");
    a.kind = *kind;
    if (j.contains("target")) a.target = j["target"].get<int>();
    if (j.contains("input_text")) a.input_text = j["input_text"].get<std::string>();
    if (j.contains("direction")) {
        auto d = direction_from_name(j["direction"].get<std::string>());
        if (!d) throw SchemaError("", "unknown scroll direction");
        a.direction = d;
    }
    return a;
}

}  // namespace guipilot
