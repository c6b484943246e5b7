#include "guipilot/environment.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <set>

namespace guipilot {

namespace {

using nlohmann::json;

// {name} placeholders; unknown names are a load-time error, so expansion
// never leaves braces behind.
std::string interpolate(const std::string& tmpl, const std::map<std::string, std::string>& vars) {
    std::string out;
    size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] == '{') {
            size_t end = tmpl.find('}', i);
            if (end != std::string::npos) {
                std::string name = tmpl.substr(i + 1, end - i - 1);
                auto it = vars.find(name);
                if (it != vars.end()) {
                    out += it->second;
                    i = end + 1;
                    continue;
                }
            }
        }
        out += tmpl[i++];
    }
    return out;
}

std::vector<std::string> placeholder_names(const std::string& tmpl) {
    std::vector<std::string> names;
    size_t i = 0;
    while ((i = tmpl.find('{', i)) != std::string::npos) {
        size_t end = tmpl.find('}', i);
        if (end == std::string::npos) break;
        names.push_back(tmpl.substr(i + 1, end - i - 1));
        i = end + 1;
    }
    return names;
}

void walk_paths(const UiElement& e, const std::string& path,
                const std::function<void(const UiElement&, const std::string&)>& fn) {
    fn(e, path);
    for (size_t i = 0; i < e.children.size(); ++i) {
        std::string child_path = path.empty() ? std::to_string(i) : path + "/" + std::to_string(i);
        walk_paths(e.children[i], child_path, fn);
    }
}

const UiElement* node_at_path(const UiElement& root, const std::string& path) {
    if (path.empty()) return &root;
    const UiElement* cur = &root;
    size_t i = 0;
    while (i <= path.size()) {
        size_t end = path.find('/', i);
        if (end == std::string::npos) end = path.size();
        size_t idx = std::stoul(path.substr(i, end - i));
        if (idx >= cur->children.size()) return nullptr;
        cur = &cur->children[idx];
        i = end + 1;
        if (end == path.size()) break;
    }
    return cur;
}

UiElement* node_at_path(UiElement& root, const std::string& path) {
    return const_cast<UiElement*>(node_at_path(static_cast<const UiElement&>(root), path));
}

std::string check_override_key(const std::string& state, const std::string& path) {
    return state + '\x1f' + path;
}

ActionKind transition_kind_from_name(const std::string& name, const std::string& context) {
    auto kind = action_kind_from_name(name);
    if (!kind || (*kind != ActionKind::Click && *kind != ActionKind::Check &&
                  *kind != ActionKind::Uncheck && *kind != ActionKind::Input &&
                  *kind != ActionKind::Back))
        throw std::runtime_error(context + ": unsupported transition action '" + name + "'");
    return *kind;
}

}  // namespace

const AppStateDef& AppDefinition::state(const std::string& name) const {
    auto it = states.find(name);
    if (it == states.end())
        throw std::runtime_error("app '" + this->name + "' has no state named '" + name + "'");
    return it->second;
}

std::string AppDefinition::state_signature(const std::string& state_name) const {
    return state(state_name).template_state.signature;
}

UiState AppDefinition::initial_template(const std::string& state_name) const {
    const AppStateDef& def = state(state_name);
    UiState out = def.template_state;
    walk_paths(out.root, "", [&](const UiElement&, const std::string&) {});
    // Interpolate with initial variable values.
    std::function<void(UiElement&)> expand = [&](UiElement& e) {
        e.text = interpolate(e.text, variables);
        if (e.value.has_value()) e.value = interpolate(*e.value, variables);
        for (auto& child : e.children) expand(child);
    };
    expand(out.root);
    return out;
}

AppDefinition app_from_json(const json& doc, const std::string& origin) {
    if (!doc.is_object()) throw std::runtime_error(origin + ": app document must be an object");
    AppDefinition app;
    app.raw = doc;
    if (!doc.contains("name") || !doc["name"].is_string())
        throw std::runtime_error(origin + ": app requires a 'name' string");
    app.name = doc["name"].get<std::string>();
    if (!doc.contains("states") || !doc["states"].is_object() || doc["states"].empty())
        throw std::runtime_error(origin + ": app '" + app.name + "' declares no states");
    if (!doc.contains("initial_state") || !doc["initial_state"].is_string())
        throw std::runtime_error(origin + ": app requires 'initial_state'");
    app.initial_state = doc["initial_state"].get<std::string>();
    if (doc.contains("variables")) {
        for (const auto& [k, v] : doc["variables"].items()) {
            if (!v.is_string())
                throw std::runtime_error(origin + ": variable '" + k + "' must be a string");
            app.variables[k] = v.get<std::string>();
        }
    }

    for (const auto& [state_name, state_doc] : doc["states"].items()) {
        if (!state_doc.is_object() || !state_doc.contains("root"))
            throw std::runtime_error(origin + ": state '" + state_name + "' requires a 'root' node");
        AppStateDef def;
        def.name = state_name;
        UiState parsed = parse_snapshot(state_doc["root"], state_name);
        parsed.source = {StateSource::Kind::Simulator, state_name};
        def.template_state = std::move(parsed);

        // bind/window are app-level extras on top of the snapshot schema;
        // collect them by child-index path from the raw document.
        std::function<void(const json&, const std::string&)> collect = [&](const json& node,
                                                                           const std::string& path) {
            if (node.contains("bind")) {
                if (!node["bind"].is_string())
                    throw std::runtime_error(origin + ": state '" + state_name + "': 'bind' must be a string");
                std::string var = node["bind"].get<std::string>();
                if (!app.variables.count(var))
                    throw std::runtime_error(origin + ": state '" + state_name + "' binds undeclared variable '" + var + "'");
                std::string cls = node.value("class", "p");
                if (cls == "input")
                    def.input_binds[path] = var;
                else if (cls == "checkbox")
                    def.checkbox_binds[path] = var;
                else
                    throw std::runtime_error(origin + ": state '" + state_name + "': only inputs and checkboxes can bind variables");
            }
            if (node.contains("window")) {
                if (!node["window"].is_number_integer() || node["window"].get<int>() < 1)
                    throw std::runtime_error(origin + ": state '" + state_name + "': 'window' must be a positive integer");
                if (node.value("class", "p") != "scroller")
                    throw std::runtime_error(origin + ": state '" + state_name + "': 'window' is only valid on scrollers");
                def.windows[path] = node["window"].get<int>();
            }
            if (node.contains("children")) {
                size_t i = 0;
                for (const auto& child : node["children"]) {
                    collect(child, path.empty() ? std::to_string(i) : path + "/" + std::to_string(i));
                    ++i;
                }
            }
        };
        collect(state_doc["root"], "");

        // Labels feed state signatures; placeholders there would make one
        // screen look like many.
        walk_paths(def.template_state.root, "", [&](const UiElement& e, const std::string&) {
            if (e.label.find('{') != std::string::npos)
                throw std::runtime_error(origin + ": state '" + state_name + "': labels must not contain placeholders ('" + e.label + "')");
            for (const std::string& name : placeholder_names(e.text))
                if (!app.variables.count(name))
                    throw std::runtime_error(origin + ": state '" + state_name + "' references undeclared variable '" + name + "'");
            if (e.value.has_value())
                for (const std::string& name : placeholder_names(*e.value))
                    if (!app.variables.count(name))
                        throw std::runtime_error(origin + ": state '" + state_name + "' references undeclared variable '" + name + "'");
        });

        app.states.emplace(state_name, std::move(def));
    }

    if (!app.states.count(app.initial_state))
        throw std::runtime_error(origin + ": initial state '" + app.initial_state + "' is not declared");

    if (doc.contains("transitions")) {
        size_t index = 0;
        for (const auto& tj : doc["transitions"]) {
            std::string context = origin + ": transition #" + std::to_string(index++);
            TransitionDef t;
            t.from = tj.value("from", std::string{});
            t.to = tj.value("to", std::string{});
            if (!app.states.count(t.from))
                throw std::runtime_error(context + ": unknown source state '" + t.from + "'");
            if (!app.states.count(t.to))
                throw std::runtime_error(context + ": unknown target state '" + t.to + "'");
            t.kind = transition_kind_from_name(tj.value("action", "click"), context);
            t.element_selector = tj.value("element", std::string{});
            if (t.kind == ActionKind::Back) {
                if (!t.element_selector.empty())
                    throw std::runtime_error(context + ": back transitions take no element");
            } else {
                const AppStateDef& from_def = app.states.at(t.from);
                std::vector<std::pair<std::string, const UiElement*>> matches;
                if (t.element_selector.rfind("path:", 0) == 0) {
                    std::string path = t.element_selector.substr(5);
                    const UiElement* node = node_at_path(from_def.template_state.root, path);
                    if (!node)
                        throw std::runtime_error(context + ": path '" + path + "' does not resolve in state '" + t.from + "'");
                    matches.emplace_back(path, node);
                } else {
                    walk_paths(from_def.template_state.root, "",
                               [&](const UiElement& e, const std::string& path) {
                                   if (e.label == t.element_selector) matches.emplace_back(path, &e);
                               });
                    if (matches.empty())
                        throw std::runtime_error(context + ": no element labeled '" + t.element_selector + "' in state '" + t.from + "'");
                    if (matches.size() > 1)
                        throw std::runtime_error(context + ": label '" + t.element_selector + "' is ambiguous in state '" + t.from + "'");
                }
                t.element_path = matches.front().first;
                ElementClass cls = matches.front().second->cls;
                if (!action_compatible(t.kind, cls))
                    throw std::runtime_error(context + ": action '" + std::string(action_kind_name(t.kind)) +
                                             "' cannot target a " + class_tag(cls) + " element");
            }
            if (tj.contains("effects")) {
                for (const auto& [var, tmpl] : tj["effects"].items()) {
                    if (!app.variables.count(var))
                        throw std::runtime_error(context + ": effect writes undeclared variable '" + var + "'");
                    std::string tmpl_str = tmpl.get<std::string>();
                    for (const std::string& name : placeholder_names(tmpl_str))
                        if (name != "input" && !app.variables.count(name))
                            throw std::runtime_error(context + ": effect references undeclared variable '" + name + "'");
                    t.effects[var] = tmpl_str;
                }
            }
            t.destructive = tj.value("destructive", false);
            if (tj.contains("guard")) {
                const auto& g = tj["guard"];
                std::string var = g.value("var", std::string{});
                if (!app.variables.count(var))
                    throw std::runtime_error(context + ": guard references undeclared variable '" + var + "'");
                t.guard = std::make_pair(var, g.value("equals", std::string{}));
            }
            app.transitions.push_back(std::move(t));
        }
    }
    return app;
}

AppDefinition load_app(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open app file '" + path + "'");
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        throw std::runtime_error("app file '" + path + "' is not valid JSON: " + e.what());
    }
    return app_from_json(doc, path);
}

SimEnvironment::SimEnvironment(AppDefinition app) : app_(std::move(app)) {
    state_ = app_.initial_state;
    vars_ = app_.variables;
}

UiState SimEnvironment::reset() {
    state_ = app_.initial_state;
    vars_ = app_.variables;
    check_overrides_.clear();
    value_overrides_.clear();
    pages_.clear();
    last_had_effect_ = true;
    return current();
}

UiState SimEnvironment::build_full() const {
    const AppStateDef& def = app_.state(state_);
    UiState out = def.template_state;  // ids and signature stay as assigned
    std::function<void(UiElement&, const std::string&)> expand = [&](UiElement& e,
                                                                     const std::string& path) {
        e.text = interpolate(e.text, vars_);
        if (e.value.has_value()) e.value = interpolate(*e.value, vars_);
        auto bind = def.checkbox_binds.find(path);
        if (bind != def.checkbox_binds.end()) {
            e.checked = vars_.at(bind->second) == "true";
        } else if (e.cls == ElementClass::Checkbox) {
            auto ov = check_overrides_.find(check_override_key(state_, path));
            if (ov != check_overrides_.end()) e.checked = ov->second;
        }
        auto in_bind = def.input_binds.find(path);
        if (in_bind != def.input_binds.end()) {
            e.value = vars_.at(in_bind->second);
        } else if (e.cls == ElementClass::Input) {
            auto ov = value_overrides_.find(check_override_key(state_, path));
            if (ov != value_overrides_.end()) e.value = ov->second;
        }
        for (size_t i = 0; i < e.children.size(); ++i)
            expand(e.children[i], path.empty() ? std::to_string(i) : path + "/" + std::to_string(i));
    };
    expand(out.root, "");
    return out;
}

UiState SimEnvironment::apply_windows(const UiState& full,
                                      const std::map<std::string, int>& pages) const {
    const AppStateDef& def = app_.state(state_);
    if (def.windows.empty()) return full;
    UiState out = full;
    for (const auto& [path, window] : def.windows) {
        UiElement* scroller = node_at_path(out.root, path);
        if (!scroller) continue;
        int n = static_cast<int>(scroller->children.size());
        int page_count = std::max(1, (n + window - 1) / window);
        int page = 0;
        auto it = pages.find(path);
        if (it != pages.end()) page = std::clamp(it->second, 0, page_count - 1);
        int begin = page * window;
        int end = std::min(n, begin + window);
        std::vector<UiElement> kept(scroller->children.begin() + begin,
                                    scroller->children.begin() + end);
        scroller->children = std::move(kept);
    }
    // A windowed view is a partial look at the full screen: ids stay shared
    // with the full template, the signature reflects what is on screen.
    out.signature = compute_signature(out.root);
    return out;
}

UiState SimEnvironment::current() const {
    return apply_windows(build_full(), pages_);
}

std::vector<UiState> SimEnvironment::scroll_views() const {
    UiState full = build_full();
    const AppStateDef& def = app_.state(state_);
    std::vector<UiState> views;
    std::map<std::string, int> zero;
    views.push_back(apply_windows(full, zero));
    for (const auto& [path, window] : def.windows) {
        UiElement root_copy = full.root;
        UiElement* scroller = node_at_path(root_copy, path);
        if (!scroller) continue;
        int n = static_cast<int>(scroller->children.size());
        int page_count = std::max(1, (n + window - 1) / window);
        for (int page = 1; page < page_count; ++page) {
            std::map<std::string, int> pages = zero;
            pages[path] = page;
            views.push_back(apply_windows(full, pages));
        }
    }
    return views;
}

const TransitionDef* SimEnvironment::match_transition(const std::string& path,
                                                      ActionKind kind) const {
    for (const auto& t : app_.transitions) {
        if (t.from != state_ || t.kind != kind) continue;
        if (kind != ActionKind::Back && t.element_path != path) continue;
        if (t.guard.has_value()) {
            auto it = vars_.find(t.guard->first);
            if (it == vars_.end() || it->second != t.guard->second) continue;
        }
        return &t;
    }
    return nullptr;
}

void SimEnvironment::apply_effects(const TransitionDef& t, const std::string& input_text) {
    std::map<std::string, std::string> scope = vars_;
    scope["input"] = input_text;
    std::map<std::string, std::string> updates;
    for (const auto& [var, tmpl] : t.effects) updates[var] = interpolate(tmpl, scope);
    for (auto& [var, value] : updates) vars_[var] = value;
}

UiState SimEnvironment::perform(const Action& a) {
    last_had_effect_ = true;
    if (a.kind == ActionKind::Finish) {
        last_had_effect_ = false;
        return current();
    }
    if (a.kind == ActionKind::Back) {
        const TransitionDef* t = match_transition("", ActionKind::Back);
        if (!t) {
            last_had_effect_ = false;
            return current();
        }
        apply_effects(*t, "");
        state_ = t->to;
        pages_.clear();
        return current();
    }

    if (!a.target.has_value()) throw EnvError("action requires a target element");
    UiState full = build_full();
    const UiElement* target = find_element(full, *a.target);
    if (!target)
        throw EnvError("target id " + std::to_string(*a.target) + " does not resolve in state '" + state_ + "'");
    if (!action_compatible(a.kind, target->cls))
        throw EnvError(std::string("action '") + action_kind_name(a.kind) + "' cannot target a " +
                       class_tag(target->cls) + " element");

    std::string path;
    bool found = false;
    walk_paths(full.root, "", [&](const UiElement& e, const std::string& p) {
        if (e.local_id == target->local_id) {
            path = p;
            found = true;
        }
    });
    (void)found;

    const AppStateDef& def = app_.state(state_);
    bool changed = false;

    switch (a.kind) {
        case ActionKind::Click:
            break;
        case ActionKind::Check:
        case ActionKind::Uncheck: {
            bool want = a.kind == ActionKind::Check;
            auto bind = def.checkbox_binds.find(path);
            bool now = target->checked.value_or(false);
            if (now != want) changed = true;
            if (bind != def.checkbox_binds.end())
                vars_[bind->second] = want ? "true" : "false";
            else
                check_overrides_[check_override_key(state_, path)] = want;
            break;
        }
        case ActionKind::Input: {
            auto bind = def.input_binds.find(path);
            if (bind != def.input_binds.end())
                vars_[bind->second] = a.input_text;
            else
                value_overrides_[check_override_key(state_, path)] = a.input_text;
            changed = true;
            break;
        }
        case ActionKind::Scroll: {
            auto win = def.windows.find(path);
            if (win == def.windows.end()) {
                last_had_effect_ = false;
                return current();
            }
            if (!a.direction.has_value() ||
                std::find(target->scroll_directions.begin(), target->scroll_directions.end(),
                          *a.direction) == target->scroll_directions.end()) {
                last_had_effect_ = false;
                return current();
            }
            int n = static_cast<int>(node_at_path(full.root, path)->children.size());
            int page_count = std::max(1, (n + win->second - 1) / win->second);
            int page = pages_.count(path) ? pages_[path] : 0;
            int next = page;
            if (*a.direction == ScrollDirection::Down || *a.direction == ScrollDirection::Right)
                next = std::min(page + 1, page_count - 1);
            else
                next = std::max(page - 1, 0);
            if (next == page) {
                last_had_effect_ = false;
                return current();
            }
            pages_[path] = next;
            return current();
        }
        default:
            break;
    }

    const TransitionDef* t = match_transition(path, a.kind);
    if (t) {
        apply_effects(*t, a.input_text);
        state_ = t->to;
        pages_.clear();
        return current();
    }
    if (a.kind == ActionKind::Click && !changed) last_had_effect_ = false;
    return current();
}

std::vector<int> SimEnvironment::risky_targets() const {
    UiState full = build_full();
    std::set<int> ids;
    walk_paths(full.root, "", [&](const UiElement& e, const std::string& path) {
        for (const auto& t : app_.transitions) {
            if (t.from == state_ && t.destructive && t.kind != ActionKind::Back &&
                t.element_path == path)
                ids.insert(e.local_id);
        }
    });
    return {ids.begin(), ids.end()};
}

std::string SimEnvironment::variable(const std::string& name) const {
    auto it = vars_.find(name);
    if (it == vars_.end())
        throw std::runtime_error("app '" + app_.name + "' has no variable '" + name + "'");
    return it->second;
}

}  // namespace guipilot
