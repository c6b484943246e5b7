#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "guipilot/gui_model.hpp"

namespace guipilot {

// A declared app transition: acting on `element_selector` (a unique label or
// "path:0/2" child-index path) in state `from` with `kind` moves the app to
// `to`, applying variable effects. Effect values are templates that may
// reference declared variables as {name} and the typed text as {input}.
struct TransitionDef {
    std::string from;
    std::string element_selector;
    std::string element_path;  // resolved child-index path, "" is the root
    ActionKind kind = ActionKind::Click;
    std::string to;
    std::map<std::string, std::string> effects;
    bool destructive = false;
    std::optional<std::pair<std::string, std::string>> guard;  // var must equal value
};

// Per-state screen template. Node text and input values may embed {variable}
// placeholders; labels are static so state signatures stay stable while
// content changes. bind attaches inputs/checkboxes to variables; window
// limits how many children of a scroller are on screen per page.
struct AppStateDef {
    std::string name;
    UiState template_state;                         // ids assigned, placeholders intact
    std::map<std::string, std::string> input_binds;     // path -> variable
    std::map<std::string, std::string> checkbox_binds;  // path -> variable
    std::map<std::string, int> windows;                 // path -> rows per page
};

struct AppDefinition {
    std::string name;
    std::string initial_state;
    std::map<std::string, std::string> variables;  // initial values
    std::map<std::string, AppStateDef> states;
    std::vector<TransitionDef> transitions;
    nlohmann::json raw;  // original document, kept for tooling

    const AppStateDef& state(const std::string& name) const;
    // Signature of a state's full screen; independent of variable values.
    std::string state_signature(const std::string& state_name) const;
    // Full screen for a state rendered with the app's initial variables.
    UiState initial_template(const std::string& state_name) const;
};

AppDefinition load_app(const std::string& path);
AppDefinition app_from_json(const nlohmann::json& doc, const std::string& origin);

// Raised when perform() is handed an action that cannot apply to its target
// (wrong element class, missing target, bad direction).
class EnvError : public std::runtime_error {
public:
    explicit EnvError(const std::string& what) : std::runtime_error(what) {}
};

class Environment {
public:
    virtual ~Environment() = default;
    virtual UiState reset() = 0;
    virtual UiState current() const = 0;
    virtual UiState perform(const Action& a) = 0;
    // Successive views of the current logical screen with every scroller
    // paged through from the start; the union of views covers the full
    // screen. Local ids are shared with the full screen.
    virtual std::vector<UiState> scroll_views() const = 0;
    // Local ids on the current screen whose declared transitions are
    // annotated destructive.
    virtual std::vector<int> risky_targets() const { return {}; }
    // False when the last perform() left the app unchanged.
    virtual bool last_action_had_effect() const { return true; }
};

// Deterministic in-process interpreter for an AppDefinition. All views share
// the local-id numbering of the state's full template, so an id picked from
// a composed or windowed view always resolves.
class SimEnvironment : public Environment {
public:
    explicit SimEnvironment(AppDefinition app);

    UiState reset() override;
    UiState current() const override;
    UiState perform(const Action& a) override;
    std::vector<UiState> scroll_views() const override;
    std::vector<int> risky_targets() const override;
    bool last_action_had_effect() const override { return last_had_effect_; }

    const AppDefinition& app() const { return app_; }
    const std::string& current_state_name() const { return state_; }
    std::string variable(const std::string& name) const;

private:
    UiState build_full() const;  // interpolated full screen, template ids
    UiState apply_windows(const UiState& full, const std::map<std::string, int>& pages) const;
    const TransitionDef* match_transition(const std::string& path, ActionKind kind) const;
    void apply_effects(const TransitionDef& t, const std::string& input_text);

    AppDefinition app_;
    std::string state_;
    std::map<std::string, std::string> vars_;
    std::map<std::string, bool> check_overrides_;       // "state\x1fpath" -> checked
    std::map<std::string, std::string> value_overrides_;  // unbound inputs
    std::map<std::string, int> pages_;                  // scroller path -> page, current state
    bool last_had_effect_ = true;
};

}  // namespace guipilot
