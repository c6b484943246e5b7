#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace guipilot {

enum class ElementClass { Button, Checkbox, Scroller, Input, Plain };

enum class ScrollDirection { Up, Down, Left, Right };

const char* class_tag(ElementClass cls);
ElementClass class_from_tag(const std::string& tag);  // unknown widget kinds map
                                                      // to Plain
const char* direction_name(ScrollDirection d);
std::optional<ScrollDirection> direction_from_name(const std::string& name);

bool is_interactive(ElementClass cls);

// One node of a UI tree. checked is meaningful only for checkboxes, value only
// for inputs, scroll_directions only for scrollers; make_state and
// parse_snapshot enforce that.
struct UiElement {
    int local_id = -1;
    ElementClass cls = ElementClass::Plain;
    std::string label;
    std::string text;
    std::optional<bool> checked;
    std::optional<std::string> value;
    std::vector<ScrollDirection> scroll_directions;
    bool visible = true;
    std::vector<UiElement> children;

    bool operator==(const UiElement&) const = default;
};

struct StateSource {
    enum class Kind { Simulator, Snapshot } kind = Kind::Snapshot;
    std::string name;  // simulator state name or snapshot file path

    bool operator==(const StateSource&) const = default;
};

struct UiState {
    UiElement root;
    std::string signature;
    StateSource source;

    bool operator==(const UiState&) const = default;
};

// Malformed structured input (snapshots, app files). path points at the
// offending node, e.g. "/children/2/children/0".
class SchemaError : public std::runtime_error {
public:
    SchemaError(const std::string& path, const std::string& what)
        : std::runtime_error("schema error at '" + (path.empty() ? "/" : path) + "': " + what),
          path_(path) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

// Assigns pre-order local ids, validates per-class field usage and computes
// the signature. All canonical states are built through here.
UiState make_state(UiElement root, StateSource source);

// Digest over the pre-order sequence of (depth, class, label, visibility,
// scroll directions). Text, value and checked state are deliberately left
// out so that screens differing only in dynamic content share a signature.
std::string compute_signature(const UiElement& root);

std::vector<const UiElement*> flatten(const UiState& state);  // pre-order
const UiElement* find_element(const UiState& state, int local_id);

// Visible elements whose class supports interaction, in pre-order.
std::vector<const UiElement*> interactive_elements(const UiState& state);

// Human-readable identity of an element: its label if set, otherwise the
// first text found on the element or (pre-order) on its descendants. List
// rows frequently carry no label, so their leading text stands in for one.
std::string display_name(const UiElement& e);

UiState parse_snapshot(const nlohmann::json& doc, const std::string& source_name);
UiState load_snapshot(const std::string& path);
nlohmann::json snapshot_json(const UiElement& root);
nlohmann::json snapshot_json(const UiState& state);

enum class ActionKind { Click, Check, Uncheck, Input, Scroll, Back, Finish };

const char* action_kind_name(ActionKind kind);
std::optional<ActionKind> action_kind_from_name(const std::string& name);

// target is a local id in the state the action is addressed to; Back and
// Finish take no target. input_text is used by Input, direction by Scroll.
struct Action {
    ActionKind kind = ActionKind::Click;
    std::optional<int> target;
    std::string input_text;
    std::optional<ScrollDirection> direction;

    bool operator==(const Action&) const = default;
};

// Click->Button, Check/Uncheck->Checkbox, Input->Input, Scroll->Scroller;
// Back/Finish are target-free and always compatible.
bool action_compatible(ActionKind kind, ElementClass cls);

nlohmann::json action_json(const Action& a);
Action action_from_json(const nlohmann::json& j);

}  // namespace guipilot
