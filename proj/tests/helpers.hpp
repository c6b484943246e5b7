#pragma once

// Shared builders for tests: compact UI-tree construction, deterministic
// random trees, and minimal LlmBackend stand-ins.

#include <random>
#include <string>
#include <utility>
#include <vector>

#include "guipilot/gui_model.hpp"
#include "guipilot/llm_gateway.hpp"

namespace guipilot::testing {

#ifdef GUIPILOT_FIXTURES
inline std::string fixture_path(const std::string& name) {
    return std::string(GUIPILOT_FIXTURES) + "/" + name;
}
#endif

#ifdef GUIPILOT_REPO_ROOT
inline std::string repo_path(const std::string& rel) {
    return std::string(GUIPILOT_REPO_ROOT) + "/" + rel;
}
#endif

inline UiElement el(ElementClass cls) {
    UiElement e;
    e.cls = cls;
    return e;
}

inline UiElement plain(std::string text) {
    UiElement e = el(ElementClass::Plain);
    e.text = std::move(text);
    return e;
}

inline UiElement button(std::string label) {
    UiElement e = el(ElementClass::Button);
    e.label = std::move(label);
    return e;
}

inline UiElement checkbox(std::string label, bool checked) {
    UiElement e = el(ElementClass::Checkbox);
    e.label = std::move(label);
    e.checked = checked;
    return e;
}

inline UiElement input(std::string label, std::string value = "") {
    UiElement e = el(ElementClass::Input);
    e.label = std::move(label);
    e.value = std::move(value);
    return e;
}

inline UiElement scroller(std::vector<UiElement> children,
                          std::vector<ScrollDirection> dirs = {ScrollDirection::Up,
                                                               ScrollDirection::Down}) {
    UiElement e = el(ElementClass::Scroller);
    e.scroll_directions = std::move(dirs);
    e.children = std::move(children);
    return e;
}

// A label-less list row: a button whose identity lives in its text children.
inline UiElement row(std::vector<std::string> texts) {
    UiElement e = el(ElementClass::Button);
    for (auto& t : texts) e.children.push_back(plain(std::move(t)));
    return e;
}

inline UiElement with_children(UiElement e, std::vector<UiElement> children) {
    e.children = std::move(children);
    return e;
}

inline UiState state_of(UiElement root, const std::string& name = "test") {
    return make_state(std::move(root), {StateSource::Kind::Snapshot, name});
}

// Random tree generator for property tests. Depth and fan-out are bounded so
// trees stay small; every class is reachable.
inline UiElement random_tree(std::mt19937_64& rng, int depth = 0) {
    auto pick = [&](int n) { return static_cast<int>(rng() % static_cast<uint64_t>(n)); };
    UiElement e;
    switch (pick(5)) {
        case 0: e = button("b" + std::to_string(pick(8))); break;
        case 1: e = checkbox("c" + std::to_string(pick(8)), pick(2) == 0); break;
        case 2: e = input("i" + std::to_string(pick(8)), pick(2) == 0 ? "" : "v"); break;
        case 3:
            e = el(ElementClass::Scroller);
            e.scroll_directions = {pick(2) == 0 ? ScrollDirection::Up : ScrollDirection::Left,
                                   ScrollDirection::Down};
            break;
        default: e = plain(pick(3) == 0 ? "" : "t" + std::to_string(pick(8))); break;
    }
    if (pick(4) == 0) e.visible = false;
    if (pick(3) == 0) e.text = "x" + std::to_string(pick(16));
    if (depth < 3) {
        int kids = pick(4 - depth);
        for (int i = 0; i < kids; ++i) e.children.push_back(random_tree(rng, depth + 1));
    }
    return e;
}

// Always answers with the same response.
class FixedBackend : public LlmBackend {
public:
    explicit FixedBackend(std::string response) : response_(std::move(response)) {}
    std::string complete(const LlmRequest&) override {
        ++calls_;
        return response_;
    }
    std::string name() const override { return "fixed"; }
    int calls() const { return calls_; }

private:
    std::string response_;
    int calls_ = 0;
};

// Fails the first n calls, then delegates. Exercises retry paths.
class FlakyBackend : public LlmBackend {
public:
    FlakyBackend(int failures, std::string response)
        : failures_(failures), response_(std::move(response)) {}
    std::string complete(const LlmRequest&) override {
        ++calls_;
        if (calls_ <= failures_) throw std::runtime_error("transient backend failure");
        return response_;
    }
    std::string name() const override { return "flaky"; }
    int calls() const { return calls_; }

private:
    int failures_;
    std::string response_;
    int calls_ = 0;
};

// Captures every outgoing request while delegating to another backend.
class CapturingBackend : public LlmBackend {
public:
    explicit CapturingBackend(LlmBackend& inner) : inner_(inner) {}
    std::string complete(const LlmRequest& request) override {
        requests.push_back(request);
        return inner_.complete(request);
    }
    std::string name() const override { return inner_.name(); }
    std::vector<LlmRequest> requests;

private:
    LlmBackend& inner_;
};

}  // namespace guipilot::testing
