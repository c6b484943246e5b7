#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "guipilot/gui_model.hpp"
#include "guipilot/utg.hpp"

namespace guipilot {

// One line of the simplified HTML view of a screen.
struct HtmlLine {
    std::string tag;  // button / checkbox / scroller / input / p
    int prompt_id = -1;
    std::string label;
    std::optional<std::string> onclick;  // hint text, buttons and checkboxes only
    std::optional<bool> checked;
    std::string direction;  // space-joined scroll directions
    std::optional<std::string> value;
    std::string text;  // merged fragments joined with <br>

    std::string to_html() const;
};

// Where a prompt id points back to: the source state and the local ids of all
// group members. primary_local_id is the element actions are executed on.
struct IdTarget {
    std::string state_signature;
    std::vector<int> local_ids;
    int primary_local_id = -1;
};

struct HtmlView {
    std::string state_signature;
    std::vector<HtmlLine> lines;
    std::map<int, IdTarget> id_map;

    std::string text() const;  // all lines joined with newlines
    bool empty() const { return lines.empty(); }
};

// Drops invisible subtrees and non-interactive elements that carry neither
// label nor text; containers with surviving descendants survive structurally.
// Interactive elements are never pruned for emptiness. Local ids and the
// signature of the source state are preserved so downstream maps stay valid.
UiState prune(const UiState& state);

// A set of elements rendered as one line. members are in pre-order and
// include the primary element.
struct ElementGroup {
    int primary_local_id = -1;
    std::vector<int> member_ids;
};

// Groups elements of a pruned state for rendering. Two rules:
//   (i)  interactive elements whose recorded click edges in the transition
//        graph lead from this state to the same target signature merge;
//   (ii) non-interactive leaves merge into their nearest interactive
//        ancestor's group.
// Every renderable element lands in exactly one group; purely structural
// containers get none.
std::vector<ElementGroup> merge_equivalent(const UiState& pruned, const Utg* utg);

// Union of successive views of one logical screen, given in top-to-bottom
// scroll order. Dedup key is (class, label, text) within the matching
// structural position; when several siblings share that key (unlabeled list
// rows) only identical subtrees dedup, everything else is kept in scroll
// order. The result is a canonical state: fresh pre-order ids and a fresh
// signature.
UiState compose_scrolled(const std::vector<UiState>& views);

// Renders a pruned state using precomputed groups. hints maps element local
// ids to onclick text. Prompt ids are consecutive from 0.
HtmlView render(const UiState& pruned, const std::vector<ElementGroup>& groups,
                const std::map<int, std::string>& hints = {});

// Baseline encoding used for cost comparisons: every visible leaf as its own
// line, no pruning of empty leaves, no merging. Leaves under an interactive
// ancestor borrow that ancestor's tag.
HtmlView render_naive(const UiState& state);

struct RenderOptions {
    const Utg* utg = nullptr;
    std::map<int, std::string> hints;
};

// prune + merge_equivalent + render in one step.
HtmlView render_state(const UiState& state, const RenderOptions& options = {});

std::string escape_html(const std::string& raw);

}  // namespace guipilot
