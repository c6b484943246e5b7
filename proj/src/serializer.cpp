#include "guipilot/serializer.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

namespace guipilot {

namespace {

std::optional<UiElement> prune_node(const UiElement& e) {
    if (!e.visible) return std::nullopt;
    UiElement kept = e;
    kept.children.clear();
    for (const auto& child : e.children) {
        auto pruned = prune_node(child);
        if (pruned) kept.children.push_back(std::move(*pruned));
    }
    bool empty_content = e.label.empty() && e.text.empty();
    if (!is_interactive(e.cls) && empty_content && kept.children.empty()) return std::nullopt;
    return kept;
}

struct FlatEntry {
    const UiElement* element;
    int parent_pos;  // index into the flat list, -1 for root
    bool is_leaf;
};

void flatten_with_parents(const UiElement& e, int parent, std::vector<FlatEntry>& out) {
    int pos = static_cast<int>(out.size());
    out.push_back({&e, parent, e.children.empty()});
    for (const auto& child : e.children) flatten_with_parents(child, pos, out);
}

// Dedup key for scroll composition: identity of a node irrespective of its
// position inside the parent's child list.
std::string compose_key(const UiElement& e) {
    std::string key = class_tag(e.cls);
    key += '\x1f';
    key += e.label;
    key += '\x1f';
    key += e.text;
    return key;
}

// Identity of a node including its whole subtree; recognizes the same list
// row when it reappears on a later scroll view.
std::string subtree_key(const UiElement& e) {
    std::string key = "(" + compose_key(e);
    for (const auto& child : e.children) {
        key += '\x1e';
        key += subtree_key(child);
    }
    key += ')';
    return key;
}

void merge_trees(UiElement& base, const UiElement& incoming);

// Aligns incoming children against base children. A child that is the sole
// carrier of its surface key on both sides is the same container seen again
// and merges recursively; repeated keys (typical for unlabeled list rows)
// only match on identical subtrees and are inserted otherwise, keeping scroll
// order. Views must arrive in top-to-bottom scroll order.
void merge_children(UiElement& base, const UiElement& incoming) {
    std::vector<bool> matched(base.children.size(), false);

    auto count_key = [](const std::vector<UiElement>& kids, const std::string& key) {
        size_t n = 0;
        for (const auto& k : kids)
            if (compose_key(k) == key) ++n;
        return n;
    };

    size_t insert_pos = base.children.size();
    for (const auto& inc : incoming.children) {
        std::string key = compose_key(inc);
        int found = -1;
        if (count_key(incoming.children, key) == 1 && count_key(base.children, key) == 1) {
            for (size_t j = 0; j < base.children.size(); ++j) {
                if (!matched[j] && compose_key(base.children[j]) == key) {
                    found = static_cast<int>(j);
                    break;
                }
            }
        } else {
            std::string deep = subtree_key(inc);
            for (size_t j = 0; j < base.children.size(); ++j) {
                if (!matched[j] && subtree_key(base.children[j]) == deep) {
                    found = static_cast<int>(j);
                    break;
                }
            }
        }
        if (found >= 0) {
            matched[found] = true;
            merge_trees(base.children[found], inc);
            insert_pos = static_cast<size_t>(found) + 1;
        } else {
            base.children.insert(base.children.begin() + insert_pos, inc);
            matched.insert(matched.begin() + insert_pos, true);
            ++insert_pos;
        }
    }
}

void merge_trees(UiElement& base, const UiElement& incoming) {
    base.visible = base.visible || incoming.visible;
    merge_children(base, incoming);
}

std::string join_directions(const std::vector<ScrollDirection>& dirs) {
    std::string out;
    for (auto d : dirs) {
        if (!out.empty()) out += ' ';
        out += direction_name(d);
    }
    return out;
}

HtmlLine line_for_group(const UiState& state, const ElementGroup& group,
                        const std::map<int, std::string>& hints) {
    const UiElement* primary = find_element(state, group.primary_local_id);
    HtmlLine line;
    line.tag = class_tag(primary->cls);
    line.label = primary->label;
    line.checked = primary->checked;
    if (primary->value.has_value() && !primary->value->empty()) line.value = primary->value;
    line.direction = join_directions(primary->scroll_directions);

    std::vector<std::string> fragments;
    for (int id : group.member_ids) {
        const UiElement* member = find_element(state, id);
        std::string fragment;
        if (member == primary) {
            fragment = member->text;
        } else {
            fragment = member->text.empty() ? member->label : member->text;
        }
        if (!fragment.empty()) fragments.push_back(escape_html(fragment));
    }
    for (size_t i = 0; i < fragments.size(); ++i) {
        if (i) line.text += "<br>";
        line.text += fragments[i];
    }

    if (primary->cls == ElementClass::Button || primary->cls == ElementClass::Checkbox) {
        for (int id : group.member_ids) {
            auto it = hints.find(id);
            if (it != hints.end()) {
                line.onclick = it->second;
                break;
            }
        }
    }
    return line;
}

}  // namespace

std::string escape_html(const std::string& raw) {
    std::string out;
    out.reserve(raw.size());
    for (char c : raw) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string HtmlLine::to_html() const {
    std::string out = "<" + tag + " id=" + std::to_string(prompt_id);
    if (checked.has_value()) out += std::string(" checked=\"") + (*checked ? "true" : "false") + "\"";
    if (!label.empty()) out += " label=\"" + escape_html(label) + "\"";
    if (onclick.has_value()) out += " onclick=\"" + escape_html(*onclick) + "\"";
    if (!direction.empty()) out += " direction=\"" + direction + "\"";
    if (value.has_value()) out += " value=\"" + escape_html(*value) + "\"";
    out += ">";
    if (!text.empty()) {
        out += text;  // fragments are escaped before <br> joining
        out += "</" + tag + ">";
    }
    return out;
}

std::string HtmlView::text() const {
    std::string out;
    for (size_t i = 0; i < lines.size(); ++i) {
        if (i) out += '\n';
        out += lines[i].to_html();
    }
    return out;
}

UiState prune(const UiState& state) {
    UiState out = state;  // keeps signature and source of the original
    auto pruned = prune_node(state.root);
    if (pruned) {
        out.root = std::move(*pruned);
    } else {
        out.root = UiElement{};
        out.root.local_id = state.root.local_id;
        out.root.children.clear();
    }
    return out;
}

std::vector<ElementGroup> merge_equivalent(const UiState& pruned, const Utg* utg) {
    std::vector<FlatEntry> flat;
    flatten_with_parents(pruned.root, -1, flat);

    // Nearest interactive ancestor per flat position.
    std::vector<int> interactive_ancestor(flat.size(), -1);
    for (size_t i = 0; i < flat.size(); ++i) {
        int p = flat[i].parent_pos;
        if (p < 0) continue;
        if (is_interactive(flat[p].element->cls))
            interactive_ancestor[i] = p;
        else
            interactive_ancestor[i] = interactive_ancestor[p];
    }

    // Group seeds: one per interactive element and one per non-interactive
    // element that renders on its own.
    std::map<int, size_t> group_of_pos;  // flat pos of primary -> group index
    std::vector<ElementGroup> groups;
    std::vector<int> group_order;  // flat pos of primary, pre-order
    for (size_t i = 0; i < flat.size(); ++i) {
        const UiElement* e = flat[i].element;
        bool renders = false;
        if (is_interactive(e->cls)) {
            renders = true;
        } else if (!e->label.empty() || !e->text.empty()) {
            // Rule (ii): a leaf under an interactive ancestor folds into that
            // ancestor's line instead of rendering separately.
            if (flat[i].is_leaf && interactive_ancestor[i] >= 0) {
                renders = false;
            } else {
                renders = true;
            }
        }
        if (!renders) continue;
        ElementGroup g;
        g.primary_local_id = e->local_id;
        g.member_ids = {e->local_id};
        group_of_pos[static_cast<int>(i)] = groups.size();
        groups.push_back(std::move(g));
        group_order.push_back(static_cast<int>(i));
    }

    // Rule (ii): attach merged leaves to their ancestor's group.
    for (size_t i = 0; i < flat.size(); ++i) {
        const UiElement* e = flat[i].element;
        if (is_interactive(e->cls) || (e->label.empty() && e->text.empty())) continue;
        if (!flat[i].is_leaf || interactive_ancestor[i] < 0) continue;
        auto it = group_of_pos.find(interactive_ancestor[i]);
        if (it != group_of_pos.end()) groups[it->second].member_ids.push_back(e->local_id);
    }

    if (!utg || !utg->has_node(pruned.signature)) return groups;

    // Rule (i): among interactive elements, merge those whose recorded click
    // edges lead to the same target signature.
    std::map<std::string, std::vector<size_t>> by_target;  // target sig -> group indices
    for (size_t gi = 0; gi < groups.size(); ++gi) {
        const UiElement* primary = find_element(pruned, groups[gi].primary_local_id);
        if (primary->cls != ElementClass::Button) continue;
        auto target = utg->click_target(pruned.signature, primary->local_id);
        if (target) by_target[*target].push_back(gi);
    }
    std::set<size_t> absorbed;
    for (auto& [target, members] : by_target) {
        if (members.size() < 2) continue;
        size_t head = members.front();
        for (size_t k = 1; k < members.size(); ++k) {
            size_t gi = members[k];
            for (int id : groups[gi].member_ids) groups[head].member_ids.push_back(id);
            absorbed.insert(gi);
        }
    }
    std::vector<ElementGroup> out;
    for (size_t gi = 0; gi < groups.size(); ++gi) {
        if (absorbed.count(gi)) continue;
        auto g = groups[gi];
        // Keep member fragments in pre-order regardless of merge order.
        std::map<int, int> order;
        int rank = 0;
        for (const auto& entry : flat) order[entry.element->local_id] = rank++;
        std::sort(g.member_ids.begin(), g.member_ids.end(),
                  [&](int a, int b) { return order[a] < order[b]; });
        out.push_back(std::move(g));
    }
    return out;
}

UiState compose_scrolled(const std::vector<UiState>& views) {
    if (views.empty()) throw std::invalid_argument("compose_scrolled requires at least one view");
    UiElement merged = views.front().root;
    for (size_t i = 1; i < views.size(); ++i) {
        if (compose_key(views[i].root) != compose_key(merged))
            throw std::invalid_argument("scroll views disagree on the root element");
        merge_trees(merged, views[i].root);
    }
    StateSource source = views.front().source;
    return make_state(std::move(merged), std::move(source));
}

HtmlView render(const UiState& pruned, const std::vector<ElementGroup>& groups,
                const std::map<int, std::string>& hints) {
    HtmlView view;
    view.state_signature = pruned.signature;
    int next_id = 0;
    for (const auto& group : groups) {
        HtmlLine line = line_for_group(pruned, group, hints);
        line.prompt_id = next_id;
        IdTarget target;
        target.state_signature = pruned.signature;
        target.local_ids = group.member_ids;
        target.primary_local_id = group.primary_local_id;
        view.id_map[next_id] = std::move(target);
        view.lines.push_back(std::move(line));
        ++next_id;
    }
    return view;
}

HtmlView render_naive(const UiState& state) {
    HtmlView view;
    view.state_signature = state.signature;

    std::vector<FlatEntry> flat;
    flatten_with_parents(state.root, -1, flat);
    std::vector<bool> visible_chain(flat.size(), false);
    std::vector<int> interactive_self_or_ancestor(flat.size(), -1);
    for (size_t i = 0; i < flat.size(); ++i) {
        int p = flat[i].parent_pos;
        bool parent_visible = p < 0 ? true : visible_chain[p];
        visible_chain[i] = parent_visible && flat[i].element->visible;
        if (is_interactive(flat[i].element->cls))
            interactive_self_or_ancestor[i] = static_cast<int>(i);
        else if (p >= 0)
            interactive_self_or_ancestor[i] = interactive_self_or_ancestor[p];
    }

    int next_id = 0;
    for (size_t i = 0; i < flat.size(); ++i) {
        if (!flat[i].is_leaf || !visible_chain[i]) continue;
        const UiElement* e = flat[i].element;
        HtmlLine line;
        int tag_source = interactive_self_or_ancestor[i];
        line.tag = tag_source >= 0 ? class_tag(flat[tag_source].element->cls) : "p";
        line.prompt_id = next_id;
        line.label = e->label;
        line.checked = e->checked;
        if (e->value.has_value() && !e->value->empty()) line.value = e->value;
        line.direction = join_directions(e->scroll_directions);
        line.text = escape_html(e->text);
        IdTarget target;
        target.state_signature = state.signature;
        target.local_ids = {e->local_id};
        target.primary_local_id = e->local_id;
        view.id_map[next_id] = std::move(target);
        view.lines.push_back(std::move(line));
        ++next_id;
    }
    return view;
}

HtmlView render_state(const UiState& state, const RenderOptions& options) {
    UiState pruned = prune(state);
    auto groups = merge_equivalent(pruned, options.utg);
    return render(pruned, groups, options.hints);
}

}  // namespace guipilot
