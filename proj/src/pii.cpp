#include "guipilot/pii.hpp"

#include <cctype>
#include <regex>
#include <set>
#include <stdexcept>

namespace guipilot {

PiiConfig PiiConfig::defaults() {
    PiiConfig config;
    config.names = {
        "Alice", "Bob",    "Carol",   "Dave",   "Erin",   "Frank",  "Grace",  "Heidi",
        "Ivan",  "Judy",   "Mallory", "Niaj",   "Olivia", "Peggy",  "Quentin", "Rupert",
        "Sybil", "Trent",  "Ursula",  "Victor", "Walter", "Wendy",  "Xavier", "Yolanda",
    };
    return config;
}

const PiiSpan* PiiMaskTable::by_original(const std::string& original) const {
    for (const auto& span : spans) {
        if (span.original == original) return &span;
    }
    return nullptr;
}

const PiiSpan* PiiMaskTable::by_replacement(const std::string& replacement) const {
    for (const auto& span : spans) {
        if (span.replacement == replacement) return &span;
    }
    return nullptr;
}

namespace {

std::string next_token(const PiiMaskTable& table, const std::string& category) {
    int count = 0;
    for (const auto& span : table.spans) {
        if (span.category == category) ++count;
    }
    return "<" + category + "_" + std::to_string(count + 1) + ">";
}

std::string token_for(PiiMaskTable& table, const std::string& original, const std::string& category) {
    if (const PiiSpan* span = table.by_original(original)) return span->replacement;
    PiiSpan span{original, next_token(table, category), category};
    table.spans.push_back(span);
    return span.replacement;
}

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

// Replaces every regex match (subject to the boundary check) with a
// session-consistent token for the category.
std::string replace_matches(const std::string& text, const std::regex& re, const std::string& category,
                            PiiMaskTable& table, bool digit_boundaries) {
    std::string out;
    auto begin = std::sregex_iterator(text.begin(), text.end(), re);
    auto end = std::sregex_iterator();
    std::size_t cursor = 0;
    for (auto it = begin; it != end; ++it) {
        const auto& m = *it;
        std::size_t pos = static_cast<std::size_t>(m.position(0));
        std::size_t len = static_cast<std::size_t>(m.length(0));
        if (digit_boundaries) {
            bool left_digit = pos > 0 && std::isdigit(static_cast<unsigned char>(text[pos - 1]));
            bool right_digit = pos + len < text.size() && std::isdigit(static_cast<unsigned char>(text[pos + len]));
            if (left_digit || right_digit) continue;
        }
        out.append(text, cursor, pos - cursor);
        out += token_for(table, m.str(0), category);
        cursor = pos + len;
    }
    out.append(text, cursor, text.size() - cursor);
    return out;
}

std::string replace_names(const std::string& text, const std::set<std::string>& names, PiiMaskTable& table) {
    std::string out;
    std::size_t i = 0;
    while (i < text.size()) {
        if (!is_word_char(text[i])) {
            out += text[i];
            ++i;
            continue;
        }
        std::size_t start = i;
        while (i < text.size() && is_word_char(text[i])) ++i;
        std::string word = text.substr(start, i - start);
        if (names.count(word) != 0) {
            out += token_for(table, word, "name");
        } else {
            out += word;
        }
    }
    return out;
}

}  // namespace

std::string mask_pii(const std::string& text, PiiMaskTable& table, const PiiConfig& config) {
    static const std::regex email_re(R"([A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+\.[A-Za-z]{2,})");
    static const std::regex phone_re(R"((\+\d{1,3}[ -]?)?(\(\d{3}\) ?|\d{3}[ .-])?\d{3}[ .-]\d{4})");

    std::string masked = text;
    if (config.detect_emails) masked = replace_matches(masked, email_re, "email", table, false);
    if (config.detect_phones) masked = replace_matches(masked, phone_re, "phone", table, true);
    if (!config.names.empty()) {
        std::set<std::string> names(config.names.begin(), config.names.end());
        masked = replace_names(masked, names, table);
    }
    return masked;
}

std::string unmask_pii(const std::string& text, const PiiMaskTable& table) {
    std::string out = text;
    for (const auto& span : table.spans) {
        std::size_t pos = 0;
        while ((pos = out.find(span.replacement, pos)) != std::string::npos) {
            out.replace(pos, span.replacement.size(), span.original);
            pos += span.original.size();
        }
    }
    return out;
}

}  // namespace guipilot
