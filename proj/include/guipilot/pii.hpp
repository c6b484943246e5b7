#pragma once

#include <string>
#include <vector>

namespace guipilot {

struct PiiConfig {
    std::vector<std::string> names;  // first-name dictionary
    bool detect_phones = true;
    bool detect_emails = true;

    static PiiConfig defaults();
};

struct PiiSpan {
    std::string original;
    std::string replacement;  // e.g. <phone_1>
    std::string category;     // name | phone | email
};

// Session-scoped mapping of sensitive spans to placeholder tokens. The same
// original text always maps to the same token within one table.
struct PiiMaskTable {
    std::vector<PiiSpan> spans;

    const PiiSpan* by_original(const std::string& original) const;
    const PiiSpan* by_replacement(const std::string& replacement) const;
};

// Replaces phone numbers, email addresses and dictionary names with
// placeholder tokens, recording them in the table. Emails are matched before
// phones and names so nested patterns resolve once.
std::string mask_pii(const std::string& text, PiiMaskTable& table, const PiiConfig& config);

// Exact inverse of mask_pii for every span in the table.
std::string unmask_pii(const std::string& text, const PiiMaskTable& table);

}  // namespace guipilot
