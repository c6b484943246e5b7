#pragma once

#include <map>
#include <string>
#include <vector>

#include "guipilot/memory.hpp"

namespace guipilot {

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::vector<double> embed(const std::string& text) = 0;
    virtual int dimension() const = 0;
};

// Deterministic local embedding: lowercase word tokens hashed into a fixed
// number of buckets, L2-normalized. Good enough to rank task paraphrases
// without any service dependency.
class HashedBagProvider : public EmbeddingProvider {
public:
    explicit HashedBagProvider(int dimension = 64) : dimension_(dimension) {}
    std::vector<double> embed(const std::string& text) override;
    int dimension() const override { return dimension_; }

private:
    int dimension_;
};

// Single-endpoint embedding service: POST {"text": ...} -> {"vector": [...]}.
class HttpEmbeddingProvider : public EmbeddingProvider {
public:
    HttpEmbeddingProvider(std::string endpoint, int dimension);
    std::vector<double> embed(const std::string& text) override;
    int dimension() const override { return dimension_; }

private:
    std::string endpoint_;
    int dimension_;
};

// Throws std::invalid_argument on dimension mismatch or zero-norm input.
double cosine(const std::vector<double>& u, const std::vector<double>& v);

struct ScoredEntry {
    const MemoryEntry* entry;
    double similarity;
};

// Memory entries ranked by cosine similarity to the task, best first, at most
// k. Ties keep table order. Empty memory yields an empty result.
std::vector<ScoredEntry> top_k(const std::string& task, const AppMemory& memory,
                               EmbeddingProvider& provider, int k);

// Hints to inject while rendering: state signature -> element local id ->
// onclick text ("navigate to GUIs that can: 1...., 2....").
struct HintPlan {
    std::map<std::string, std::map<int, std::string>> hints;

    const std::map<int, std::string>* for_state(const std::string& signature) const;
};

// For every selected entry, each element clicked along its path is annotated
// with the function summaries of the states that follow it on the path.
// Summaries are deduplicated per element and enumerated; text longer than
// max_chars is cut with an "etc." marker.
HintPlan build_hint_plan(const std::vector<ScoredEntry>& selected, const AppMemory& memory,
                         size_t max_chars = 240);

struct ShortcutDecision {
    bool fired = false;
    const MemoryEntry* entry = nullptr;
    double similarity = -1.0;
};

// Picks the most similar memory entry; fires exactly when similarity
// strictly exceeds gamma.
ShortcutDecision decide_shortcut(const std::string& task, const AppMemory& memory,
                                 EmbeddingProvider& provider, double gamma);

}  // namespace guipilot
