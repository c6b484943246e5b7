#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace guipilot {

struct LlmRequest {
    std::string system;
    std::string user;
    double temperature = 0.25;
    std::string purpose = "action";  // action | summarize | cot

    std::string full_text() const { return system.empty() ? user : system + "\n\n" + user; }
};

class LlmBackend {
public:
    virtual ~LlmBackend() = default;
    virtual std::string complete(const LlmRequest& request) = 0;
    virtual std::string name() const = 0;
};

struct ScriptEntry {
    std::string response;
    std::optional<std::string> expect_substring;  // asserted against the prompt
};

// Replays a fixed list of responses in call order. Exhaustion and failed
// substring expectations throw; silence here would hide drift between a
// recorded script and the prompts actually produced.
class ScriptedBackend : public LlmBackend {
public:
    explicit ScriptedBackend(std::vector<ScriptEntry> entries, std::string label = "scripted");

    static std::unique_ptr<ScriptedBackend> from_file(const std::string& path);
    static std::vector<ScriptEntry> parse_script(const nlohmann::json& doc, const std::string& origin);

    std::string complete(const LlmRequest& request) override;
    std::string name() const override { return label_; }
    size_t calls() const { return next_; }
    size_t remaining() const { return entries_.size() - next_; }

private:
    std::vector<ScriptEntry> entries_;
    size_t next_ = 0;
    std::string label_;
    std::mutex mutex_;
};

// Chat-completion endpoint client. Configuration falls back to the
// LLM_ENDPOINT / LLM_API_KEY / LLM_MODEL environment variables. Transient
// transport failures are retried three times with exponential backoff.
class RemoteBackend : public LlmBackend {
public:
    struct Config {
        std::string endpoint;  // e.g. http://localhost:8080/v1/chat/completions
        std::string api_key;
        std::string model = "gpt-4";
        int max_attempts = 3;
        int backoff_ms = 100;
    };

    explicit RemoteBackend(Config config);
    static Config config_from_env();

    std::string complete(const LlmRequest& request) override;
    std::string name() const override { return "remote:" + config_.model; }

private:
    Config config_;
};

// Wraps another backend with an on-disk response cache keyed by
// (backend name, prompt bytes, temperature). A replayed session makes no
// calls to the wrapped backend.
class ReplayCacheBackend : public LlmBackend {
public:
    ReplayCacheBackend(LlmBackend& inner, std::string cache_dir);

    std::string complete(const LlmRequest& request) override;
    std::string name() const override { return inner_.name(); }
    int hits() const { return hits_; }
    int misses() const { return misses_; }

    static std::string cache_key(const std::string& backend_name, const LlmRequest& request);

private:
    LlmBackend& inner_;
    std::string cache_dir_;
    int hits_ = 0;
    int misses_ = 0;
};

struct CostRecord {
    std::string backend;
    std::string purpose;
    int prompt_tokens = 0;
    int response_tokens = 0;
};

class CostLedger {
public:
    void add(CostRecord record);
    std::vector<CostRecord> records() const;
    int total_calls() const;
    int calls_for(const std::string& purpose) const;
    long long total_prompt_tokens() const;
    long long total_response_tokens() const;
    nlohmann::json to_json() const;

private:
    mutable std::mutex mutex_;
    std::vector<CostRecord> records_;
};

// Issues the request and records its cost. All call sites go through here so
// the ledger stays complete.
std::string complete(LlmBackend& backend, CostLedger* ledger, const LlmRequest& request);

// Cheap token estimate: one token per maximal alphanumeric run plus one per
// non-space symbol character. "Hello, world!" counts 4.
int approx_tokens(const std::string& text);

}  // namespace guipilot
