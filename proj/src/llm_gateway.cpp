#include "guipilot/llm_gateway.hpp"

#include <cctype>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include "httplib.h"

#include "guipilot/digest.hpp"

namespace guipilot {

namespace {

using nlohmann::json;

std::string env_or(const char* name, const std::string& fallback) {
    const char* v = std::getenv(name);
    return v ? std::string(v) : fallback;
}

// Splits http://host:port/path into (scheme://host:port, /path).
std::pair<std::string, std::string> split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw std::runtime_error("endpoint '" + url + "' must include a scheme");
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

ScriptedBackend::ScriptedBackend(std::vector<ScriptEntry> entries, std::string label)
    : entries_(std::move(entries)), label_(std::move(label)) {}

std::vector<ScriptEntry> ScriptedBackend::parse_script(const json& doc, const std::string& origin) {
    if (!doc.is_array()) throw std::runtime_error(origin + ": script must be a JSON array");
    std::vector<ScriptEntry> entries;
    for (const auto& item : doc) {
        ScriptEntry entry;
        if (item.is_string()) {
            entry.response = item.get<std::string>();
        } else if (item.is_object() && item.contains("response")) {
            entry.response = item["response"].get<std::string>();
            if (item.contains("expect_substring"))
                entry.expect_substring = item["expect_substring"].get<std::string>();
        } else {
            throw std::runtime_error(origin + ": script entries must be strings or {response, expect_substring} objects");
        }
        entries.push_back(std::move(entry));
    }
    return entries;
}

std::unique_ptr<ScriptedBackend> ScriptedBackend::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open script file '" + path + "'");
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        throw std::runtime_error("script file '" + path + "' is not valid JSON: " + e.what());
    }
    return std::make_unique<ScriptedBackend>(parse_script(doc, path), "scripted:" + path);
}

std::string ScriptedBackend::complete(const LlmRequest& request) {
    std::lock_guard<std::mutex> lock(mutex_);
    if (next_ >= entries_.size())
        throw std::runtime_error(label_ + ": script exhausted after " + std::to_string(entries_.size()) +
                                 " responses (purpose '" + request.purpose + "')");
    const ScriptEntry& entry = entries_[next_];
    if (entry.expect_substring.has_value() &&
        request.full_text().find(*entry.expect_substring) == std::string::npos)
        throw std::runtime_error(label_ + ": response #" + std::to_string(next_) +
                                 " expected prompt to contain \"" + *entry.expect_substring + "\"");
    ++next_;
    return entry.response;
}

RemoteBackend::RemoteBackend(Config config) : config_(std::move(config)) {
    if (config_.endpoint.empty())
        throw std::runtime_error("remote backend requires an endpoint (set LLM_ENDPOINT)");
}

RemoteBackend::Config RemoteBackend::config_from_env() {
    Config c;
    c.endpoint = env_or("LLM_ENDPOINT", "");
    c.api_key = env_or("LLM_API_KEY", "");
    c.model = env_or("LLM_MODEL", "gpt-4");
    return c;
}

std::string RemoteBackend::complete(const LlmRequest& request) {
    auto [base, path] = split_url(config_.endpoint);

    json body = json::object();
    body["model"] = config_.model;
    json messages = json::array();
    if (!request.system.empty())
        messages.push_back({{"role", "system"}, {"content", request.system}});
    messages.push_back({{"role", "user"}, {"content", request.user}});
    body["messages"] = messages;
    body["temperature"] = request.temperature;
    std::string payload = body.dump();

    std::string last_error;
    for (int attempt = 0; attempt < config_.max_attempts; ++attempt) {
        if (attempt > 0)
            std::this_thread::sleep_for(std::chrono::milliseconds(config_.backoff_ms << (attempt - 1)));
        httplib::Client client(base);
        client.set_read_timeout(60, 0);
        httplib::Headers headers;
        if (!config_.api_key.empty())
            headers.emplace("Authorization", "Bearer " + config_.api_key);
        auto res = client.Post(path, headers, payload, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;  // transient, retry
        }
        if (res->status >= 500) {
            last_error = "server returned status " + std::to_string(res->status);
            continue;  // transient, retry
        }
        if (res->status != 200)
            throw std::runtime_error("llm endpoint returned status " + std::to_string(res->status) +
                                     ": " + res->body);
        json reply;
        try {
            reply = json::parse(res->body);
        } catch (const json::parse_error& e) {
            throw std::runtime_error(std::string("llm endpoint returned invalid JSON: ") + e.what());
        }
        if (!reply.contains("choices") || reply["choices"].empty() ||
            !reply["choices"][0].contains("message"))
            throw std::runtime_error("llm endpoint reply has no choices[0].message");
        return reply["choices"][0]["message"].value("content", std::string{});
    }
    throw std::runtime_error("llm endpoint unreachable after " + std::to_string(config_.max_attempts) +
                             " attempts (" + last_error + ")");
}

ReplayCacheBackend::ReplayCacheBackend(LlmBackend& inner, std::string cache_dir)
    : inner_(inner), cache_dir_(std::move(cache_dir)) {
    std::filesystem::create_directories(cache_dir_);
}

std::string ReplayCacheBackend::cache_key(const std::string& backend_name, const LlmRequest& request) {
    std::string material = backend_name;
    material += '\x1f';
    material += request.full_text();
    material += '\x1f';
    char temp[32];
    std::snprintf(temp, sizeof temp, "%.6f", request.temperature);
    material += temp;
    return hex_digest(material);
}

std::string ReplayCacheBackend::complete(const LlmRequest& request) {
    std::string key = cache_key(inner_.name(), request);
    std::filesystem::path file = std::filesystem::path(cache_dir_) / (key + ".json");
    if (std::filesystem::exists(file)) {
        std::ifstream in(file);
        json doc;
        in >> doc;
        ++hits_;
        return doc.value("response", std::string{});
    }
    std::string response = inner_.complete(request);
    ++misses_;
    json doc = json::object();
    doc["backend"] = inner_.name();
    doc["response"] = response;
    std::ofstream out(file);
    out << doc.dump(2) << "\n";
    return response;
}

void CostLedger::add(CostRecord record) {
    std::lock_guard<std::mutex> lock(mutex_);
    records_.push_back(std::move(record));
}

std::vector<CostRecord> CostLedger::records() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return records_;
}

int CostLedger::total_calls() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return static_cast<int>(records_.size());
}

int CostLedger::calls_for(const std::string& purpose) const {
    std::lock_guard<std::mutex> lock(mutex_);
    int n = 0;
    for (const auto& r : records_)
        if (r.purpose == purpose) ++n;
    return n;
}

long long CostLedger::total_prompt_tokens() const {
    std::lock_guard<std::mutex> lock(mutex_);
    long long n = 0;
    for (const auto& r : records_) n += r.prompt_tokens;
    return n;
}

long long CostLedger::total_response_tokens() const {
    std::lock_guard<std::mutex> lock(mutex_);
    long long n = 0;
    for (const auto& r : records_) n += r.response_tokens;
    return n;
}

nlohmann::json CostLedger::to_json() const {
    json j = json::object();
    j["calls"] = total_calls();
    j["prompt_tokens"] = total_prompt_tokens();
    j["response_tokens"] = total_response_tokens();
    json by_purpose = json::object();
    std::lock_guard<std::mutex> lock(mutex_);
    for (const auto& r : records_) {
        if (!by_purpose.contains(r.purpose)) by_purpose[r.purpose] = 0;
        by_purpose[r.purpose] = by_purpose[r.purpose].get<int>() + 1;
    }
    j["calls_by_purpose"] = by_purpose;
    return j;
}

std::string complete(LlmBackend& backend, CostLedger* ledger, const LlmRequest& request) {
    std::string response = backend.complete(request);
    if (ledger) {
        CostRecord record;
        record.backend = backend.name();
        record.purpose = request.purpose;
        record.prompt_tokens = approx_tokens(request.full_text());
        record.response_tokens = approx_tokens(response);
        ledger->add(std::move(record));
    }
    return response;
}

int approx_tokens(const std::string& text) {
    int count = 0;
    bool in_run = false;
    for (unsigned char c : text) {
        bool alnum = std::isalnum(c) || c >= 0x80;  // multibyte sequences count as word bytes
        if (alnum) {
            if (!in_run) {
                ++count;
                in_run = true;
            }
        } else {
            in_run = false;
            if (!std::isspace(c)) ++count;
        }
    }
    return count;
}

}  // namespace guipilot
