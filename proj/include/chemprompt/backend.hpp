#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace chemprompt {

struct ChatMessage {
    std::string role;
    std::string content;

    bool operator==(const ChatMessage&) const = default;
};

struct CompletionRequest {
    std::string model;
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
    int max_tokens = 1024;

    // 128-bit key over (model, messages, temperature), as 32 hex chars.
    // Fixture and cache files are keyed by it, so it must stay stable.
    std::string request_key() const;
};

enum class FinishReason { Stop, Length, Error };
const char* to_string(FinishReason reason);
FinishReason finish_reason_from(const std::string& token);  // throws std::invalid_argument

struct CompletionResponse {
    std::string text;
    FinishReason finish_reason = FinishReason::Stop;
    int latency_ms = 0;
    bool from_cache = false;

    bool operator==(const CompletionResponse&) const = default;
};

enum class BackendErrorKind { RateLimited, Unauthorized, FixtureMiss, Timeout };
const char* to_string(BackendErrorKind kind);

class BackendError : public std::runtime_error {
public:
    BackendError(BackendErrorKind kind, const std::string& what);
    BackendErrorKind kind() const { return kind_; }

private:
    BackendErrorKind kind_;
};

class Backend {
public:
    virtual ~Backend() = default;
    virtual CompletionResponse complete(const CompletionRequest& request) = 0;
};

// One fixture entry per line: request key, response text (escaped so the
// entry stays on one line), finish reason, tab-separated.
std::string encode_replay_entry(const std::string& key_hex, const std::string& text,
                                FinishReason reason);

// Deterministic offline backend answering from a recorded fixture file.
class ReplayBackend : public Backend {
public:
    static ReplayBackend from_text(const std::string& text, const std::string& source_name);
    static ReplayBackend from_file(const std::string& path);

    CompletionResponse complete(const CompletionRequest& request) override;
    std::size_t size() const { return entries_.size(); }

private:
    struct Entry {
        std::string text;
        FinishReason reason = FinishReason::Stop;
    };
    std::map<std::string, Entry> entries_;  // later duplicate keys override earlier
};

// Append-only response store; the on-disk format doubles as a replay
// fixture, so a cached live run can be replayed later.
class ResponseCache {
public:
    explicit ResponseCache(std::string path);

    std::optional<std::string> lookup(const std::string& key_hex) const;
    void store(const std::string& key_hex, const std::string& text);
    std::size_t size() const;

private:
    std::string path_;
    std::map<std::string, std::string> entries_;
    mutable std::mutex mutex_;
};

// Serves repeated requests from the cache without touching the inner
// backend; only successful completions are stored.
class CachingBackend : public Backend {
public:
    CachingBackend(std::shared_ptr<Backend> inner, std::shared_ptr<ResponseCache> cache);
    CompletionResponse complete(const CompletionRequest& request) override;

private:
    std::shared_ptr<Backend> inner_;
    std::shared_ptr<ResponseCache> cache_;
};

struct HttpBackendConfig {
    std::string endpoint;         // "http://host:port/v1/chat/completions"
    std::string api_key;          // resolved from the environment by the caller
    int timeout_ms = 30000;
    int retries = 3;              // attempts beyond the first
    int backoff_ms = 1000;        // doubled after each failed attempt
};

// Chat-completions HTTP client with retry and exponential backoff.
// 401/403 fail immediately; 429 and transport faults retry, then surface
// as RateLimited / Timeout.
class HttpBackend : public Backend {
public:
    explicit HttpBackend(HttpBackendConfig config);
    CompletionResponse complete(const CompletionRequest& request) override;

private:
    HttpBackendConfig config_;
};

// Environment variable holding the API credential; config files never do.
inline constexpr const char* kApiKeyEnvVar = "CHEMPROMPT_API_KEY";
std::string api_key_from_env();

// Completes all requests with at most max_in_flight outstanding at once.
// Responses come back in request order; failures become Error responses
// with empty text rather than aborting the batch.
std::vector<CompletionResponse> dispatch_batch(Backend& backend,
                                               const std::vector<CompletionRequest>& requests,
                                               int max_in_flight);

}  // namespace chemprompt
