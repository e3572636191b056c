#include "chemprompt/backend.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "chemprompt/hash.hpp"
#include "chemprompt/strings.hpp"

namespace chemprompt {
namespace {

using nlohmann::json;

// Replay and cache files are line-oriented; response text is escaped so a
// full entry always stays on one tab-separated line.
std::string escape_field(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default: out += c;
        }
    }
    return out;
}

std::string unescape_field(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] != '\\' || i + 1 == text.size()) {
            out += text[i];
            continue;
        }
        ++i;
        switch (text[i]) {
            case 'n': out += '\n'; break;
            case 't': out += '\t'; break;
            case 'r': out += '\r'; break;
            default: out += text[i];
        }
    }
    return out;
}

template <typename Sink>
void parse_replay_lines(const std::string& text, const std::string& source, Sink&& sink) {
    std::size_t line_no = 0;
    for (const std::string& line : split(text, '\n')) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::vector<std::string> fields = split(line, '\t');
        if (fields.size() != 3)
            throw std::runtime_error(source + ":" + std::to_string(line_no) +
                                     ": expected 3 tab-separated fields, got " +
                                     std::to_string(fields.size()));
        FinishReason reason;
        try {
            reason = finish_reason_from(trim(fields[2]));
        } catch (const std::invalid_argument& e) {
            throw std::runtime_error(source + ":" + std::to_string(line_no) + ": " + e.what());
        }
        sink(trim(fields[0]), unescape_field(fields[1]), reason);
    }
}

std::string read_file_or_throw(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

}  // namespace

std::string CompletionRequest::request_key() const {
    std::string bytes = model;
    bytes += '\x1f';
    for (const ChatMessage& m : messages) {
        bytes += m.role;
        bytes += '\x1e';
        bytes += m.content;
        bytes += '\x1d';
    }
    bytes += '\x1f';
    char temp[64];
    std::snprintf(temp, sizeof temp, "%.17g", temperature);
    bytes += temp;
    return fnv1a128(bytes).hex();
}

const char* to_string(FinishReason reason) {
    switch (reason) {
        case FinishReason::Stop: return "stop";
        case FinishReason::Length: return "length";
        case FinishReason::Error: return "error";
    }
    return "error";
}

FinishReason finish_reason_from(const std::string& token) {
    for (FinishReason reason : {FinishReason::Stop, FinishReason::Length, FinishReason::Error})
        if (token == to_string(reason)) return reason;
    throw std::invalid_argument("unknown finish reason: " + token);
}

const char* to_string(BackendErrorKind kind) {
    switch (kind) {
        case BackendErrorKind::RateLimited: return "rate_limited";
        case BackendErrorKind::Unauthorized: return "unauthorized";
        case BackendErrorKind::FixtureMiss: return "fixture_miss";
        case BackendErrorKind::Timeout: return "timeout";
    }
    return "timeout";
}

BackendError::BackendError(BackendErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

std::string encode_replay_entry(const std::string& key_hex, const std::string& text,
                                FinishReason reason) {
    return key_hex + "\t" + escape_field(text) + "\t" + to_string(reason) + "\n";
}

ReplayBackend ReplayBackend::from_text(const std::string& text,
                                       const std::string& source_name) {
    ReplayBackend backend;
    parse_replay_lines(text, source_name,
                       [&](const std::string& key, const std::string& body,
                           FinishReason reason) { backend.entries_[key] = {body, reason}; });
    return backend;
}

ReplayBackend ReplayBackend::from_file(const std::string& path) {
    return from_text(read_file_or_throw(path), path);
}

CompletionResponse ReplayBackend::complete(const CompletionRequest& request) {
    auto it = entries_.find(request.request_key());
    if (it == entries_.end())
        throw BackendError(BackendErrorKind::FixtureMiss,
                           "no replay entry for key " + request.request_key());
    CompletionResponse response;
    response.text = it->second.text;
    response.finish_reason = it->second.reason;
    return response;
}

ResponseCache::ResponseCache(std::string path) : path_(std::move(path)) {
    std::ifstream in(path_, std::ios::binary);
    if (!in) return;  // a fresh cache starts empty
    std::ostringstream buffer;
    buffer << in.rdbuf();
    parse_replay_lines(buffer.str(), path_,
                       [&](const std::string& key, const std::string& body, FinishReason) {
                           entries_[key] = body;
                       });
}

std::optional<std::string> ResponseCache::lookup(const std::string& key_hex) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = entries_.find(key_hex);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void ResponseCache::store(const std::string& key_hex, const std::string& text) {
    std::lock_guard<std::mutex> lock(mutex_);
    if (entries_.count(key_hex)) return;
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    if (!out) throw std::runtime_error("cannot append to cache " + path_);
    out << encode_replay_entry(key_hex, text, FinishReason::Stop);
    out.flush();
    entries_[key_hex] = text;
}

std::size_t ResponseCache::size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return entries_.size();
}

CachingBackend::CachingBackend(std::shared_ptr<Backend> inner,
                               std::shared_ptr<ResponseCache> cache)
    : inner_(std::move(inner)), cache_(std::move(cache)) {}

CompletionResponse CachingBackend::complete(const CompletionRequest& request) {
    const std::string key = request.request_key();
    if (auto hit = cache_->lookup(key)) {
        CompletionResponse response;
        response.text = *hit;
        response.from_cache = true;
        return response;
    }
    CompletionResponse response = inner_->complete(request);
    if (response.finish_reason == FinishReason::Stop) cache_->store(key, response.text);
    return response;
}

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {}

CompletionResponse HttpBackend::complete(const CompletionRequest& request) {
    std::size_t scheme_end = config_.endpoint.find("://");
    if (scheme_end == std::string::npos)
        throw BackendError(BackendErrorKind::Timeout,
                           "endpoint has no scheme: " + config_.endpoint);
    std::size_t path_start = config_.endpoint.find('/', scheme_end + 3);
    std::string base = config_.endpoint.substr(0, path_start);
    std::string path =
        path_start == std::string::npos ? "/" : config_.endpoint.substr(path_start);

    json body = {{"model", request.model},
                 {"temperature", request.temperature},
                 {"max_tokens", request.max_tokens},
                 {"messages", json::array()}};
    for (const ChatMessage& m : request.messages)
        body["messages"].push_back({{"role", m.role}, {"content", m.content}});
    const std::string payload = body.dump();

    httplib::Headers headers;
    if (!config_.api_key.empty())
        headers.emplace("Authorization", "Bearer " + config_.api_key);

    httplib::Client client(base);
    client.set_connection_timeout(config_.timeout_ms / 1000,
                                  (config_.timeout_ms % 1000) * 1000);
    client.set_read_timeout(config_.timeout_ms / 1000, (config_.timeout_ms % 1000) * 1000);

    std::string last_fault;
    bool rate_limited = false;
    for (int attempt = 0; attempt <= config_.retries; ++attempt) {
        if (attempt > 0)
            std::this_thread::sleep_for(
                std::chrono::milliseconds(config_.backoff_ms << (attempt - 1)));
        auto started = std::chrono::steady_clock::now();
        httplib::Result result = client.Post(path, headers, payload, "application/json");
        if (!result) {
            last_fault = "transport: " + httplib::to_string(result.error());
            rate_limited = false;
            continue;
        }
        if (result->status == 401 || result->status == 403)
            throw BackendError(BackendErrorKind::Unauthorized,
                               "status " + std::to_string(result->status));
        if (result->status == 429 || result->status == 408 || result->status >= 500) {
            last_fault = "status " + std::to_string(result->status);
            rate_limited = result->status == 429;
            continue;
        }
        if (result->status != 200) {
            last_fault = "status " + std::to_string(result->status);
            rate_limited = false;
            continue;
        }
        try {
            json reply = json::parse(result->body);
            const json& choice = reply.at("choices").at(0);
            CompletionResponse response;
            response.text = choice.at("message").at("content").get<std::string>();
            std::string finish = choice.value("finish_reason", "stop");
            response.finish_reason =
                finish == "length" ? FinishReason::Length : FinishReason::Stop;
            response.latency_ms = static_cast<int>(
                std::chrono::duration_cast<std::chrono::milliseconds>(
                    std::chrono::steady_clock::now() - started)
                    .count());
            return response;
        } catch (const json::exception& e) {
            last_fault = std::string("malformed reply: ") + e.what();
            rate_limited = false;
            continue;
        }
    }
    throw BackendError(rate_limited ? BackendErrorKind::RateLimited
                                    : BackendErrorKind::Timeout,
                       "gave up after " + std::to_string(config_.retries + 1) +
                           " attempts; last fault: " + last_fault);
}

std::string api_key_from_env() {
    const char* value = std::getenv(kApiKeyEnvVar);
    return value ? value : "";
}

std::vector<CompletionResponse> dispatch_batch(Backend& backend,
                                               const std::vector<CompletionRequest>& requests,
                                               int max_in_flight) {
    if (max_in_flight < 1) max_in_flight = 1;
    std::vector<CompletionResponse> responses(requests.size());
    std::atomic<std::size_t> next{0};
    std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(max_in_flight), requests.size());
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            while (true) {
                std::size_t i = next.fetch_add(1);
                if (i >= requests.size()) return;
                try {
                    responses[i] = backend.complete(requests[i]);
                } catch (const std::exception&) {
                    CompletionResponse failed;
                    failed.finish_reason = FinishReason::Error;
                    responses[i] = failed;
                }
            }
        });
    }
    for (std::thread& worker : pool) worker.join();
    return responses;
}

}  // namespace chemprompt
