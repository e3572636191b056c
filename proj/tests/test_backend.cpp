#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include "httplib.h"
#include "json.hpp"

#include "chemprompt/backend.hpp"

using namespace chemprompt;

namespace {

// Reference key: both hash lanes restated from their published recurrences,
// over the serialization contract (model, then role/content pairs, then the
// shortest-round-trip temperature, with dedicated separators).
std::uint64_t ref_lane_a(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::uint64_t ref_lane_b(const std::string& bytes) {
    std::uint64_t b = 0xcbf29ce484222325ull ^ 0x5bd1e9955bd1e995ull;
    for (unsigned char c : bytes) {
        b ^= c;
        b *= 0x100000001b5ull;
        b ^= b >> 29;
    }
    return b;
}

std::string ref_hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string ref_request_key(const CompletionRequest& request) {
    std::string bytes = request.model;
    bytes += '\x1f';
    for (const ChatMessage& m : request.messages) {
        bytes += m.role;
        bytes += '\x1e';
        bytes += m.content;
        bytes += '\x1d';
    }
    bytes += '\x1f';
    char temp[64];
    std::snprintf(temp, sizeof temp, "%.17g", request.temperature);
    bytes += temp;
    return ref_hex64(ref_lane_a(bytes)) + ref_hex64(ref_lane_b(bytes));
}

CompletionRequest ping_request() {
    CompletionRequest request;
    request.model = "gpt-3.5-turbo-1106";
    request.messages = {{"user", "Question: ping"}};
    return request;
}

std::string temp_path(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "chemprompt_backend_tests";
    std::filesystem::create_directories(dir);
    return (dir / name).string();
}

// Scripted in-process backend for cache and dispatch tests.
class ScriptedBackend : public Backend {
public:
    CompletionResponse complete(const CompletionRequest& request) override {
        calls += 1;
        int now = 1 + in_flight.fetch_add(1);
        int seen = high_water.load();
        while (now > seen && !high_water.compare_exchange_weak(seen, now)) {
        }
        const std::string& text = request.messages.back().content;
        if (text.rfind("sleep:", 0) == 0)
            std::this_thread::sleep_for(std::chrono::milliseconds(20));
        in_flight.fetch_sub(1);
        if (text.rfind("fail:", 0) == 0)
            throw BackendError(BackendErrorKind::Timeout, "scripted failure");
        if (text.rfind("crash:", 0) == 0) throw std::runtime_error("scripted crash");
        CompletionResponse response;
        response.text = "echo " + text;
        return response;
    }

    std::atomic<int> calls{0};
    std::atomic<int> in_flight{0};
    std::atomic<int> high_water{0};
};

CompletionRequest request_saying(const std::string& content) {
    CompletionRequest request;
    request.model = "scripted";
    request.messages = {{"user", content}};
    return request;
}

}  // namespace

TEST_CASE("request keys are stable and separator-safe") {
    CompletionRequest request = ping_request();
    CHECK(request.request_key() == "0b895a8ef360e83d801e724b4fc777e6");
    CHECK(request.request_key() == ref_request_key(request));

    for (unsigned char c : request.request_key()) CHECK(std::isxdigit(c));
    CHECK(request.request_key().size() == 32);

    CompletionRequest other_model = request;
    other_model.model = "gpt-4";
    CHECK(other_model.request_key() != request.request_key());
    CHECK(other_model.request_key() == ref_request_key(other_model));

    CompletionRequest warm = request;
    warm.temperature = 0.5;
    CHECK(warm.request_key() != request.request_key());
    CHECK(warm.request_key() == ref_request_key(warm));

    CompletionRequest other_role = request;
    other_role.messages = {{"system", "Question: ping"}};
    CHECK(other_role.request_key() != request.request_key());

    CompletionRequest more_tokens = request;
    more_tokens.max_tokens = 9999;
    CHECK(more_tokens.request_key() == request.request_key());

    CompletionRequest split_a = request;
    split_a.messages = {{"user", "ab"}, {"user", "c"}};
    CompletionRequest split_b = request;
    split_b.messages = {{"user", "a"}, {"user", "bc"}};
    CHECK(split_a.request_key() != split_b.request_key());
    CHECK(split_a.request_key() == ref_request_key(split_a));

    CompletionRequest moved_boundary = request;
    moved_boundary.messages = {{"userQ", "uestion: ping"}};
    CHECK(moved_boundary.request_key() != request.request_key());
}

TEST_CASE("finish reasons round trip") {
    for (FinishReason reason : {FinishReason::Stop, FinishReason::Length, FinishReason::Error})
        CHECK(finish_reason_from(to_string(reason)) == reason);
    CHECK(std::string(to_string(FinishReason::Stop)) == "stop");
    CHECK_THROWS_AS(finish_reason_from("halt"), std::invalid_argument);
}

TEST_CASE("replay entries survive hostile text") {
    const std::string text = "line one\nline two\twith tab, backslash \\ and \\n literal";
    std::string line = encode_replay_entry("00ff", text, FinishReason::Stop);
    CHECK(line.back() == '\n');
    CHECK(std::count(line.begin(), line.end(), '\n') == 1);
    CHECK(std::count(line.begin(), line.end(), '\t') == 2);

    CompletionRequest request = ping_request();
    std::string fixture = encode_replay_entry(request.request_key(), text, FinishReason::Stop);
    ReplayBackend replay = ReplayBackend::from_text(fixture, "inline");
    CompletionResponse response = replay.complete(request);
    CHECK(response.text == text);
    CHECK(response.finish_reason == FinishReason::Stop);
    CHECK(!response.from_cache);
    CHECK(response.latency_ms == 0);
}

TEST_CASE("replay backend answers only known keys") {
    CompletionRequest known = ping_request();
    CompletionRequest unknown = ping_request();
    unknown.messages = {{"user", "Question: pong"}};

    std::string fixture =
        encode_replay_entry(known.request_key(), "Answer: B", FinishReason::Stop) +
        encode_replay_entry(unknown.request_key(), "first", FinishReason::Stop) +
        encode_replay_entry(unknown.request_key(), "second", FinishReason::Length);
    ReplayBackend replay = ReplayBackend::from_text(fixture, "inline");
    CHECK(replay.size() == 2);
    CHECK(replay.complete(known).text == "Answer: B");

    SUBCASE("later duplicate entries override earlier ones") {
        CompletionResponse response = replay.complete(unknown);
        CHECK(response.text == "second");
        CHECK(response.finish_reason == FinishReason::Length);
    }
    SUBCASE("unknown keys miss") {
        CompletionRequest missing = ping_request();
        missing.model = "other-model";
        try {
            replay.complete(missing);
            FAIL("expected a fixture miss");
        } catch (const BackendError& e) {
            CHECK(e.kind() == BackendErrorKind::FixtureMiss);
            CHECK(std::string(e.what()).find(missing.request_key()) != std::string::npos);
        }
    }
    SUBCASE("malformed lines are rejected with their line number") {
        try {
            ReplayBackend::from_text("only-one-field\n", "broken.tsv");
            FAIL("expected a parse failure");
        } catch (const std::runtime_error& e) {
            CHECK(std::string(e.what()).find("broken.tsv:1") != std::string::npos);
        }
    }
    SUBCASE("blank lines are skipped") {
        ReplayBackend spaced = ReplayBackend::from_text(
            "\n" + encode_replay_entry(known.request_key(), "ok", FinishReason::Stop) + "\n",
            "inline");
        CHECK(spaced.size() == 1);
    }
}

TEST_CASE("cache serves repeats and persists across instances") {
    const std::string path = temp_path("cache_roundtrip.tsv");
    std::filesystem::remove(path);
    CompletionRequest request = request_saying("hello");

    auto inner = std::make_shared<ScriptedBackend>();
    {
        CachingBackend cached(inner, std::make_shared<ResponseCache>(path));
        CompletionResponse first = cached.complete(request);
        CHECK(first.text == "echo hello");
        CHECK(!first.from_cache);
        CHECK(inner->calls == 1);

        CompletionResponse second = cached.complete(request);
        CHECK(second.text == "echo hello");
        CHECK(second.from_cache);
        CHECK(second.finish_reason == FinishReason::Stop);
        CHECK(inner->calls == 1);
    }

    SUBCASE("a reloaded cache never touches the inner backend") {
        auto fresh_inner = std::make_shared<ScriptedBackend>();
        CachingBackend cached(fresh_inner, std::make_shared<ResponseCache>(path));
        CompletionResponse replayed = cached.complete(request);
        CHECK(replayed.text == "echo hello");
        CHECK(replayed.from_cache);
        CHECK(fresh_inner->calls == 0);
    }
    SUBCASE("the cache file is itself a replay fixture") {
        ReplayBackend replay = ReplayBackend::from_file(path);
        CHECK(replay.complete(request).text == "echo hello");
    }
}

TEST_CASE("failures are not cached") {
    const std::string path = temp_path("cache_failures.tsv");
    std::filesystem::remove(path);
    auto inner = std::make_shared<ScriptedBackend>();
    auto cache = std::make_shared<ResponseCache>(path);
    CachingBackend cached(inner, cache);

    CompletionRequest failing = request_saying("fail:once");
    CHECK_THROWS_AS(cached.complete(failing), BackendError);
    CHECK(cache->size() == 0);
    CHECK_THROWS_AS(cached.complete(failing), BackendError);
    CHECK(inner->calls == 2);
}

TEST_CASE("dispatch preserves order under a bounded window") {
    ScriptedBackend backend;
    std::vector<CompletionRequest> requests;
    for (int i = 0; i < 12; ++i)
        requests.push_back(request_saying("sleep:item " + std::to_string(i)));

    std::vector<CompletionResponse> responses = dispatch_batch(backend, requests, 4);
    REQUIRE(responses.size() == 12);
    for (int i = 0; i < 12; ++i) {
        CHECK(responses[i].text == "echo sleep:item " + std::to_string(i));
        CHECK(responses[i].finish_reason == FinishReason::Stop);
    }
    CHECK(backend.high_water.load() <= 4);
    CHECK(backend.high_water.load() >= 2);

    SUBCASE("window of one is sequential") {
        ScriptedBackend serial;
        auto out = dispatch_batch(serial, requests, 1);
        CHECK(out.size() == 12);
        CHECK(serial.high_water.load() == 1);
    }
    SUBCASE("empty batch is empty") {
        CHECK(dispatch_batch(backend, {}, 4).empty());
    }
}

TEST_CASE("dispatch isolates per-item failures") {
    ScriptedBackend backend;
    std::vector<CompletionRequest> requests;
    for (int i = 0; i < 9; ++i) requests.push_back(request_saying(std::to_string(i)));
    requests.insert(requests.begin() + 4, request_saying("fail:middle"));
    requests.insert(requests.begin() + 7, request_saying("crash:hard"));

    std::vector<CompletionResponse> responses = dispatch_batch(backend, requests, 3);
    REQUIRE(responses.size() == 11);
    int errors = 0;
    for (std::size_t i = 0; i < responses.size(); ++i) {
        if (responses[i].finish_reason == FinishReason::Error) {
            errors += 1;
            CHECK(responses[i].text.empty());
        } else {
            CHECK(responses[i].text == "echo " + requests[i].messages[0].content);
        }
    }
    CHECK(errors == 2);
    CHECK(responses[4].finish_reason == FinishReason::Error);
    CHECK(responses[7].finish_reason == FinishReason::Error);
}

TEST_CASE("http backend completes against a scripted server") {
    httplib::Server server;
    std::atomic<int> hits{0};
    std::atomic<int> deny_first{0};
    std::string last_body;
    std::mutex body_mutex;

    server.Post("/v1/chat/completions", [&](const httplib::Request& req,
                                            httplib::Response& res) {
        hits += 1;
        {
            std::lock_guard<std::mutex> lock(body_mutex);
            last_body = req.body;
        }
        if (req.get_header_value("Authorization") != "Bearer sk-test") {
            res.status = 401;
            res.set_content("{\"error\":\"bad key\"}", "application/json");
            return;
        }
        if (deny_first.load() > 0) {
            deny_first -= 1;
            res.status = 429;
            res.set_content("{\"error\":\"slow down\"}", "application/json");
            return;
        }
        nlohmann::json body = nlohmann::json::parse(req.body);
        std::string content = "Answer: B";
        std::string finish = "stop";
        if (body["messages"][0]["content"] == "long") finish = "length";
        nlohmann::json payload = {
            {"choices",
             {{{"message", {{"role", "assistant"}, {"content", content}}},
               {"finish_reason", finish}}}}};
        res.set_content(payload.dump(), "application/json");
    });

    int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread server_thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    HttpBackendConfig config;
    config.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
    config.api_key = "sk-test";
    config.retries = 3;
    config.backoff_ms = 1;
    config.timeout_ms = 5000;

    CompletionRequest request;
    request.model = "gpt-3.5-turbo-1106";
    request.messages = {{"user", "Question: ping"}};
    request.temperature = 0.0;
    request.max_tokens = 256;

    SUBCASE("success carries the body fields") {
        HttpBackend backend(config);
        CompletionResponse response = backend.complete(request);
        CHECK(response.text == "Answer: B");
        CHECK(response.finish_reason == FinishReason::Stop);
        CHECK(!response.from_cache);

        nlohmann::json body;
        {
            std::lock_guard<std::mutex> lock(body_mutex);
            body = nlohmann::json::parse(last_body);
        }
        CHECK(body["model"] == "gpt-3.5-turbo-1106");
        CHECK(body["temperature"] == 0.0);
        CHECK(body["max_tokens"] == 256);
        CHECK(body["messages"][0]["role"] == "user");
        CHECK(body["messages"][0]["content"] == "Question: ping");
    }
    SUBCASE("rate limits retry and then succeed") {
        hits = 0;
        deny_first = 2;
        HttpBackend backend(config);
        CompletionResponse response = backend.complete(request);
        CHECK(response.text == "Answer: B");
        CHECK(hits == 3);
    }
    SUBCASE("persistent rate limits exhaust the retry budget") {
        hits = 0;
        deny_first = 1000;
        HttpBackend backend(config);
        try {
            backend.complete(request);
            FAIL("expected a rate limit");
        } catch (const BackendError& e) {
            CHECK(e.kind() == BackendErrorKind::RateLimited);
        }
        CHECK(hits == 4);
    }
    SUBCASE("bad credentials fail fast") {
        hits = 0;
        HttpBackendConfig bad = config;
        bad.api_key = "sk-wrong";
        HttpBackend backend(bad);
        try {
            backend.complete(request);
            FAIL("expected an auth failure");
        } catch (const BackendError& e) {
            CHECK(e.kind() == BackendErrorKind::Unauthorized);
        }
        CHECK(hits == 1);
    }
    SUBCASE("length truncation is reported") {
        HttpBackend backend(config);
        CompletionRequest long_request = request;
        long_request.messages = {{"user", "long"}};
        CHECK(backend.complete(long_request).finish_reason == FinishReason::Length);
    }

    server.stop();
    server_thread.join();
}

TEST_CASE("unreachable endpoints surface as timeouts") {
    HttpBackendConfig config;
    config.endpoint = "http://127.0.0.1:9/v1/chat/completions";
    config.api_key = "sk-test";
    config.retries = 0;
    config.backoff_ms = 1;
    config.timeout_ms = 500;
    HttpBackend backend(config);
    CompletionRequest request;
    request.model = "m";
    request.messages = {{"user", "x"}};
    try {
        backend.complete(request);
        FAIL("expected a transport failure");
    } catch (const BackendError& e) {
        CHECK(e.kind() == BackendErrorKind::Timeout);
    }
}

TEST_CASE("the credential comes from the environment") {
    ::setenv(kApiKeyEnvVar, "sk-from-env", 1);
    CHECK(api_key_from_env() == "sk-from-env");
    ::unsetenv(kApiKeyEnvVar);
    CHECK(api_key_from_env().empty());
}
