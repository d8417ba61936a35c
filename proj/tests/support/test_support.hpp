#pragma once

#include <httplib.h>

#include <atomic>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "maims/corpus.hpp"
#include "maims/llm_backend.hpp"
#include "maims/pipeline.hpp"
#include "maims/scales.hpp"
#include "maims/text.hpp"

namespace maims::testing {

inline std::string source_path(const std::string& rel) { return std::string(MAIMS_SOURCE_DIR) + "/" + rel; }

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
  public:
    TempDir() {
        static std::atomic<int> seq{0};
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("maims_test_" + std::to_string(rd()) + "_" + std::to_string(seq.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    [[nodiscard]] std::string str() const { return path_.string(); }
    [[nodiscard]] std::string file(const std::string& name) const { return (path_ / name).string(); }
    void write(const std::string& name, const std::string& content) const { text::write_file_atomic(file(name), content); }

  private:
    std::filesystem::path path_;
};

inline MentalScale sample_scale() { return load_scale(source_path("assets/sample_scale.json")); }
inline TaskSpec sample_task() { return load_task(source_path("assets/sample_task.json")); }
inline Corpus sample_corpus() {
    TaskSpec t = sample_task();
    return load_corpus(source_path("assets/sample_corpus.jsonl"), &t, true);
}
inline MockScript sample_script() { return MockScript::load(source_path("assets/sample_mock_script.json")); }

inline MockRule rule(Role role, std::vector<std::string> contains, std::string response) {
    return MockRule{std::move(contains), role, std::move(response)};
}

/// A client for `role` that answers from `script`, with no delay between retries.
inline std::shared_ptr<LlmClient> mock_client(Role role, const MockScript& script,
                                              std::shared_ptr<const ResponseCache> cache = {}) {
    RoleConfig rc;
    rc.role = role;
    return std::make_shared<LlmClient>(rc, std::make_shared<MockTransport>(script), std::move(cache), RetryPolicy{},
                                       [](double) {});
}

inline RoleClients mock_clients(const MockScript& script, std::shared_ptr<const ResponseCache> cache = {}) {
    return {mock_client(Role::Poster, script, cache), mock_client(Role::Analysis, script, cache),
            mock_client(Role::Discriminator, script, cache)};
}

/// Transport driven by a callback; counts attempts.
class FunctionTransport : public Transport {
  public:
    explicit FunctionTransport(std::function<std::string(const ChatRequest&, int attempt)> fn) : fn_(std::move(fn)) {}
    std::string send(const ChatRequest& request) override { return fn_(request, ++attempts_); }
    [[nodiscard]] std::string identity() const override { return "function"; }
    [[nodiscard]] int attempts() const { return attempts_.load(); }

  private:
    std::function<std::string(const ChatRequest&, int)> fn_;
    std::atomic<int> attempts_{0};
};

/// Minimal OpenAI-compatible chat-completions server on localhost. `reply`
/// maps the user message to (status, content).
class FakeChatServer {
  public:
    using Reply = std::function<std::pair<int, std::string>(const std::string& prompt, const httplib::Request&)>;

    explicit FakeChatServer(Reply reply) : reply_(std::move(reply)) {
        server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
            ++requests_;
            {
                std::lock_guard<std::mutex> lock(mu_);
                last_body_ = req.body;
                last_auth_ = req.get_header_value("Authorization");
            }
            auto body = nlohmann::json::parse(req.body);
            const std::string prompt = body.at("messages").at(0).at("content").get<std::string>();
            auto [status, content] = reply_(prompt, req);
            res.status = status;
            if (status == 200) {
                nlohmann::json out = {
                    {"id", "chatcmpl-test"},
                    {"object", "chat.completion"},
                    {"choices", nlohmann::json::array({{{"index", 0},
                                                        {"message", {{"role", "assistant"}, {"content", content}}},
                                                        {"finish_reason", "stop"}}})}};
                res.set_content(out.dump(), "application/json");
            } else {
                res.set_content(content, "text/plain");
            }
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~FakeChatServer() {
        server_.stop();
        if (thread_.joinable()) thread_.join();
    }

    [[nodiscard]] std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }
    [[nodiscard]] int requests() const { return requests_.load(); }
    [[nodiscard]] std::string last_body() const {
        std::lock_guard<std::mutex> lock(mu_);
        return last_body_;
    }
    [[nodiscard]] std::string last_auth() const {
        std::lock_guard<std::mutex> lock(mu_);
        return last_auth_;
    }

  private:
    Reply reply_;
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    std::atomic<int> requests_{0};
    mutable std::mutex mu_;
    std::string last_body_;
    std::string last_auth_;
};

/// Every evidence flag recomputed from scratch: collapse whitespace, lowercase,
/// substring search. Written independently of the library's normalizer.
inline bool independent_evidence_check(const std::string& quote, const std::string& post) {
    auto norm = [](const std::string& s) {
        std::string out;
        std::string word;
        for (char c : s) {
            if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
                if (!word.empty()) {
                    if (!out.empty()) out += ' ';
                    out += word;
                    word.clear();
                }
            } else {
                word += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
            }
        }
        if (!word.empty()) {
            if (!out.empty()) out += ' ';
            out += word;
        }
        return out;
    };
    const std::string q = norm(quote);
    return !q.empty() && norm(post).find(q) != std::string::npos;
}

} // namespace maims::testing
