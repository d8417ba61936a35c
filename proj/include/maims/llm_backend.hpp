#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace maims {

/// The three model roles of the method: the poster completes the scale, the
/// analysis role classifies, the discriminator accepts or rejects.
enum class Role { Poster, Analysis, Discriminator };

std::string_view to_token(Role r);
std::optional<Role> role_from_token(std::string_view token);

/// OpenAI-compatible chat-completions endpoint.
struct RemoteBackend {
    std::string endpoint; // base URL, e.g. http://localhost:8000/v1
    std::string model;
};

struct MockBackend {
    std::string script_path;
};

struct RoleConfig {
    Role role = Role::Poster;
    std::variant<RemoteBackend, MockBackend> backend = MockBackend{};
    double temperature = 0.0;
    int max_output_tokens = 1024;
    double request_timeout = 60.0; // seconds

    [[nodiscard]] std::string model_name() const;
};

/// Transient failures are retried after each delay in turn, so the number of
/// transport attempts per call is at most 1 + backoff_seconds.size().
struct RetryPolicy {
    std::vector<double> backoff_seconds{1.0, 2.0, 4.0};
};

struct Completion {
    std::string text;
    bool cached = false;
    Role role = Role::Poster;
    std::string prompt_digest;
};

struct ChatRequest {
    Role role = Role::Poster;
    std::string model;
    std::string prompt;
    double temperature = 0.0;
    int max_output_tokens = 1024;
    double timeout_seconds = 60.0;
};

/// Raised by transports for failures worth retrying (connection errors, 429, 5xx).
class TransientBackendError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class Transport {
  public:
    virtual ~Transport() = default;
    /// One attempt. Throws TransientBackendError, BackendRejected or MockScriptMiss.
    virtual std::string send(const ChatRequest& request) = 0;
    /// Stable identity that participates in the cache key.
    [[nodiscard]] virtual std::string identity() const = 0;
};

// ---------------------------------------------------------------------------
// Mock scripts

struct MockRule {
    std::vector<std::string> contains; // all must occur in the prompt
    std::optional<Role> role;          // restricts the rule to one role
    std::string response;
};

/// Scripted responses: exact entries keyed by `script_key(role, prompt)`,
/// then substring rules tried in order.
struct MockScript {
    std::map<std::string, std::string> entries;
    std::vector<MockRule> rules;

    [[nodiscard]] std::optional<std::string> lookup(Role role, const std::string& prompt) const;
    [[nodiscard]] nlohmann::json to_json() const;
    static MockScript from_json(const nlohmann::json& j);
    static MockScript load(const std::string& path);
    void save(const std::string& path) const;
};

/// Replay key of a (role, prompt) pair; independent of backend and temperature so
/// that a script exported from a live run replays under a mock backend.
std::string script_key(Role role, const std::string& prompt);

class MockTransport : public Transport {
  public:
    explicit MockTransport(MockScript script);
    std::string send(const ChatRequest& request) override;
    [[nodiscard]] std::string identity() const override { return identity_; }

  private:
    MockScript script_;
    std::string identity_;
};

class HttpTransport : public Transport {
  public:
    /// Reads the bearer token from MAIMS_API_KEY when set.
    explicit HttpTransport(std::string endpoint);
    std::string send(const ChatRequest& request) override;
    [[nodiscard]] std::string identity() const override { return "remote:" + endpoint_; }

  private:
    std::string endpoint_;
    std::string scheme_host_port_;
    std::string path_;
    std::optional<std::string> api_key_;
};

// ---------------------------------------------------------------------------
// Cache

struct CacheEntry {
    std::string digest;
    std::string role;
    std::string model;
    std::string prompt;
    std::string response;
    std::string created_at;
};

struct CacheStats {
    std::size_t entries = 0;
    std::size_t bytes = 0;
    std::map<std::string, std::size_t> per_role;
};

/// One JSON file per digest under <dir>/<first two hex>/<digest>.json, written
/// atomically. Safe for concurrent readers and writers.
class ResponseCache {
  public:
    explicit ResponseCache(std::string dir);

    [[nodiscard]] std::optional<CacheEntry> get(const std::string& digest) const;
    void put(const CacheEntry& entry) const;
    [[nodiscard]] std::vector<CacheEntry> entries() const;
    [[nodiscard]] CacheStats stats() const;
    std::size_t clear() const;
    /// Converts every cached interaction into a replayable mock script.
    [[nodiscard]] MockScript export_script() const;
    [[nodiscard]] const std::string& dir() const noexcept { return dir_; }

  private:
    [[nodiscard]] std::string path_for(const std::string& digest) const;
    std::string dir_;
};

// ---------------------------------------------------------------------------
// Client

/// Content hash of (role, backend identity, model, temperature, prompt).
std::string cache_key(Role role, const std::string& backend_identity, const std::string& model, double temperature,
                      const std::string& prompt);
/// Convenience form; for mock backends this reads the script to derive its identity.
std::string cache_key(const RoleConfig& config, const std::string& prompt);

std::shared_ptr<Transport> make_transport(const RoleConfig& config);

using Sleeper = std::function<void(double seconds)>;

/// Per-role model client: cache lookup, then transport with bounded retry.
/// Thread-safe.
class LlmClient {
  public:
    LlmClient(RoleConfig config, std::shared_ptr<Transport> transport, std::shared_ptr<const ResponseCache> cache = {},
              RetryPolicy retry = {}, Sleeper sleeper = {});

    Completion complete(const std::string& prompt);

    /// Transport attempts (retries included, cache hits excluded).
    [[nodiscard]] std::size_t transport_invocations() const noexcept { return transport_calls_.load(); }
    /// Logical calls, cache hits included.
    [[nodiscard]] std::size_t calls() const noexcept { return calls_.load(); }
    void reset_counters() noexcept;
    [[nodiscard]] const RoleConfig& config() const noexcept { return config_; }

  private:
    RoleConfig config_;
    std::shared_ptr<Transport> transport_;
    std::shared_ptr<const ResponseCache> cache_;
    RetryPolicy retry_;
    Sleeper sleeper_;
    std::string identity_;
    std::atomic<std::size_t> transport_calls_{0};
    std::atomic<std::size_t> calls_{0};
};

} // namespace maims
