#include "maims/llm_backend.hpp"

#include <httplib.h>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <thread>

#include "maims/error.hpp"
#include "maims/text.hpp"

namespace maims {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_token(Role r) {
    switch (r) {
    case Role::Poster: return "poster";
    case Role::Analysis: return "analysis";
    case Role::Discriminator: return "discriminator";
    }
    return "poster";
}

std::optional<Role> role_from_token(std::string_view token) {
    for (Role r : {Role::Poster, Role::Analysis, Role::Discriminator}) {
        if (token == to_token(r)) return r;
    }
    return std::nullopt;
}

std::string RoleConfig::model_name() const {
    if (const auto* remote = std::get_if<RemoteBackend>(&backend)) return remote->model;
    return "mock";
}

// ---------------------------------------------------------------------------
// Mock scripts

std::string script_key(Role role, const std::string& prompt) {
    return text::sha256_hex(json::array({"maims-script-v1", to_token(role), prompt}).dump());
}

std::optional<std::string> MockScript::lookup(Role role, const std::string& prompt) const {
    if (auto it = entries.find(script_key(role, prompt)); it != entries.end()) return it->second;
    for (const auto& rule : rules) {
        if (rule.role && *rule.role != role) continue;
        bool all = true;
        for (const auto& needle : rule.contains) {
            if (prompt.find(needle) == std::string::npos) {
                all = false;
                break;
            }
        }
        if (all) return rule.response;
    }
    return std::nullopt;
}

json MockScript::to_json() const {
    json rules_json = json::array();
    for (const auto& r : rules) {
        json jr = {{"contains", r.contains}, {"response", r.response}};
        if (r.role) jr["role"] = std::string(to_token(*r.role));
        rules_json.push_back(std::move(jr));
    }
    return {{"entries", entries}, {"rules", std::move(rules_json)}};
}

MockScript MockScript::from_json(const json& j) {
    MockScript s;
    if (!j.is_object()) throw ConfigError("mock script must be a JSON object");
    // A bare {digest: response} map is accepted as an entries-only script.
    if (!j.contains("entries") && !j.contains("rules")) {
        for (const auto& [k, v] : j.items()) {
            if (!v.is_string()) throw ConfigError("mock script entry " + k + " must be a string");
            s.entries[k] = v.get<std::string>();
        }
        return s;
    }
    const json entries = j.value("entries", json::object());
    for (const auto& [k, v] : entries.items()) {
        if (!v.is_string()) throw ConfigError("mock script entry " + k + " must be a string");
        s.entries[k] = v.get<std::string>();
    }
    const json rules = j.value("rules", json::array());
    for (const auto& jr : rules) {
        MockRule r;
        const auto& c = jr.at("contains");
        if (c.is_string()) r.contains.push_back(c.get<std::string>());
        else r.contains = c.get<std::vector<std::string>>();
        if (jr.contains("role")) {
            auto role = role_from_token(jr.at("role").get<std::string>());
            if (!role) throw ConfigError("mock script rule has unknown role " + jr.at("role").dump());
            r.role = role;
        }
        r.response = jr.at("response").get<std::string>();
        s.rules.push_back(std::move(r));
    }
    return s;
}

MockScript MockScript::load(const std::string& path) {
    if (!fs::exists(path)) throw FileNotFound(path);
    try {
        return from_json(json::parse(text::read_file(path)));
    } catch (const json::exception& e) {
        throw ConfigError("invalid mock script " + path + ": " + e.what());
    }
}

void MockScript::save(const std::string& path) const { text::write_file_atomic(path, to_json().dump(2) + "\n"); }

MockTransport::MockTransport(MockScript script)
    : script_(std::move(script)), identity_("mock:" + text::sha256_hex(script_.to_json().dump())) {}

std::string MockTransport::send(const ChatRequest& request) {
    if (auto hit = script_.lookup(request.role, request.prompt)) return *hit;
    throw MockScriptMiss(script_key(request.role, request.prompt));
}

// ---------------------------------------------------------------------------
// HTTP

namespace {

// Splits "https://host:port/base" into ("https://host:port", "/base/chat/completions").
std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
    auto scheme_end = endpoint.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("endpoint must start with http:// or https://: " + endpoint);
    auto path_start = endpoint.find('/', scheme_end + 3);
    std::string origin = endpoint.substr(0, path_start);
    std::string path = path_start == std::string::npos ? "" : endpoint.substr(path_start);
    while (!path.empty() && path.back() == '/') path.pop_back();
    const std::string suffix = "/chat/completions";
    if (path.size() < suffix.size() || path.compare(path.size() - suffix.size(), suffix.size(), suffix) != 0)
        path += suffix;
    return {origin, path};
}

} // namespace

HttpTransport::HttpTransport(std::string endpoint) : endpoint_(std::move(endpoint)) {
    std::tie(scheme_host_port_, path_) = split_endpoint(endpoint_);
    if (const char* key = std::getenv("MAIMS_API_KEY"); key != nullptr && *key != '\0') api_key_ = key;
}

std::string HttpTransport::send(const ChatRequest& request) {
    httplib::Client client(scheme_host_port_);
    const auto timeout = std::chrono::duration<double>(request.timeout_seconds);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    httplib::Headers headers;
    if (api_key_) headers.emplace("Authorization", "Bearer " + *api_key_);

    json body = {{"model", request.model},
                 {"messages", json::array({{{"role", "user"}, {"content", request.prompt}}})},
                 {"temperature", request.temperature},
                 {"max_tokens", request.max_output_tokens}};

    auto res = client.Post(path_, headers, body.dump(), "application/json");
    if (!res) throw TransientBackendError("transport error: " + httplib::to_string(res.error()));
    if (res->status == 429 || res->status >= 500)
        throw TransientBackendError("HTTP " + std::to_string(res->status));
    if (res->status < 200 || res->status >= 300) throw BackendRejected(res->status, res->body);

    try {
        auto j = json::parse(res->body);
        const auto& content = j.at("choices").at(0).at("message").at("content");
        return content.is_string() ? content.get<std::string>() : std::string{};
    } catch (const json::exception&) {
        throw BackendRejected(res->status, "unparseable completion body: " + res->body.substr(0, 200));
    }
}

// ---------------------------------------------------------------------------
// Cache

ResponseCache::ResponseCache(std::string dir) : dir_(std::move(dir)) {}

std::string ResponseCache::path_for(const std::string& digest) const {
    return (fs::path(dir_) / digest.substr(0, 2) / (digest + ".json")).string();
}

namespace {

std::optional<CacheEntry> read_entry(const fs::path& p) {
    try {
        auto j = json::parse(text::read_file(p.string()));
        CacheEntry e;
        e.digest = j.at("digest").get<std::string>();
        e.role = j.at("role").get<std::string>();
        e.model = j.value("model", "");
        e.prompt = j.at("prompt").get<std::string>();
        e.response = j.at("response").get<std::string>();
        e.created_at = j.value("created_at", "");
        return e;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

std::string utc_now() {
    auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace

std::optional<CacheEntry> ResponseCache::get(const std::string& digest) const {
    fs::path p = path_for(digest);
    std::error_code ec;
    if (!fs::exists(p, ec)) return std::nullopt;
    auto e = read_entry(p);
    // a file whose recorded digest disagrees with its name is never served
    if (!e || e->digest != digest) return std::nullopt;
    return e;
}

void ResponseCache::put(const CacheEntry& entry) const {
    json j = {{"digest", entry.digest},
              {"role", entry.role},
              {"model", entry.model},
              {"prompt", entry.prompt},
              {"response", entry.response},
              {"created_at", entry.created_at.empty() ? utc_now() : entry.created_at}};
    text::write_file_atomic(path_for(entry.digest), j.dump(2) + "\n");
}

std::vector<CacheEntry> ResponseCache::entries() const {
    std::vector<CacheEntry> out;
    std::error_code ec;
    if (!fs::is_directory(dir_, ec)) return out;
    for (const auto& de : fs::recursive_directory_iterator(dir_)) {
        if (!de.is_regular_file() || de.path().extension() != ".json") continue;
        if (auto e = read_entry(de.path()); e && e->digest == de.path().stem().string()) out.push_back(std::move(*e));
    }
    std::sort(out.begin(), out.end(), [](const CacheEntry& a, const CacheEntry& b) { return a.digest < b.digest; });
    return out;
}

CacheStats ResponseCache::stats() const {
    CacheStats s;
    std::error_code ec;
    if (!fs::is_directory(dir_, ec)) return s;
    for (const auto& de : fs::recursive_directory_iterator(dir_)) {
        if (!de.is_regular_file() || de.path().extension() != ".json") continue;
        auto e = read_entry(de.path());
        if (!e || e->digest != de.path().stem().string()) continue;
        ++s.entries;
        s.bytes += static_cast<std::size_t>(de.file_size());
        ++s.per_role[e->role];
    }
    return s;
}

std::size_t ResponseCache::clear() const {
    std::error_code ec;
    if (!fs::is_directory(dir_, ec)) return 0;
    std::size_t removed = 0;
    std::vector<fs::path> files;
    for (const auto& de : fs::recursive_directory_iterator(dir_)) {
        if (de.is_regular_file() && de.path().extension() == ".json") files.push_back(de.path());
    }
    for (const auto& f : files) removed += fs::remove(f, ec) ? 1 : 0;
    for (const auto& de : fs::directory_iterator(dir_)) {
        if (de.is_directory() && fs::is_empty(de.path(), ec)) fs::remove(de.path(), ec);
    }
    return removed;
}

MockScript ResponseCache::export_script() const {
    auto all = entries();
    if (all.empty()) throw EmptyCache(dir_);
    MockScript script;
    for (const auto& e : all) {
        auto role = role_from_token(e.role);
        if (!role) continue;
        script.entries[script_key(*role, e.prompt)] = e.response;
    }
    return script;
}

// ---------------------------------------------------------------------------
// Client

std::string cache_key(Role role, const std::string& backend_identity, const std::string& model, double temperature,
                      const std::string& prompt) {
    return text::sha256_hex(
        json::array({"maims-cache-v1", to_token(role), backend_identity, model, text::format_number(temperature), prompt})
            .dump());
}

std::shared_ptr<Transport> make_transport(const RoleConfig& config) {
    if (const auto* remote = std::get_if<RemoteBackend>(&config.backend))
        return std::make_shared<HttpTransport>(remote->endpoint);
    return std::make_shared<MockTransport>(MockScript::load(std::get<MockBackend>(config.backend).script_path));
}

std::string cache_key(const RoleConfig& config, const std::string& prompt) {
    return cache_key(config.role, make_transport(config)->identity(), config.model_name(), config.temperature, prompt);
}

LlmClient::LlmClient(RoleConfig config, std::shared_ptr<Transport> transport,
                     std::shared_ptr<const ResponseCache> cache, RetryPolicy retry, Sleeper sleeper)
    : config_(std::move(config)), transport_(std::move(transport)), cache_(std::move(cache)), retry_(std::move(retry)),
      sleeper_(std::move(sleeper)) {
    if (!transport_) throw ConfigError("LlmClient requires a transport");
    if (!sleeper_) {
        sleeper_ = [](double s) { std::this_thread::sleep_for(std::chrono::duration<double>(s)); };
    }
    identity_ = transport_->identity();
}

Completion LlmClient::complete(const std::string& prompt) {
    if (prompt.empty()) throw Error("InvalidPrompt", "prompt must be non-empty");
    ++calls_;
    Completion c;
    c.role = config_.role;
    c.prompt_digest = cache_key(config_.role, identity_, config_.model_name(), config_.temperature, prompt);

    if (cache_) {
        if (auto hit = cache_->get(c.prompt_digest)) {
            c.text = hit->response;
            c.cached = true;
            return c;
        }
    }

    ChatRequest req{config_.role, config_.model_name(), prompt, config_.temperature, config_.max_output_tokens,
                    config_.request_timeout};
    std::string last_error;
    const std::size_t attempts = 1 + retry_.backoff_seconds.size();
    for (std::size_t attempt = 0; attempt < attempts; ++attempt) {
        if (attempt > 0) sleeper_(retry_.backoff_seconds[attempt - 1]);
        ++transport_calls_;
        try {
            c.text = transport_->send(req);
        } catch (const TransientBackendError& e) {
            last_error = e.what();
            continue;
        }
        if (cache_) {
            cache_->put({c.prompt_digest, std::string(to_token(config_.role)), config_.model_name(), prompt, c.text, {}});
        }
        return c;
    }
    throw BackendUnreachable(std::string(to_token(config_.role)),
                             last_error + " (after " + std::to_string(attempts) + " attempts)");
}

void LlmClient::reset_counters() noexcept {
    transport_calls_ = 0;
    calls_ = 0;
}

} // namespace maims
