#include "maims/run_config.hpp"

#include <filesystem>

#include "maims/error.hpp"
#include "maims/templates.hpp"
#include "maims/text.hpp"

namespace maims {

namespace fs = std::filesystem;
using nlohmann::json;

const RoleConfig& RunConfig::role(Role r) const {
    switch (r) {
    case Role::Poster: return poster;
    case Role::Analysis: return analysis;
    case Role::Discriminator: return discriminator;
    }
    return poster;
}

namespace {

std::string resolve(const std::string& base_dir, const std::string& p) {
    if (p.empty()) return p;
    fs::path path(p);
    if (path.is_absolute() || base_dir.empty()) return path.lexically_normal().string();
    return (fs::path(base_dir) / path).lexically_normal().string();
}

void reject_credentials(const json& j, const std::string& where) {
    for (const char* key : {"api_key", "apiKey", "token", "authorization"}) {
        if (j.contains(key))
            throw ConfigError(where + ": credentials are not accepted in config files; set MAIMS_API_KEY instead");
    }
}

RoleConfig role_from_json(Role role, const json& j, const std::string& base_dir) {
    const std::string where = "roles." + std::string(to_token(role));
    if (!j.is_object()) throw ConfigError(where + " must be an object");
    reject_credentials(j, where);
    RoleConfig rc;
    rc.role = role;
    const std::string backend = j.value("backend", "");
    if (backend == "mock") {
        if (!j.contains("script")) throw ConfigError(where + ".script is required for mock backends");
        rc.backend = MockBackend{resolve(base_dir, j.at("script").get<std::string>())};
    } else if (backend == "remote") {
        if (!j.contains("endpoint") || !j.contains("model"))
            throw ConfigError(where + ": remote backends need endpoint and model");
        rc.backend = RemoteBackend{j.at("endpoint").get<std::string>(), j.at("model").get<std::string>()};
    } else {
        throw ConfigError(where + ".backend must be \"mock\" or \"remote\"");
    }
    rc.temperature = j.value("temperature", 0.0);
    rc.max_output_tokens = j.value("max_output_tokens", 1024);
    rc.request_timeout = j.value("request_timeout", 60.0);
    return rc;
}

json role_to_json(const RoleConfig& rc) {
    json j;
    if (const auto* remote = std::get_if<RemoteBackend>(&rc.backend)) {
        j = {{"backend", "remote"}, {"endpoint", remote->endpoint}, {"model", remote->model}};
    } else {
        j = {{"backend", "mock"}, {"script", std::get<MockBackend>(rc.backend).script_path}};
    }
    j["temperature"] = rc.temperature;
    j["max_output_tokens"] = rc.max_output_tokens;
    j["request_timeout"] = rc.request_timeout;
    return j;
}

std::string file_digest(const std::string& path) {
    if (path.empty()) return "";
    return text::sha256_hex(text::read_file(path));
}

} // namespace

RunConfig run_config_from_json(const json& j, const std::string& base_dir) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    reject_credentials(j, "config");
    RunConfig c;
    try {
        c.scale_path = resolve(base_dir, j.value("scale", ""));
        c.corpus_path = resolve(base_dir, j.value("corpus", ""));
        c.task_path = resolve(base_dir, j.value("task", ""));
        if (j.contains("templates") && !j.at("templates").is_null())
            c.templates_dir = resolve(base_dir, j.at("templates").get<std::string>());
        if (j.contains("cache_dir") && !j.at("cache_dir").is_null())
            c.cache_dir = resolve(base_dir, j.at("cache_dir").get<std::string>());
        c.output_dir = resolve(base_dir, j.value("output_dir", std::string("out")));

        if (j.contains("mode")) {
            auto m = mode_from_token(j.at("mode").get<std::string>());
            if (!m) throw ConfigError("mode must be one of full, no_scale, no_discriminator");
            c.mode = *m;
        }
        c.max_retries = j.value("max_retries", c.max_retries);
        c.workers = j.value("workers", c.workers);
        if (j.contains("prefix_n") && !j.at("prefix_n").is_null()) c.prefix_n = j.at("prefix_n").get<std::size_t>();
        c.include_failed = j.value("include_failed", c.include_failed);
        if (j.contains("retry")) c.retry.backoff_seconds = j.at("retry").value("backoff_seconds", c.retry.backoff_seconds);

        const json roles = j.value("roles", json::object());
        const json defaults = roles.value("default", json::object());
        for (Role r : {Role::Poster, Role::Analysis, Role::Discriminator}) {
            json merged = defaults;
            if (roles.contains(std::string(to_token(r)))) merged.update(roles.at(std::string(to_token(r))));
            RoleConfig rc = role_from_json(r, merged, base_dir);
            switch (r) {
            case Role::Poster: c.poster = rc; break;
            case Role::Analysis: c.analysis = rc; break;
            case Role::Discriminator: c.discriminator = rc; break;
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return c;
}

RunConfig load_run_config(const std::string& path) {
    if (!fs::exists(path)) throw ConfigError("config file not found: " + path);
    json j;
    try {
        j = json::parse(text::read_file(path));
    } catch (const json::parse_error& e) {
        throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
    }
    return run_config_from_json(j, fs::path(path).parent_path().string());
}

void validate_run_config(const RunConfig& c) {
    auto need_file = [](const std::string& field, const std::string& path) {
        if (path.empty()) throw ConfigError(field + " is not set");
        if (!fs::is_regular_file(path)) throw ConfigError(field + " file not found: " + path);
    };
    need_file("scale", c.scale_path);
    need_file("corpus", c.corpus_path);
    need_file("task", c.task_path);
    if (!c.templates_dir.empty() && !fs::is_directory(c.templates_dir))
        throw ConfigError("templates directory not found: " + c.templates_dir);
    if (c.workers < 1) throw ConfigError("workers must be >= 1");
    if (c.max_retries < 0) throw ConfigError("max_retries must be >= 0");
    if (c.prefix_n && *c.prefix_n < 1) throw ConfigError("n must be >= 1");
    for (double d : c.retry.backoff_seconds) {
        if (d < 0) throw ConfigError("retry.backoff_seconds must be non-negative");
    }
    for (Role r : {Role::Poster, Role::Analysis, Role::Discriminator}) {
        const RoleConfig& rc = c.role(r);
        const std::string where = "roles." + std::string(to_token(r));
        if (rc.temperature < 0) throw ConfigError(where + ".temperature must be >= 0");
        if (rc.max_output_tokens < 1) throw ConfigError(where + ".max_output_tokens must be positive");
        if (rc.request_timeout <= 0) throw ConfigError(where + ".request_timeout must be positive");
        if (const auto* m = std::get_if<MockBackend>(&rc.backend)) need_file(where + ".script", m->script_path);
    }
}

json run_config_to_json(const RunConfig& c) {
    return {{"scale", c.scale_path},
            {"corpus", c.corpus_path},
            {"task", c.task_path},
            {"templates", c.templates_dir.empty() ? json(nullptr) : json(c.templates_dir)},
            {"cache_dir", c.cache_dir.empty() ? json(nullptr) : json(c.cache_dir)},
            {"output_dir", c.output_dir},
            {"mode", std::string(to_token(c.mode))},
            {"max_retries", c.max_retries},
            {"workers", c.workers},
            {"prefix_n", c.prefix_n ? json(*c.prefix_n) : json(nullptr)},
            {"include_failed", c.include_failed},
            {"retry", {{"backoff_seconds", c.retry.backoff_seconds}}},
            {"roles",
             {{"poster", role_to_json(c.poster)},
              {"analysis", role_to_json(c.analysis)},
              {"discriminator", role_to_json(c.discriminator)}}}};
}

std::string config_digest(const RunConfig& c) {
    json roles = json::object();
    for (Role r : {Role::Poster, Role::Analysis, Role::Discriminator}) {
        const RoleConfig& rc = c.role(r);
        json jr = role_to_json(rc);
        if (const auto* m = std::get_if<MockBackend>(&rc.backend)) {
            jr.erase("script");
            jr["script_sha256"] = file_digest(m->script_path);
        }
        jr.erase("request_timeout");
        roles[std::string(to_token(r))] = std::move(jr);
    }
    const PromptTemplates templates =
        c.templates_dir.empty() ? PromptTemplates::defaults() : PromptTemplates::load_dir(c.templates_dir);
    json basis = {{"scale_sha256", file_digest(c.scale_path)},
                  {"corpus_sha256", file_digest(c.corpus_path)},
                  {"task_sha256", file_digest(c.task_path)},
                  {"templates_sha256", templates.digest()},
                  {"mode", std::string(to_token(c.mode))},
                  {"max_retries", c.max_retries},
                  {"prefix_n", c.prefix_n ? json(*c.prefix_n) : json(nullptr)},
                  {"include_failed", c.include_failed},
                  {"roles", std::move(roles)}};
    return text::sha256_hex(basis.dump());
}

} // namespace maims
