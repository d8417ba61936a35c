#pragma once

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "maims/llm_backend.hpp"
#include "maims/records.hpp"

namespace maims {

/// Everything needed to reproduce one run. Precedence when merging:
/// command-line flags, then the config file, then these defaults.
struct RunConfig {
    std::string scale_path;
    std::string corpus_path;
    std::string task_path;
    std::string templates_dir; // empty: compiled-in defaults
    std::string cache_dir;     // empty: no response cache
    std::string output_dir = "out";

    RoleConfig poster{Role::Poster};
    RoleConfig analysis{Role::Analysis};
    RoleConfig discriminator{Role::Discriminator};
    RetryPolicy retry;

    Mode mode = Mode::Full;
    int max_retries = 2;
    int workers = 4;
    std::optional<std::size_t> prefix_n;
    bool include_failed = true;

    [[nodiscard]] const RoleConfig& role(Role r) const;
};

/// Parses a config document; relative paths are resolved against `base_dir`.
RunConfig run_config_from_json(const nlohmann::json& j, const std::string& base_dir);
RunConfig load_run_config(const std::string& path);

/// Checks value ranges and that every referenced file exists. Throws ConfigError
/// naming the offending field or path.
void validate_run_config(const RunConfig& config);

/// The merged configuration as written to merged_config.json.
nlohmann::json run_config_to_json(const RunConfig& config);

/// Hash over the run's behavior-relevant settings and the content of every
/// input file, so it is independent of where the files live.
std::string config_digest(const RunConfig& config);

} // namespace maims
