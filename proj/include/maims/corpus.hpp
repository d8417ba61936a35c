#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace maims {

struct Post {
    std::string post_id;
    std::string text;
    std::optional<std::string> gold_label;

    bool operator==(const Post&) const = default;
};

/// A detection task: the question put to the analysis role and its label set.
struct TaskSpec {
    std::string task_id;
    std::string question;
    std::vector<std::string> labels;
    std::string positive_label;
    std::string scale_id;

    /// Canonical spelling of `label` (case-insensitive match), if admissible.
    [[nodiscard]] std::optional<std::string> canonical_label(const std::string& label) const;
    /// First label that is not the positive label; used when a post cannot be classified.
    [[nodiscard]] const std::string& fallback_label() const;

    bool operator==(const TaskSpec&) const = default;
};

/// Posts in file order. Immutable after load.
struct Corpus {
    std::string corpus_id;
    std::vector<Post> posts;

    [[nodiscard]] const Post* find(const std::string& post_id) const;
    [[nodiscard]] bool fully_labeled() const;
    bool operator==(const Corpus&) const = default;
};

std::vector<std::string> validate_task(const TaskSpec& task);
TaskSpec task_from_json(const nlohmann::json& j);
nlohmann::json task_to_json(const TaskSpec& task);
TaskSpec load_task(const std::string& path);

/// Reads a JSONL corpus. When `task` is given, labels are canonicalized against
/// its label set and unknown labels are rejected.
Corpus load_corpus(const std::string& path, const TaskSpec* task, bool require_labels);
/// Parses JSONL text; `corpus_id` names the result.
Corpus parse_corpus(const std::string& jsonl, const std::string& corpus_id, const TaskSpec* task,
                    bool require_labels);
std::string corpus_to_jsonl(const Corpus& corpus);

/// First min(n, N) posts, order preserved.
Corpus take_prefix(const Corpus& corpus, std::size_t n);

} // namespace maims
