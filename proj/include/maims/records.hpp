#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace maims {

/// Version of the trace line layout written by `record_to_json`.
inline constexpr int kTraceSchemaVersion = 1;

enum class MentionCategory { DirectMention, IndirectMention, NoMention };

/// Canonical tokens: direct_mention, indirect_mention, no_mention.
std::string_view to_token(MentionCategory m);
/// Accepts canonical tokens plus aliases such as "directly_mention" or "no mention".
std::optional<MentionCategory> mention_from_token(std::string_view token);

struct ItemResponse {
    std::string item_id;
    MentionCategory mention = MentionCategory::NoMention;
    std::optional<std::string> selected_option; // present iff mention != NoMention
    std::string rationale;
    std::vector<std::string> evidence_quotes;
    std::vector<bool> evidence_verified; // parallel to evidence_quotes

    bool operator==(const ItemResponse&) const = default;
};

enum class Stage { Scale, Analysis };
std::string_view to_token(Stage s);

struct ItemIssue {
    std::string item_id;
    std::string issue;
    bool operator==(const ItemIssue&) const = default;
};

/// A discriminator decision. A rejection always carries a non-empty critique.
struct Verdict {
    Stage stage = Stage::Scale;
    bool accepted = false;
    std::string critique;
    std::vector<ItemIssue> item_issues; // always empty for Stage::Analysis

    bool operator==(const Verdict&) const = default;
};

/// The completed scale for one post.
struct ScaleResponse {
    std::string scale_id;
    std::string post_id;
    std::vector<ItemResponse> items; // one per scale item, in scale order
    int attempts = 1;
    std::vector<Verdict> verdict_history;

    [[nodiscard]] const ItemResponse* find_item(const std::string& item_id) const;
    bool operator==(const ScaleResponse&) const = default;
};

struct AnalysisResult {
    std::string label;
    std::string explanation;
    std::vector<std::string> cited_items;

    bool operator==(const AnalysisResult&) const = default;
};

enum class Mode { Full, NoScale, NoDiscriminator };
std::string_view to_token(Mode m);
std::optional<Mode> mode_from_token(std::string_view token);

enum class Status { Accepted, AcceptedAfterRetry, ForcedAfterMaxRetries, Failed };
std::string_view to_token(Status s);
std::optional<Status> status_from_token(std::string_view token);

/// Logical model calls made for one post, cache hits included.
struct CallCounts {
    int poster = 0;
    int analysis = 0;
    int discriminator = 0;
    bool operator==(const CallCounts&) const = default;
};

struct FailureInfo {
    std::string kind;
    std::string message;
    bool operator==(const FailureInfo&) const = default;
};

/// The accepted (or forced, or failed) final output for one post.
struct FinalRecord {
    std::string post_id;
    std::string post_text;
    Mode mode = Mode::Full;
    std::optional<ScaleResponse> scale_response;
    AnalysisResult analysis;
    std::vector<Verdict> verdicts; // scale stage first, then analysis stage
    int analysis_attempts = 0;
    Status status = Status::Failed;
    CallCounts calls;
    std::optional<FailureInfo> failure;
    double wall_seconds = 0.0; // only non-deterministic field; serialized under "meta"

    bool operator==(const FinalRecord&) const = default;
};

nlohmann::json to_json(const ItemResponse& r);
nlohmann::json to_json(const ScaleResponse& r);
nlohmann::json to_json(const Verdict& v);
nlohmann::json to_json(const FinalRecord& r);

ScaleResponse scale_response_from_json(const nlohmann::json& j);
Verdict verdict_from_json(const nlohmann::json& j);
FinalRecord record_from_json(const nlohmann::json& j);

/// One JSON object per line, in the given order.
std::string traces_to_jsonl(const std::vector<FinalRecord>& records);
void write_traces(const std::vector<FinalRecord>& records, const std::string& path);
std::vector<FinalRecord> read_traces(const std::string& path);

} // namespace maims
