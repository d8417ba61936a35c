#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "maims/corpus.hpp"
#include "maims/error.hpp"
#include "maims/llm_backend.hpp"
#include "maims/records.hpp"
#include "maims/scales.hpp"
#include "maims/templates.hpp"

namespace maims {

// ---------------------------------------------------------------------------
// Prompt construction

/// The line-oriented answer layout the poster role must follow.
const std::string& scale_answer_layout();

std::string render_scale_items(const MentalScale& scale);
/// Every item with mention, option, evidence (with check marks) and reason.
std::string render_completed_scale(const ScaleResponse& response, const MentalScale& scale);

std::string build_step1_prompt(const Post& post, const MentalScale& scale, const std::optional<std::string>& critique,
                               const PromptTemplates& templates = PromptTemplates::defaults());

/// `response` absent means the scale step was skipped: the prompt then carries
/// only the task question and the post.
std::string build_step2_prompt(const Post& post, const ScaleResponse* response, const MentalScale* scale,
                               const TaskSpec& task, const std::optional<std::string>& critique,
                               const PromptTemplates& templates = PromptTemplates::defaults());

std::string build_scale_discriminator_prompt(const Post& post, const MentalScale& scale,
                                             const ScaleResponse& response,
                                             const PromptTemplates& templates = PromptTemplates::defaults());

std::string build_analysis_discriminator_prompt(const Post& post, const ScaleResponse* response,
                                                const MentalScale* scale, const TaskSpec& task,
                                                const AnalysisResult& result,
                                                const PromptTemplates& templates = PromptTemplates::defaults());

// ---------------------------------------------------------------------------
// Output parsing

struct ParseFailure {
    std::vector<std::string> missing_items;
    std::vector<std::string> unknown_options;  // "item <id>: <code>"
    std::vector<std::string> unknown_mentions; // "item <id>: <token>"

    [[nodiscard]] bool empty() const {
        return missing_items.empty() && unknown_options.empty() && unknown_mentions.empty();
    }
    [[nodiscard]] std::string describe() const;
};

struct ScaleParseResult {
    std::optional<ScaleResponse> response;
    ParseFailure failure;
    [[nodiscard]] bool ok() const { return response.has_value(); }
};

/// Parses the poster's answer block. On success every scale item is covered
/// exactly once and evidence flags are set against `post`.
ScaleParseResult parse_scale_response(const std::string& raw, const MentalScale& scale, const Post& post);

/// Whitespace-normalized, case-insensitive substring test.
bool evidence_matches(const std::string& quote, const std::string& post_text);
/// Recomputes every evidence flag; rationale text is left untouched.
ScaleResponse verify_evidence(ScaleResponse response, const Post& post);

/// ACCEPT / REJECT[: critique]. Anything else is a rejection with critique
/// "unparseable verdict". For the scale stage, lines of the form
/// "item <id>: <issue>" naming items of `scale` become item_issues.
Verdict parse_verdict(const std::string& raw, Stage stage, const MentalScale* scale = nullptr);

struct LabelParseResult {
    std::optional<std::string> label;
    std::string explanation;
    std::string problem; // set when label is empty
    [[nodiscard]] bool ok() const { return label.has_value(); }
};

LabelParseResult parse_label(const std::string& raw, const TaskSpec& task);

/// Item ids of `response` referenced in `explanation` ("item 13", "questions 13 and 20").
std::vector<std::string> cited_items(const std::string& explanation, const ScaleResponse& response);

// ---------------------------------------------------------------------------
// Engine

struct PipelineConfig {
    Mode mode = Mode::Full;
    int max_retries = 2;
    PromptTemplates templates = PromptTemplates::defaults();
};

struct RoleClients {
    std::shared_ptr<LlmClient> poster;
    std::shared_ptr<LlmClient> analysis;
    std::shared_ptr<LlmClient> discriminator;
};

/// Raised by run_corpus when a post could not be processed because a backend
/// was unreachable, rejected the request, or had no scripted answer.
class BackendAbort : public Error {
  public:
    BackendAbort(std::string cause_kind, const std::string& message)
        : Error("BackendAbort", message), cause_kind_(std::move(cause_kind)) {}
    [[nodiscard]] const std::string& cause_kind() const noexcept { return cause_kind_; }

  private:
    std::string cause_kind_;
};

/// Result of the scale-completion loop.
struct ScaleOutcome {
    ScaleResponse response;
    bool forced = false; // retry budget exhausted without acceptance
};

/// Two-step workflow for one scale and task. Thread-safe: run() may be called
/// concurrently for different posts.
class Pipeline {
  public:
    Pipeline(MentalScale scale, TaskSpec task, PipelineConfig config, RoleClients clients);

    /// Step 1 with its discriminator loop. Throws PipelineFailure when the poster
    /// output stays unparseable after one repair re-ask.
    ScaleOutcome complete_scale(const Post& post, CallCounts& calls) const;
    Verdict discriminate_scale(const Post& post, const ScaleResponse& response, CallCounts& calls) const;
    Verdict discriminate_analysis(const Post& post, const ScaleResponse* response, const AnalysisResult& result,
                                  CallCounts& calls) const;

    /// Never throws for model or transport problems; they are encoded in
    /// FinalRecord::status and FinalRecord::failure.
    FinalRecord run(const Post& post) const;

    [[nodiscard]] const MentalScale& scale() const noexcept { return scale_; }
    [[nodiscard]] const TaskSpec& task() const noexcept { return task_; }
    [[nodiscard]] const PipelineConfig& config() const noexcept { return config_; }

  private:
    std::string ask(LlmClient& client, const std::string& prompt, int& counter) const;

    MentalScale scale_;
    TaskSpec task_;
    PipelineConfig config_;
    RoleClients clients_;
};

/// True for failure kinds that come from the transport layer.
bool is_backend_failure(const FailureInfo& failure);

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

/// Runs every post on a pool of `workers` threads; records come back in corpus
/// order. Throws BackendAbort as soon as any post hits a backend failure.
std::vector<FinalRecord> run_corpus(const Pipeline& pipeline, const Corpus& corpus, int workers,
                                    const ProgressFn& progress = {});

} // namespace maims
