#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "maims/corpus.hpp"
#include "maims/pipeline.hpp"
#include "maims/records.hpp"

namespace maims {

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    int support = 0;
};

/// Counts per (gold, predicted) pair over a fixed label order.
struct ConfusionCounts {
    std::vector<std::string> labels;
    std::map<std::pair<std::string, std::string>, int> counts;

    [[nodiscard]] int get(const std::string& gold, const std::string& pred) const;
    [[nodiscard]] int total() const;
    [[nodiscard]] int trace() const;
};

/// Support-weighted F1 over the classes present in `golds`. Precision and
/// recall are 0 when their denominator is 0.
double weighted_f1(const std::vector<std::string>& golds, const std::vector<std::string>& preds);
double accuracy(const std::vector<std::string>& golds, const std::vector<std::string>& preds);

struct ClassificationMetrics {
    std::vector<std::pair<std::string, ClassMetrics>> per_class; // in label order
    double weighted_f1 = 0.0;
    double accuracy = 0.0;
    ConfusionCounts confusion;
};

/// All metrics at once. `label_order` fixes the row/column order; labels seen
/// in the data but missing from it are appended in first-seen order.
ClassificationMetrics classification_metrics(const std::vector<std::string>& golds,
                                             const std::vector<std::string>& preds,
                                             const std::vector<std::string>& label_order = {});

struct EvalReport {
    std::string task_id;
    Mode mode = Mode::Full;
    bool include_failed = true;
    int n_records = 0;
    int n_evaluated = 0;
    int n_failed_status = 0;
    std::vector<std::pair<std::string, ClassMetrics>> per_class;
    double weighted_f1 = 0.0;
    double accuracy = 0.0;
    ConfusionCounts confusion;
    std::string config_digest;

    /// The same metrics under the opposite failed-status policy.
    struct Alternate {
        bool include_failed = false;
        int n_evaluated = 0;
        double weighted_f1 = 0.0;
        double accuracy = 0.0;
    } alternate;
};

/// Pairs each record with its post's gold label. Records with status failed
/// carry the fallback label; they are scored only when `include_failed`.
EvalReport evaluate(const std::vector<FinalRecord>& records, const Corpus& corpus, const TaskSpec& task,
                    bool include_failed, const std::string& config_digest = {});

nlohmann::json report_to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& j);

/// Aligned plain-text table, one row per report, in the given order.
std::string format_summary_table(const std::vector<EvalReport>& reports);

struct AblationRun {
    Mode mode = Mode::Full;
    std::vector<FinalRecord> records;
    EvalReport report;
};

/// Runs full, no_scale and no_discriminator (in that order) over the first `n`
/// posts with the same clients and templates.
std::vector<AblationRun> run_ablation(const Corpus& corpus, const MentalScale& scale, const TaskSpec& task,
                                      const PipelineConfig& config, const RoleClients& clients, std::size_t n,
                                      int workers, bool include_failed, const std::string& config_digest = {});

} // namespace maims
