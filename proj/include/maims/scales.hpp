#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace maims {

struct ScaleResponse;

struct AnswerOption {
    std::string code;
    std::string text;
    /// Unitless scale points; either every option of an item has one or none does.
    std::optional<double> value;

    bool operator==(const AnswerOption&) const = default;
};

struct ScaleItem {
    std::string item_id;
    std::string prompt;
    std::string criteria; // may be empty
    std::vector<AnswerOption> options;

    [[nodiscard]] const AnswerOption* find_option(const std::string& code) const;
    bool operator==(const ScaleItem&) const = default;
};

/// A blank mental scale: the questionnaire handed to the poster role.
/// Immutable after load.
struct MentalScale {
    std::string scale_id;
    std::string name;
    std::string version;
    std::string description;
    std::vector<ScaleItem> items;

    [[nodiscard]] const ScaleItem* find_item(const std::string& item_id) const;
    bool operator==(const MentalScale&) const = default;
};

struct ScoreSummary {
    double total = 0.0;
    int answered_count = 0;
};

struct ScoreRange {
    double min_total = 0.0;
    double max_total = 0.0;
};

/// Every violated invariant, one human-readable line each. Never throws.
std::vector<std::string> validate_scale(const MentalScale& scale);

/// Structural decode plus invariant check; throws MalformedScale listing all problems.
MentalScale scale_from_json(const nlohmann::json& j);
nlohmann::json scale_to_json(const MentalScale& scale);

MentalScale load_scale(const std::string& path);
void save_scale(const MentalScale& scale, const std::string& path);

/// Sum of selected option values over mentioned items. Empty when any selected
/// option is unvalued.
std::optional<ScoreSummary> score_scale(const ScaleResponse& response, const MentalScale& scale);

/// Attainable total range when every item is valued; empty otherwise.
std::optional<ScoreRange> score_range(const MentalScale& scale);

} // namespace maims
