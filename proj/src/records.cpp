#include "maims/records.hpp"

#include <algorithm>
#include <array>
#include <sstream>
#include <utility>

#include "maims/error.hpp"
#include "maims/text.hpp"

namespace maims {

using nlohmann::json;

namespace {

// Accepted spellings for each mention category, compared after lowercasing and
// mapping spaces/hyphens to underscores.
const std::array<std::pair<std::string_view, MentionCategory>, 12> kMentionAliases{{
    {"direct_mention", MentionCategory::DirectMention},
    {"directly_mention", MentionCategory::DirectMention},
    {"directly_mentioned", MentionCategory::DirectMention},
    {"direct", MentionCategory::DirectMention},
    {"indirect_mention", MentionCategory::IndirectMention},
    {"indirectly_mention", MentionCategory::IndirectMention},
    {"indirectly_mentioned", MentionCategory::IndirectMention},
    {"indirect", MentionCategory::IndirectMention},
    {"no_mention", MentionCategory::NoMention},
    {"not_mention", MentionCategory::NoMention},
    {"not_mentioned", MentionCategory::NoMention},
    {"none", MentionCategory::NoMention},
}};

} // namespace

std::string_view to_token(MentionCategory m) {
    switch (m) {
    case MentionCategory::DirectMention: return "direct_mention";
    case MentionCategory::IndirectMention: return "indirect_mention";
    case MentionCategory::NoMention: return "no_mention";
    }
    return "no_mention";
}

std::optional<MentionCategory> mention_from_token(std::string_view token) {
    std::string t = text::to_lower(text::trim(token));
    // strip decoration such as quotes or markdown emphasis
    t.erase(std::remove_if(t.begin(), t.end(), [](char c) { return c == '\'' || c == '"' || c == '*' || c == '`'; }),
            t.end());
    std::replace(t.begin(), t.end(), ' ', '_');
    std::replace(t.begin(), t.end(), '-', '_');
    for (const auto& [alias, cat] : kMentionAliases) {
        if (t == alias) return cat;
    }
    return std::nullopt;
}

std::string_view to_token(Stage s) { return s == Stage::Scale ? "scale" : "analysis"; }

std::string_view to_token(Mode m) {
    switch (m) {
    case Mode::Full: return "full";
    case Mode::NoScale: return "no_scale";
    case Mode::NoDiscriminator: return "no_discriminator";
    }
    return "full";
}

std::optional<Mode> mode_from_token(std::string_view token) {
    for (Mode m : {Mode::Full, Mode::NoScale, Mode::NoDiscriminator}) {
        if (token == to_token(m)) return m;
    }
    return std::nullopt;
}

std::string_view to_token(Status s) {
    switch (s) {
    case Status::Accepted: return "accepted";
    case Status::AcceptedAfterRetry: return "accepted_after_retry";
    case Status::ForcedAfterMaxRetries: return "forced_after_max_retries";
    case Status::Failed: return "failed";
    }
    return "failed";
}

std::optional<Status> status_from_token(std::string_view token) {
    for (Status s : {Status::Accepted, Status::AcceptedAfterRetry, Status::ForcedAfterMaxRetries, Status::Failed}) {
        if (token == to_token(s)) return s;
    }
    return std::nullopt;
}

const ItemResponse* ScaleResponse::find_item(const std::string& item_id) const {
    auto it = std::find_if(items.begin(), items.end(), [&](const ItemResponse& r) { return r.item_id == item_id; });
    return it == items.end() ? nullptr : &*it;
}

json to_json(const ItemResponse& r) {
    json quotes = json::array();
    for (std::size_t i = 0; i < r.evidence_quotes.size(); ++i) {
        bool verified = i < r.evidence_verified.size() && r.evidence_verified[i];
        quotes.push_back({{"quote", r.evidence_quotes[i]}, {"verified", verified}});
    }
    return {{"item_id", r.item_id},
            {"mention", std::string(to_token(r.mention))},
            {"selected_option", r.selected_option ? json(*r.selected_option) : json(nullptr)},
            {"rationale", r.rationale},
            {"evidence", std::move(quotes)}};
}

json to_json(const Verdict& v) {
    json issues = json::array();
    for (const auto& i : v.item_issues) issues.push_back({{"item_id", i.item_id}, {"issue", i.issue}});
    return {{"stage", std::string(to_token(v.stage))},
            {"accepted", v.accepted},
            {"critique", v.critique},
            {"item_issues", std::move(issues)}};
}

json to_json(const ScaleResponse& r) {
    json items = json::array();
    for (const auto& i : r.items) items.push_back(to_json(i));
    json verdicts = json::array();
    for (const auto& v : r.verdict_history) verdicts.push_back(to_json(v));
    return {{"scale_id", r.scale_id},
            {"post_id", r.post_id},
            {"attempts", r.attempts},
            {"items", std::move(items)},
            {"verdict_history", std::move(verdicts)}};
}

json to_json(const FinalRecord& r) {
    json verdicts = json::array();
    for (const auto& v : r.verdicts) verdicts.push_back(to_json(v));
    json failure = nullptr;
    if (r.failure) failure = {{"kind", r.failure->kind}, {"message", r.failure->message}};
    return {{"trace_schema_version", kTraceSchemaVersion},
            {"post_id", r.post_id},
            {"post_text", r.post_text},
            {"mode", std::string(to_token(r.mode))},
            {"status", std::string(to_token(r.status))},
            {"scale_response", r.scale_response ? to_json(*r.scale_response) : json(nullptr)},
            {"analysis",
             {{"label", r.analysis.label},
              {"explanation", r.analysis.explanation},
              {"cited_items", r.analysis.cited_items}}},
            {"analysis_attempts", r.analysis_attempts},
            {"verdicts", std::move(verdicts)},
            {"calls",
             {{"poster", r.calls.poster}, {"analysis", r.calls.analysis}, {"discriminator", r.calls.discriminator}}},
            {"failure", std::move(failure)},
            {"meta", {{"wall_seconds", r.wall_seconds}}}};
}

namespace {

ItemResponse item_from_json(const json& j) {
    ItemResponse r;
    r.item_id = j.at("item_id").get<std::string>();
    auto m = mention_from_token(j.at("mention").get<std::string>());
    if (!m) throw Error("MalformedTrace", "unknown mention token in trace: " + j.at("mention").dump());
    r.mention = *m;
    if (!j.at("selected_option").is_null()) r.selected_option = j.at("selected_option").get<std::string>();
    r.rationale = j.value("rationale", "");
    for (const auto& q : j.at("evidence")) {
        r.evidence_quotes.push_back(q.at("quote").get<std::string>());
        r.evidence_verified.push_back(q.at("verified").get<bool>());
    }
    return r;
}

} // namespace

Verdict verdict_from_json(const json& j) {
    Verdict v;
    v.stage = j.at("stage").get<std::string>() == "scale" ? Stage::Scale : Stage::Analysis;
    v.accepted = j.at("accepted").get<bool>();
    v.critique = j.value("critique", "");
    for (const auto& i : j.value("item_issues", json::array()))
        v.item_issues.push_back({i.at("item_id").get<std::string>(), i.at("issue").get<std::string>()});
    return v;
}

ScaleResponse scale_response_from_json(const json& j) {
    ScaleResponse r;
    r.scale_id = j.at("scale_id").get<std::string>();
    r.post_id = j.at("post_id").get<std::string>();
    r.attempts = j.at("attempts").get<int>();
    for (const auto& i : j.at("items")) r.items.push_back(item_from_json(i));
    for (const auto& v : j.at("verdict_history")) r.verdict_history.push_back(verdict_from_json(v));
    return r;
}

FinalRecord record_from_json(const json& j) {
    const int version = j.at("trace_schema_version").get<int>();
    if (version != kTraceSchemaVersion)
        throw Error("MalformedTrace", "unsupported trace_schema_version " + std::to_string(version));
    FinalRecord r;
    r.post_id = j.at("post_id").get<std::string>();
    r.post_text = j.value("post_text", "");
    auto mode = mode_from_token(j.at("mode").get<std::string>());
    auto status = status_from_token(j.at("status").get<std::string>());
    if (!mode || !status) throw Error("MalformedTrace", "bad mode or status for post " + r.post_id);
    r.mode = *mode;
    r.status = *status;
    if (!j.at("scale_response").is_null()) r.scale_response = scale_response_from_json(j.at("scale_response"));
    const auto& a = j.at("analysis");
    r.analysis.label = a.at("label").get<std::string>();
    r.analysis.explanation = a.value("explanation", "");
    r.analysis.cited_items = a.value("cited_items", std::vector<std::string>{});
    r.analysis_attempts = j.value("analysis_attempts", 0);
    for (const auto& v : j.at("verdicts")) r.verdicts.push_back(verdict_from_json(v));
    if (auto c = j.find("calls"); c != j.end()) {
        r.calls.poster = c->value("poster", 0);
        r.calls.analysis = c->value("analysis", 0);
        r.calls.discriminator = c->value("discriminator", 0);
    }
    if (auto f = j.find("failure"); f != j.end() && !f->is_null())
        r.failure = FailureInfo{f->at("kind").get<std::string>(), f->at("message").get<std::string>()};
    if (auto m = j.find("meta"); m != j.end()) r.wall_seconds = m->value("wall_seconds", 0.0);
    return r;
}

std::string traces_to_jsonl(const std::vector<FinalRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        out += to_json(r).dump();
        out += '\n';
    }
    return out;
}

void write_traces(const std::vector<FinalRecord>& records, const std::string& path) {
    text::write_file_atomic(path, traces_to_jsonl(records));
}

std::vector<FinalRecord> read_traces(const std::string& path) {
    std::vector<FinalRecord> out;
    std::size_t line_no = 0;
    for (const auto& line : text::split_lines(text::read_file(path))) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        try {
            out.push_back(record_from_json(json::parse(line)));
        } catch (const json::exception& e) {
            throw MalformedRecord(line_no, e.what());
        }
    }
    return out;
}

} // namespace maims
