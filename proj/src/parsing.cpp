#include <algorithm>
#include <cctype>
#include <regex>
#include <set>
#include <unordered_map>

#include "maims/pipeline.hpp"
#include "maims/text.hpp"

namespace maims {

namespace {

bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

// Leading list markers and wrapping backticks are common model decoration.
std::string strip_line_decoration(std::string line) {
    line = text::trim(line);
    while (!line.empty() && (line.front() == '-' || line.front() == '*' || line.front() == '`' || line.front() == '>'))
        line = text::trim(line.substr(1));
    while (!line.empty() && line.back() == '`') line.pop_back();
    return text::trim(line);
}

// "Item 13", "Q13", "#13", "'13'", "13." -> "13"
std::string normalize_item_id(std::string raw) {
    std::string s = text::trim(raw);
    s.erase(std::remove_if(s.begin(), s.end(), [](char c) { return c == '\'' || c == '"' || c == '*' || c == '#'; }),
            s.end());
    s = text::trim(s);
    for (std::string_view prefix : {"item", "question", "q"}) {
        if (text::istarts_with(s, prefix) && s.size() > prefix.size() &&
            !std::isalpha(static_cast<unsigned char>(s[prefix.size()]))) {
            s = text::trim(s.substr(prefix.size()));
            break;
        }
    }
    while (!s.empty() && (s.back() == '.' || s.back() == ':' || s.back() == ')')) s.pop_back();
    return text::trim(s);
}

// Drops trailing sentence punctuation so "usual." matches "usual".
std::string normalize_option_text(std::string_view s) {
    std::string n = text::normalize_for_match(s);
    while (!n.empty() && (n.back() == '.' || n.back() == ',' || n.back() == ';' || n.back() == '!' || n.back() == '"' ||
                          n.back() == '\''))
        n.pop_back();
    while (!n.empty() && (n.front() == '"' || n.front() == '\'')) n.erase(n.begin());
    return n;
}

bool is_dash(const std::string& s) {
    std::string t = text::to_lower(text::trim(s));
    return t.empty() || t == "-" || t == "--" || t == "none" || t == "n/a" || t == "na" || t == "\xE2\x80\x94";
}

// Resolves an option field by code, bracketed code, exact text, or leading text.
std::optional<std::string> resolve_option(const std::string& field, const ScaleItem& item) {
    std::string f = text::trim(field);
    if (const auto* o = item.find_option(f)) return o->code;
    if (f.size() >= 2 && ((f.front() == '[' && f.back() == ']') || (f.front() == '(' && f.back() == ')'))) {
        if (const auto* o = item.find_option(text::trim(f.substr(1, f.size() - 2)))) return o->code;
    }
    // "[2] I feel sad much of the time"
    if (!f.empty() && (f.front() == '[' || f.front() == '(')) {
        auto close = f.find(f.front() == '[' ? ']' : ')');
        if (close != std::string::npos) {
            if (const auto* o = item.find_option(text::trim(f.substr(1, close - 1)))) return o->code;
        }
    }
    for (const auto& o : item.options) {
        if (text::iequals(text::trim(o.code), f)) return o.code;
    }
    const std::string nf = normalize_option_text(f);
    for (const auto& o : item.options) {
        if (normalize_option_text(o.text) == nf) return o.code;
    }
    // option text followed by commentary, as in the record layout "<option text>. <rationale>"
    const AnswerOption* best = nullptr;
    std::size_t best_len = 0;
    for (const auto& o : item.options) {
        std::string no = normalize_option_text(o.text);
        if (no.empty() || nf.size() <= no.size() || nf.compare(0, no.size(), no) != 0) continue;
        if (is_alnum(nf[no.size()])) continue;
        if (no.size() > best_len) {
            best = &o;
            best_len = no.size();
        }
    }
    if (best != nullptr) return best->code;
    return std::nullopt;
}

std::vector<std::string> extract_quotes(const std::string& field) {
    static const std::regex quoted(R"re("([^"]*)"|\xE2\x80\x9C(.*?)\xE2\x80\x9D)re");
    std::vector<std::string> quotes;
    for (auto it = std::sregex_iterator(field.begin(), field.end(), quoted); it != std::sregex_iterator(); ++it) {
        std::string q = (*it)[1].matched ? (*it)[1].str() : (*it)[2].str();
        if (!text::trim(q).empty()) quotes.push_back(q);
    }
    if (quotes.empty() && !is_dash(field)) quotes.push_back(text::trim(field));
    return quotes;
}

// Case-insensitive search for "<sep> <key>:" inside `s`; returns the offset of `key`.
std::size_t find_field(const std::string& s, std::string_view key) {
    const std::string lower = text::to_lower(s);
    std::size_t pos = 0;
    while ((pos = lower.find(key, pos)) != std::string::npos) {
        std::size_t after = pos + key.size();
        std::size_t k = after;
        while (k < lower.size() && lower[k] == ' ') ++k;
        bool colon = k < lower.size() && lower[k] == ':';
        bool boundary = pos == 0 || !is_alnum(lower[pos - 1]);
        if (colon && boundary) return pos;
        pos = after;
    }
    return std::string::npos;
}

std::string after_colon(const std::string& s, std::size_t key_pos) {
    auto colon = s.find(':', key_pos);
    return text::trim(s.substr(colon + 1));
}

} // namespace

std::string ParseFailure::describe() const {
    std::string out;
    auto add = [&](const std::string& head, const std::vector<std::string>& v) {
        if (v.empty()) return;
        out += head;
        for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + v[i];
        out += '\n';
    };
    add("- missing items: ", missing_items);
    add("- unknown or missing option codes: ", unknown_options);
    add("- unknown mention categories: ", unknown_mentions);
    return out;
}

bool evidence_matches(const std::string& quote, const std::string& post_text) {
    const std::string q = text::normalize_for_match(quote);
    if (q.empty()) return false;
    return text::normalize_for_match(post_text).find(q) != std::string::npos;
}

ScaleResponse verify_evidence(ScaleResponse response, const Post& post) {
    const std::string haystack = text::normalize_for_match(post.text);
    for (auto& item : response.items) {
        item.evidence_verified.assign(item.evidence_quotes.size(), false);
        for (std::size_t i = 0; i < item.evidence_quotes.size(); ++i) {
            const std::string q = text::normalize_for_match(item.evidence_quotes[i]);
            item.evidence_verified[i] = !q.empty() && haystack.find(q) != std::string::npos;
        }
    }
    return response;
}

ScaleParseResult parse_scale_response(const std::string& raw, const MentalScale& scale, const Post& post) {
    std::unordered_map<std::string, ItemResponse> found;
    ParseFailure failure;

    for (const auto& raw_line : text::split_lines(raw)) {
        std::string line = strip_line_decoration(raw_line);
        if (line.find('|') == std::string::npos) continue;
        if (!line.empty() && line.front() == '|') line = text::trim(line.substr(1));
        if (!line.empty() && line.back() == '|') line = text::trim(line.substr(0, line.size() - 1));

        auto fields = text::split(line, '|');
        if (fields.size() < 2) continue;
        const std::string item_id = normalize_item_id(fields[0]);
        const ScaleItem* item = scale.find_item(item_id);
        if (item == nullptr || found.count(item_id)) continue; // headers, stray rows, repeats

        ItemResponse r;
        r.item_id = item_id;
        auto mention = mention_from_token(fields[1]);
        if (!mention) {
            failure.unknown_mentions.push_back("item " + item_id + ": " + text::trim(fields[1]));
            continue;
        }
        r.mention = *mention;

        std::string option_field = fields.size() > 2 ? text::trim(fields[2]) : std::string{};
        std::string rest;
        for (std::size_t i = 3; i < fields.size(); ++i) rest += (i > 3 ? "|" : "") + fields[i];

        std::string evidence_part;
        if (auto rpos = find_field(rest, "reason"); rpos != std::string::npos) {
            r.rationale = after_colon(rest, rpos);
            evidence_part = rest.substr(0, rpos);
        } else {
            evidence_part = rest;
        }
        if (auto epos = find_field(evidence_part, "evidence"); epos != std::string::npos)
            evidence_part = after_colon(evidence_part, epos);
        evidence_part = text::trim(evidence_part);
        while (!evidence_part.empty() && evidence_part.back() == '|') evidence_part.pop_back();

        if (r.mention != MentionCategory::NoMention) {
            if (is_dash(option_field)) {
                failure.unknown_options.push_back("item " + item_id + ": option missing");
                continue;
            }
            auto code = resolve_option(option_field, *item);
            if (!code) {
                failure.unknown_options.push_back("item " + item_id + ": " + option_field);
                continue;
            }
            r.selected_option = *code;
            r.evidence_quotes = extract_quotes(evidence_part);
        }
        found.emplace(item_id, std::move(r));
    }

    ScaleResponse response;
    response.scale_id = scale.scale_id;
    response.post_id = post.post_id;
    for (const auto& item : scale.items) {
        auto it = found.find(item.item_id);
        if (it != found.end()) {
            response.items.push_back(std::move(it->second));
            continue;
        }
        bool reported = false;
        const std::string prefix = "item " + item.item_id + ":";
        for (const auto* list : {&failure.unknown_options, &failure.unknown_mentions}) {
            for (const auto& s : *list) reported = reported || s.rfind(prefix, 0) == 0;
        }
        if (!reported) failure.missing_items.push_back(item.item_id);
    }

    ScaleParseResult result;
    if (!failure.empty()) {
        result.failure = std::move(failure);
        return result;
    }
    result.response = verify_evidence(std::move(response), post);
    return result;
}

Verdict parse_verdict(const std::string& raw, Stage stage, const MentalScale* scale) {
    Verdict v;
    v.stage = stage;

    auto lines = text::split_lines(raw);
    std::size_t first = 0;
    while (first < lines.size() && text::trim(lines[first]).empty()) ++first;

    auto strip_head = [](std::string s) {
        s = text::trim(s);
        while (!s.empty() && !std::isalpha(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
        for (std::string_view lead : {"verdict", "decision", "final verdict"}) {
            if (text::istarts_with(s, lead)) {
                std::string rest = text::trim(s.substr(lead.size()));
                if (!rest.empty() && rest.front() == ':') return text::trim(rest.substr(1));
            }
        }
        return s;
    };

    std::string head = first < lines.size() ? strip_head(lines[first]) : std::string{};
    std::string keyword;
    for (std::string_view k : {"accept", "reject"}) {
        if (text::istarts_with(head, k) && (head.size() == k.size() || !is_alnum(head[k.size()]) ||
                                            text::istarts_with(head, std::string(k) + "ed"))) {
            keyword = std::string(k);
        }
    }
    if (keyword.empty()) {
        v.accepted = false;
        v.critique = "unparseable verdict";
        return v;
    }

    std::size_t skip = keyword.size();
    if (text::istarts_with(head, keyword + "ed")) skip += 2;
    std::string rest = head.substr(skip);
    while (!rest.empty() && (rest.front() == ':' || rest.front() == '*' || rest.front() == '.' || rest.front() == '-' ||
                             std::isspace(static_cast<unsigned char>(rest.front()))))
        rest.erase(rest.begin());
    std::string critique = rest;
    for (std::size_t i = first + 1; i < lines.size(); ++i) {
        if (!critique.empty() || !text::trim(lines[i]).empty()) critique += (critique.empty() ? "" : "\n") + lines[i];
    }
    v.critique = text::trim(critique);
    v.accepted = keyword == "accept";

    if (!v.accepted) {
        if (v.critique.empty()) v.critique = "rejected without critique";
        if (stage == Stage::Scale) {
            static const std::regex issue_re(R"(^\s*(?:[-*]\s*)?item\s+#?([A-Za-z0-9_]+)\b[.:]?\s*(?:[:\-]\s*)?(\S.*)?$)",
                                             std::regex::icase);
            for (const auto& line : text::split_lines(v.critique)) {
                for (const auto& part : text::split(line, ';')) {
                    std::smatch m;
                    if (!std::regex_match(part, m, issue_re)) continue;
                    std::string id = m[1].str();
                    if (scale != nullptr && scale->find_item(id) == nullptr) continue;
                    v.item_issues.push_back({id, text::trim(m[2].str())});
                }
            }
        }
    }
    return v;
}

namespace {

bool is_decoration(char c) {
    return c == '*' || c == '"' || c == '\'' || c == '[' || c == '(' || c == '`' || c == '_' || c == '<' ||
           std::isspace(static_cast<unsigned char>(c));
}

bool is_trailing_punct(char c) {
    return c == '*' || c == '"' || c == '\'' || c == ']' || c == ')' || c == '`' || c == '_' || c == '>' || c == '.' ||
           c == ',' || c == ';' || c == ':' || c == '-' || c == '!' || std::isspace(static_cast<unsigned char>(c));
}

// Labels sorted longest first so that "Not depressed" wins over "Not".
std::vector<std::string> labels_by_length(const TaskSpec& task) {
    std::vector<std::string> out = task.labels;
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.size() > b.size(); });
    return out;
}

bool word_at(const std::string& lower, std::size_t pos, const std::string& word) {
    if (lower.compare(pos, word.size(), word) != 0) return false;
    bool left = pos == 0 || !is_alnum(lower[pos - 1]);
    std::size_t end = pos + word.size();
    bool right = end >= lower.size() || !is_alnum(lower[end]);
    return left && right;
}

} // namespace

LabelParseResult parse_label(const std::string& raw, const TaskSpec& task) {
    LabelParseResult result;
    const std::string lower = text::to_lower(raw);
    const auto labels = labels_by_length(task);

    std::size_t pos = 0;
    while ((pos = lower.find("answer", pos)) != std::string::npos) {
        std::size_t k = pos + 6;
        bool boundary = pos == 0 || !is_alnum(lower[pos - 1]);
        while (k < lower.size() && (lower[k] == ' ' || lower[k] == '*')) ++k;
        if (!boundary || k >= lower.size() || lower[k] != ':') {
            pos += 6;
            continue;
        }
        ++k;
        while (k < lower.size() && is_decoration(lower[k])) ++k;
        for (const auto& label : labels) {
            const std::string ll = text::to_lower(label);
            if (!word_at(lower, k, ll)) continue;
            std::size_t e = k + ll.size();
            while (e < raw.size() && is_trailing_punct(raw[e])) ++e;
            result.label = label;
            result.explanation = text::trim(raw.substr(e));
            return result;
        }
        pos = k;
    }

    // No usable marker: accept the text only if exactly one label is mentioned.
    std::set<std::string> mentioned;
    for (const auto& label : labels) {
        const std::string ll = text::to_lower(label);
        for (std::size_t p = lower.find(ll); p != std::string::npos; p = lower.find(ll, p + 1)) {
            if (word_at(lower, p, ll)) {
                mentioned.insert(label);
                break;
            }
        }
    }
    if (mentioned.size() == 1) {
        result.label = *mentioned.begin();
        result.explanation = text::trim(raw);
        return result;
    }
    result.problem = mentioned.empty() ? "no label found" : "more than one label mentioned";
    return result;
}

std::vector<std::string> cited_items(const std::string& explanation, const ScaleResponse& response) {
    static const std::regex ref_re(
        R"(\b(?:items?|questions?|q)\s*#?\s*([A-Za-z]?\d+[A-Za-z]?(?:\s*(?:,|and|&|/|or)\s*#?[A-Za-z]?\d+[A-Za-z]?)*))",
        std::regex::icase);
    static const std::regex id_re(R"([A-Za-z]?\d+[A-Za-z]?)");
    std::vector<std::string> out;
    for (auto it = std::sregex_iterator(explanation.begin(), explanation.end(), ref_re); it != std::sregex_iterator();
         ++it) {
        const std::string list = (*it)[1].str();
        for (auto jt = std::sregex_iterator(list.begin(), list.end(), id_re); jt != std::sregex_iterator(); ++jt) {
            std::string id = jt->str();
            if (response.find_item(id) != nullptr && std::find(out.begin(), out.end(), id) == out.end())
                out.push_back(id);
        }
    }
    return out;
}

} // namespace maims
