#include "maims/corpus.hpp"

#include <algorithm>
#include <filesystem>
#include <unordered_set>

#include "maims/error.hpp"
#include "maims/text.hpp"

namespace maims {

using nlohmann::json;

std::optional<std::string> TaskSpec::canonical_label(const std::string& label) const {
    const std::string wanted = text::trim(label);
    for (const auto& l : labels) {
        if (text::iequals(l, wanted)) return l;
    }
    return std::nullopt;
}

const std::string& TaskSpec::fallback_label() const {
    for (const auto& l : labels) {
        if (!text::iequals(l, positive_label)) return l;
    }
    return positive_label;
}

const Post* Corpus::find(const std::string& post_id) const {
    auto it = std::find_if(posts.begin(), posts.end(), [&](const Post& p) { return p.post_id == post_id; });
    return it == posts.end() ? nullptr : &*it;
}

bool Corpus::fully_labeled() const {
    return std::all_of(posts.begin(), posts.end(), [](const Post& p) { return p.gold_label.has_value(); });
}

std::vector<std::string> validate_task(const TaskSpec& task) {
    std::vector<std::string> out;
    if (text::trim(task.task_id).empty()) out.emplace_back("task_id is empty");
    if (text::trim(task.question).empty()) out.emplace_back("question is empty");
    if (text::trim(task.scale_id).empty()) out.emplace_back("scale_id is empty");
    if (task.labels.size() < 2) out.emplace_back("fewer than 2 labels");
    std::unordered_set<std::string> seen;
    for (const auto& l : task.labels) {
        if (text::trim(l).empty()) out.emplace_back("empty label");
        else if (!seen.insert(text::to_lower(l)).second) out.emplace_back("duplicate label: " + l);
    }
    if (!task.canonical_label(task.positive_label))
        out.emplace_back("positive_label '" + task.positive_label + "' is not one of labels");
    return out;
}

TaskSpec task_from_json(const json& j) {
    std::vector<std::string> problems;
    if (!j.is_object()) throw MalformedTask({"task document must be a JSON object"});
    TaskSpec t;
    auto str = [&](const char* key) -> std::string {
        auto it = j.find(key);
        if (it == j.end() || !it->is_string()) {
            problems.push_back(std::string("missing or non-string ") + key);
            return {};
        }
        return it->get<std::string>();
    };
    t.task_id = str("task_id");
    t.question = str("question");
    t.positive_label = str("positive_label");
    t.scale_id = str("scale_id");
    auto labels = j.find("labels");
    if (labels == j.end() || !labels->is_array()) {
        problems.emplace_back("labels must be an array of strings");
    } else {
        for (const auto& l : *labels) {
            if (l.is_string()) t.labels.push_back(l.get<std::string>());
            else problems.emplace_back("labels must be an array of strings");
        }
    }
    if (problems.empty()) problems = validate_task(t);
    if (!problems.empty()) throw MalformedTask(std::move(problems));
    t.positive_label = *t.canonical_label(t.positive_label);
    return t;
}

json task_to_json(const TaskSpec& task) {
    return {{"task_id", task.task_id},
            {"question", task.question},
            {"labels", task.labels},
            {"positive_label", task.positive_label},
            {"scale_id", task.scale_id}};
}

TaskSpec load_task(const std::string& path) {
    if (!std::filesystem::exists(path)) throw FileNotFound(path);
    try {
        return task_from_json(json::parse(text::read_file(path)));
    } catch (const json::parse_error& e) {
        throw MalformedTask({std::string("invalid JSON: ") + e.what()});
    }
}

Corpus parse_corpus(const std::string& jsonl, const std::string& corpus_id, const TaskSpec* task,
                    bool require_labels) {
    Corpus corpus;
    corpus.corpus_id = corpus_id;
    std::unordered_set<std::string> ids;
    std::size_t line_no = 0;
    for (const auto& line : text::split_lines(jsonl)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error&) {
            throw MalformedRecord(line_no, "invalid JSON");
        }
        if (!j.is_object()) throw MalformedRecord(line_no, "record is not an object");

        Post p;
        auto id = j.find("post_id");
        if (id == j.end() || id->is_null()) throw MalformedRecord(line_no, "missing post_id");
        if (!id->is_string()) throw MalformedRecord(line_no, "post_id must be a string");
        p.post_id = id->get<std::string>();
        if (text::trim(p.post_id).empty()) throw MalformedRecord(line_no, "empty post_id");

        auto body = j.find("text");
        if (body == j.end() || body->is_null()) throw MalformedRecord(line_no, "missing text");
        if (!body->is_string()) throw MalformedRecord(line_no, "text must be a string");
        p.text = body->get<std::string>();
        if (text::trim(p.text).empty()) throw MalformedRecord(line_no, "empty text");

        if (auto lab = j.find("label"); lab != j.end() && !lab->is_null()) {
            if (!lab->is_string()) throw MalformedRecord(line_no, "label must be a string");
            std::string raw = lab->get<std::string>();
            if (task != nullptr) {
                auto canon = task->canonical_label(raw);
                if (!canon) throw MalformedRecord(line_no, "label '" + raw + "' not in task labels");
                p.gold_label = *canon;
            } else {
                p.gold_label = raw;
            }
        }
        if (!ids.insert(p.post_id).second) throw DuplicateId(p.post_id);
        if (require_labels && !p.gold_label) throw MissingLabel(p.post_id);
        corpus.posts.push_back(std::move(p));
    }
    return corpus;
}

Corpus load_corpus(const std::string& path, const TaskSpec* task, bool require_labels) {
    if (!std::filesystem::exists(path)) throw FileNotFound(path);
    return parse_corpus(text::read_file(path), std::filesystem::path(path).stem().string(), task, require_labels);
}

std::string corpus_to_jsonl(const Corpus& corpus) {
    std::string out;
    for (const auto& p : corpus.posts) {
        json j = {{"post_id", p.post_id}, {"text", p.text}};
        if (p.gold_label) j["label"] = *p.gold_label;
        out += j.dump() + "\n";
    }
    return out;
}

Corpus take_prefix(const Corpus& corpus, std::size_t n) {
    Corpus out;
    out.corpus_id = corpus.corpus_id;
    const auto count = std::min(n, corpus.posts.size());
    out.posts.assign(corpus.posts.begin(), corpus.posts.begin() + static_cast<std::ptrdiff_t>(count));
    return out;
}

} // namespace maims
