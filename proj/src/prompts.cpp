#include <sstream>

#include "maims/pipeline.hpp"
#include "maims/text.hpp"

namespace maims {

const std::string& scale_answer_layout() {
    static const std::string layout =
        "Write your answers inside a fenced block that starts with ```scale and ends with ```.\n"
        "Write exactly one line per item, in this form:\n"
        "<item_id> | <mention> | <option_code> | evidence: \"<verbatim quote>\"; \"<another quote>\" | reason: "
        "<why>\n"
        "<mention> is one of direct_mention, indirect_mention, no_mention.\n"
        "When <mention> is no_mention, write - for both the option code and the evidence.";
    return layout;
}

std::string render_scale_items(const MentalScale& scale) {
    std::ostringstream out;
    for (std::size_t i = 0; i < scale.items.size(); ++i) {
        const auto& item = scale.items[i];
        if (i > 0) out << '\n';
        out << "Item " << item.item_id << ": " << item.prompt << '\n';
        if (!text::trim(item.criteria).empty()) out << "Criteria: " << item.criteria << '\n';
        out << "Options:";
        for (const auto& o : item.options) out << "\n  [" << o.code << "] " << o.text;
        out << '\n';
    }
    return out.str();
}

namespace {

void render_item_answer(std::ostringstream& out, const ItemResponse& r, const ScaleItem* item) {
    out << "Item " << r.item_id;
    if (item != nullptr) out << " (" << item->prompt << ")";
    out << ": " << to_token(r.mention);
    if (r.selected_option) {
        out << ", answered [" << *r.selected_option << "]";
        if (item != nullptr) {
            if (const auto* o = item->find_option(*r.selected_option)) out << " " << o->text;
        }
    }
    out << '\n';
    if (!r.evidence_quotes.empty()) {
        out << "  Evidence:";
        for (std::size_t i = 0; i < r.evidence_quotes.size(); ++i) {
            bool ok = i < r.evidence_verified.size() && r.evidence_verified[i];
            out << (i == 0 ? " " : "; ") << '"' << r.evidence_quotes[i] << '"'
                << (ok ? " (found in post)" : " (NOT found in post)");
        }
        out << '\n';
    }
    if (!text::trim(r.rationale).empty()) out << "  Reason: " << text::trim(r.rationale) << '\n';
}

std::string critique_section(const std::optional<std::string>& critique) {
    if (!critique || text::trim(*critique).empty()) return {};
    return "\n\nREVIEWER FEEDBACK\n" + text::trim(*critique) + "\nRevise your answer to address this feedback.";
}

std::string labels_list(const TaskSpec& task) {
    std::string out;
    for (std::size_t i = 0; i < task.labels.size(); ++i) {
        if (i > 0) out += ", ";
        out += task.labels[i];
    }
    return out;
}

// Answered items in full, then a one-line list of items the post does not touch.
std::string completed_scale_section(const ScaleResponse* response, const MentalScale* scale) {
    if (response == nullptr) return {};
    std::ostringstream out;
    out << "\nCOMPLETED SCALE\n";
    if (scale != nullptr && !scale->name.empty()) out << "The author's answers to \"" << scale->name << "\":\n";
    std::vector<std::string> unmentioned;
    for (const auto& r : response->items) {
        if (r.mention == MentionCategory::NoMention) {
            unmentioned.push_back(r.item_id);
            continue;
        }
        render_item_answer(out, r, scale != nullptr ? scale->find_item(r.item_id) : nullptr);
    }
    if (unmentioned.size() == response->items.size()) out << "No item of the questionnaire is mentioned in the post.\n";
    else if (!unmentioned.empty()) {
        out << "Not mentioned in the post: items ";
        for (std::size_t i = 0; i < unmentioned.size(); ++i) out << (i ? ", " : "") << unmentioned[i];
        out << ".\n";
    }
    return out.str();
}

} // namespace

std::string render_completed_scale(const ScaleResponse& response, const MentalScale& scale) {
    std::ostringstream out;
    for (const auto& r : response.items) render_item_answer(out, r, scale.find_item(r.item_id));
    return out.str();
}

std::string build_step1_prompt(const Post& post, const MentalScale& scale, const std::optional<std::string>& critique,
                               const PromptTemplates& templates) {
    return render_template(templates.step1, {{"post", post.text},
                                             {"scale_name", scale.name.empty() ? scale.scale_id : scale.name},
                                             {"scale_items", render_scale_items(scale)},
                                             {"layout", scale_answer_layout()},
                                             {"critique", critique_section(critique)}});
}

std::string build_step2_prompt(const Post& post, const ScaleResponse* response, const MentalScale* scale,
                               const TaskSpec& task, const std::optional<std::string>& critique,
                               const PromptTemplates& templates) {
    return render_template(templates.step2, {{"question", task.question},
                                             {"labels", labels_list(task)},
                                             {"post", post.text},
                                             {"completed_scale_section", completed_scale_section(response, scale)},
                                             {"critique", critique_section(critique)}});
}

std::string build_scale_discriminator_prompt(const Post& post, const MentalScale& scale,
                                             const ScaleResponse& response, const PromptTemplates& templates) {
    std::ostringstream failures;
    for (const auto& r : response.items) {
        for (std::size_t i = 0; i < r.evidence_quotes.size(); ++i) {
            if (i >= r.evidence_verified.size() || !r.evidence_verified[i])
                failures << "- item " << r.item_id << ": \"" << r.evidence_quotes[i] << "\" does not occur in the post\n";
        }
    }
    std::string failure_text = failures.str();
    if (failure_text.empty()) failure_text = "Every quoted piece of evidence occurs verbatim in the post.\n";
    else failure_text = "These quotes were not found in the post:\n" + failure_text;

    return render_template(templates.scale_discriminator,
                           {{"post", post.text},
                            {"scale_name", scale.name.empty() ? scale.scale_id : scale.name},
                            {"scale_items", render_scale_items(scale)},
                            {"completed_scale", render_completed_scale(response, scale)},
                            {"evidence_failures", failure_text}});
}

std::string build_analysis_discriminator_prompt(const Post& post, const ScaleResponse* response,
                                                const MentalScale* scale, const TaskSpec& task,
                                                const AnalysisResult& result, const PromptTemplates& templates) {
    return render_template(templates.analysis_discriminator,
                           {{"question", task.question},
                            {"labels", labels_list(task)},
                            {"post", post.text},
                            {"completed_scale_section", completed_scale_section(response, scale)},
                            {"label", result.label},
                            {"explanation", result.explanation}});
}

} // namespace maims
