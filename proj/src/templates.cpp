#include "maims/templates.hpp"

#include <array>
#include <filesystem>
#include <utility>

#include "maims/error.hpp"
#include "maims/text.hpp"

namespace maims {

namespace fs = std::filesystem;

namespace {

constexpr const char* kStep1 = R"(You are the author of the social media post below. Complete the mental health questionnaire "{scale_name}" as the author would, using only what the post says or clearly implies.

POST
<<<
{post}
>>>

QUESTIONNAIRE
{scale_items}

For every item:
1. Decide whether the post directly mentions, indirectly mentions, or does not mention the content of the item.
2. If the item is mentioned, choose the one option that best matches how the author would answer.
3. Quote the supporting words from the post verbatim. Do not paraphrase inside quotes.
4. Give a short reason for your choice.
Do not assume negative feelings the post does not express, and do not attribute to the author what the post says about other people.

{layout}{critique})";

constexpr const char* kStep1Repair = R"({prompt}

YOUR PREVIOUS ANSWER
<<<
{previous_output}
>>>

Your previous answer could not be read:
{problems}

Answer again, covering every item exactly once and following this layout exactly:
{layout})";

constexpr const char* kScaleDiscriminator = R"(You are reviewing a questionnaire that another assistant filled in on behalf of the author of a social media post.

POST
<<<
{post}
>>>

QUESTIONNAIRE
{scale_items}

FILLED-IN ANSWERS
{completed_scale}

AUTOMATIC EVIDENCE CHECK
{evidence_failures}

Check every answer for these mistakes: reading negativity into content that is not negative, attributing to the author what the post says about someone else, quotes that do not appear in the post, and options that the evidence does not support.

Reply with ACCEPT if every answer is correct.
Otherwise reply with REJECT: followed by one line per problem in the form "item <item_id>: <problem>".)";

constexpr const char* kStep2 = R"(You are a psychologist reading a social media post.

QUESTION
{question}

POST
<<<
{post}
>>>
{completed_scale_section}
Base your decision on the evidence above and do not over-infer.
Start your reply with "Answer: <label>." where <label> is one of: {labels}. Then explain your reasons, citing the specific evidence you relied on.{critique})";

constexpr const char* kStep2Repair = R"({prompt}

YOUR PREVIOUS ANSWER
<<<
{previous_output}
>>>

Your previous answer did not state a single label ({problems}). Reply again starting with "Answer: <label>." where <label> is exactly one of: {labels}.)";

constexpr const char* kAnalysisDiscriminator = R"(You are reviewing a mental health assessment of a social media post.

QUESTION
{question}

POST
<<<
{post}
>>>
{completed_scale_section}
ASSESSMENT
Answer: {label}.
{explanation}

Check whether the assessment over-infers beyond the evidence or makes any other mistake.
Reply with ACCEPT if the assessment is sound. Otherwise reply with REJECT: followed by a description of the mistakes.)";

struct TemplateSpec {
    const char* file;
    std::string PromptTemplates::*member;
    std::set<std::string> allowed;
};

const std::array<TemplateSpec, 6>& specs() {
    static const std::array<TemplateSpec, 6> s{{
        {"step1.txt", &PromptTemplates::step1, {"post", "scale_name", "scale_items", "layout", "critique"}},
        {"step1_repair.txt", &PromptTemplates::step1_repair, {"prompt", "previous_output", "problems", "layout"}},
        {"scale_discriminator.txt",
         &PromptTemplates::scale_discriminator,
         {"post", "scale_name", "scale_items", "completed_scale", "evidence_failures"}},
        {"step2.txt",
         &PromptTemplates::step2,
         {"question", "labels", "post", "completed_scale_section", "critique"}},
        {"step2_repair.txt", &PromptTemplates::step2_repair, {"prompt", "previous_output", "problems", "labels"}},
        {"analysis_discriminator.txt",
         &PromptTemplates::analysis_discriminator,
         {"question", "labels", "post", "completed_scale_section", "label", "explanation"}},
    }};
    return s;
}

// Walks the template and calls on_text / on_var for each segment.
template <typename OnText, typename OnVar>
void scan_template(const std::string& tmpl, OnText on_text, OnVar on_var) {
    std::size_t i = 0;
    while (i < tmpl.size()) {
        char c = tmpl[i];
        if (c == '{' && i + 1 < tmpl.size() && tmpl[i + 1] == '{') {
            on_text("{");
            i += 2;
        } else if (c == '}' && i + 1 < tmpl.size() && tmpl[i + 1] == '}') {
            on_text("}");
            i += 2;
        } else if (c == '{') {
            auto close = tmpl.find('}', i + 1);
            if (close == std::string::npos) throw TemplateError("unterminated placeholder at offset " + std::to_string(i));
            on_var(tmpl.substr(i + 1, close - i - 1));
            i = close + 1;
        } else {
            auto next = tmpl.find_first_of("{}", i + 1);
            if (next == std::string::npos) next = tmpl.size();
            // a lone '}' is literal
            if (c == '}') next = i + 1;
            on_text(std::string_view(tmpl).substr(i, next - i));
            i = next;
        }
    }
}

} // namespace

std::string render_template(const std::string& tmpl, const TemplateVars& vars) {
    std::string out;
    out.reserve(tmpl.size() * 2);
    scan_template(
        tmpl, [&](std::string_view s) { out.append(s); },
        [&](const std::string& name) {
            auto it = vars.find(name);
            if (it == vars.end()) throw TemplateError("unknown placeholder {" + name + "}");
            out += it->second;
        });
    return out;
}

std::set<std::string> template_placeholders(const std::string& tmpl) {
    std::set<std::string> names;
    scan_template(tmpl, [](std::string_view) {}, [&](const std::string& name) { names.insert(name); });
    return names;
}

PromptTemplates PromptTemplates::defaults() {
    return {kStep1, kStep1Repair, kScaleDiscriminator, kStep2, kStep2Repair, kAnalysisDiscriminator};
}

PromptTemplates PromptTemplates::load_dir(const std::string& dir) {
    if (!fs::is_directory(dir)) throw FileNotFound(dir);
    PromptTemplates t = defaults();
    for (const auto& spec : specs()) {
        fs::path p = fs::path(dir) / spec.file;
        if (fs::exists(p)) {
            std::string body = text::read_file(p.string());
            // editors append a trailing newline; the compiled defaults have none
            if (!body.empty() && body.back() == '\n') body.pop_back();
            t.*(spec.member) = std::move(body);
        }
    }
    t.validate();
    return t;
}

void PromptTemplates::save_dir(const std::string& dir) const {
    for (const auto& spec : specs()) text::write_file_atomic((fs::path(dir) / spec.file).string(), this->*(spec.member) + "\n");
}

void PromptTemplates::validate() const {
    for (const auto& spec : specs()) {
        for (const auto& name : template_placeholders(this->*(spec.member))) {
            if (!spec.allowed.count(name))
                throw TemplateError(std::string(spec.file) + ": unknown placeholder {" + name + "}");
        }
    }
}

std::string PromptTemplates::digest() const {
    std::string all;
    for (const auto& spec : specs()) {
        all += spec.file;
        all += '\0';
        all += this->*(spec.member);
        all += '\0';
    }
    return text::sha256_hex(all);
}

} // namespace maims
