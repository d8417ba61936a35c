#pragma once

#include <map>
#include <set>
#include <string>

namespace maims {

using TemplateVars = std::map<std::string, std::string>;

/// Single-pass `{name}` substitution. `{{` and `}}` produce literal braces.
/// Substituted values are never rescanned, so post text containing braces is safe.
/// Throws TemplateError on an unknown or unterminated placeholder.
std::string render_template(const std::string& tmpl, const TemplateVars& vars);

/// Placeholder names referenced by a template.
std::set<std::string> template_placeholders(const std::string& tmpl);

/// The six prompt templates used by the pipeline. Defaults are compiled in;
/// any of them can be overridden by a file of the same name in a directory.
struct PromptTemplates {
    std::string step1;                  // step1.txt
    std::string step1_repair;           // step1_repair.txt
    std::string scale_discriminator;    // scale_discriminator.txt
    std::string step2;                  // step2.txt
    std::string step2_repair;           // step2_repair.txt
    std::string analysis_discriminator; // analysis_discriminator.txt

    static PromptTemplates defaults();
    /// Defaults overlaid with whichever of the six files exist in `dir`.
    static PromptTemplates load_dir(const std::string& dir);
    void save_dir(const std::string& dir) const;

    /// Rejects templates that reference placeholders their stage does not supply.
    void validate() const;
    [[nodiscard]] std::string digest() const;
};

} // namespace maims
