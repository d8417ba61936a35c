#include "maims/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "maims/corpus.hpp"
#include "maims/error.hpp"
#include "maims/eval.hpp"
#include "maims/pipeline.hpp"
#include "maims/run_config.hpp"
#include "maims/text.hpp"

namespace maims::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunFlags {
    std::string config;
    std::string mode;
    std::size_t n = 0;
    int workers = 0;
    int max_retries = 0;
    bool include_failed = true;
    std::string cache_dir;
    std::string templates;
    std::string out;
    bool no_cache = false;

    CLI::Option* mode_opt = nullptr;
    CLI::Option* n_opt = nullptr;
    CLI::Option* workers_opt = nullptr;
    CLI::Option* retries_opt = nullptr;
    CLI::Option* failed_opt = nullptr;
    CLI::Option* cache_opt = nullptr;
    CLI::Option* templates_opt = nullptr;
};

void add_run_flags(CLI::App* cmd, RunFlags& f, bool with_n) {
    cmd->add_option("--config", f.config, "Run configuration file (JSON)")->required();
    f.mode_opt = cmd->add_option("--mode", f.mode, "full | no_scale | no_discriminator");
    if (with_n) f.n_opt = cmd->add_option("--n", f.n, "Use only the first n posts");
    f.workers_opt = cmd->add_option("--workers", f.workers, "Concurrent posts");
    f.retries_opt = cmd->add_option("--max-retries", f.max_retries, "Discriminator retry budget per stage");
    f.failed_opt = cmd->add_flag("--include-failed,!--exclude-failed", f.include_failed,
                                 "Score posts whose pipeline failed (with the fallback label)");
    f.cache_opt = cmd->add_option("--cache-dir", f.cache_dir, "Response cache directory");
    cmd->add_flag("--no-cache", f.no_cache, "Disable the response cache");
    f.templates_opt = cmd->add_option("--templates", f.templates, "Directory of prompt template overrides");
    cmd->add_option("--out", f.out, "Output directory for this run (default: <output_dir>/<task>/<mode>/<time>)");
}

RunConfig merged_config(const RunFlags& f) {
    RunConfig c = load_run_config(f.config);
    if (f.mode_opt != nullptr && f.mode_opt->count() > 0) {
        auto m = mode_from_token(f.mode);
        if (!m) throw ConfigError("--mode must be one of full, no_scale, no_discriminator");
        c.mode = *m;
    }
    if (f.n_opt != nullptr && f.n_opt->count() > 0) c.prefix_n = f.n;
    if (f.workers_opt->count() > 0) c.workers = f.workers;
    if (f.retries_opt->count() > 0) c.max_retries = f.max_retries;
    if (f.failed_opt->count() > 0) c.include_failed = f.include_failed;
    if (f.cache_opt->count() > 0) c.cache_dir = fs::absolute(f.cache_dir).lexically_normal().string();
    if (f.no_cache) c.cache_dir.clear();
    if (f.templates_opt->count() > 0) c.templates_dir = fs::absolute(f.templates).lexically_normal().string();
    validate_run_config(c);
    return c;
}

struct Inputs {
    MentalScale scale;
    TaskSpec task;
    Corpus corpus;
    PromptTemplates templates;
};

Inputs load_inputs(const RunConfig& c, bool require_labels) {
    Inputs in;
    in.scale = load_scale(c.scale_path);
    in.task = load_task(c.task_path);
    if (in.task.scale_id != in.scale.scale_id)
        throw ConfigError("task " + in.task.task_id + " expects scale '" + in.task.scale_id + "' but " + c.scale_path +
                          " defines '" + in.scale.scale_id + "'");
    in.corpus = load_corpus(c.corpus_path, &in.task, require_labels);
    if (c.prefix_n) in.corpus = take_prefix(in.corpus, *c.prefix_n);
    in.templates = c.templates_dir.empty() ? PromptTemplates::defaults() : PromptTemplates::load_dir(c.templates_dir);
    return in;
}

RoleClients make_clients(const RunConfig& c) {
    std::shared_ptr<const ResponseCache> cache;
    if (!c.cache_dir.empty()) cache = std::make_shared<ResponseCache>(c.cache_dir);
    auto make = [&](const RoleConfig& rc) {
        return std::make_shared<LlmClient>(rc, make_transport(rc), cache, c.retry);
    };
    return {make(c.poster), make(c.analysis), make(c.discriminator)};
}

std::string timestamp_dir_name() {
    auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
    return buf;
}

fs::path fresh_dir(const fs::path& base) {
    fs::path p = base / timestamp_dir_name();
    for (int i = 1; fs::exists(p); ++i) p = base / (timestamp_dir_name() + "-" + std::to_string(i));
    return p;
}

void print_transport_counts(const RoleClients& clients, std::ostream& out) {
    out << "transport calls: poster=" << clients.poster->transport_invocations()
        << " analysis=" << clients.analysis->transport_invocations()
        << " discriminator=" << clients.discriminator->transport_invocations() << '\n';
}

int cmd_run(const RunFlags& f, std::ostream& out) {
    RunConfig c = merged_config(f);
    Inputs in = load_inputs(c, false);
    RoleClients clients = make_clients(c);
    PipelineConfig pc{c.mode, c.max_retries, in.templates};
    Pipeline pipeline(in.scale, in.task, pc, clients);
    const std::string digest = config_digest(c);

    auto records = run_corpus(pipeline, in.corpus, c.workers);

    fs::path dir = f.out.empty() ? fresh_dir(fs::path(c.output_dir) / in.task.task_id / std::string(to_token(c.mode)))
                                 : fs::path(f.out);
    fs::create_directories(dir);
    write_traces(records, (dir / "traces.jsonl").string());
    text::write_file_atomic((dir / "merged_config.json").string(), run_config_to_json(c).dump(2) + "\n");
    out << "traces: " << (dir / "traces.jsonl").string() << '\n';
    if (in.corpus.fully_labeled() && !records.empty()) {
        EvalReport report = evaluate(records, in.corpus, in.task, c.include_failed, digest);
        report.mode = c.mode;
        text::write_file_atomic((dir / "report.json").string(), report_to_json(report).dump(2) + "\n");
        out << "report: " << (dir / "report.json").string() << '\n';
        out << format_summary_table({report});
    } else {
        out << "corpus has unlabeled posts; no report written\n";
    }
    print_transport_counts(clients, out);
    return kOk;
}

int cmd_eval(const RunFlags& f, const std::string& traces, const std::string& report_path, std::ostream& out) {
    RunConfig c = merged_config(f);
    Inputs in = load_inputs(c, false);
    auto records = read_traces(traces);
    EvalReport report = evaluate(records, in.corpus, in.task, c.include_failed, config_digest(c));
    if (!report_path.empty()) text::write_file_atomic(report_path, report_to_json(report).dump(2) + "\n");
    out << format_summary_table({report});
    return kOk;
}

int cmd_ablate(const RunFlags& f, std::ostream& out) {
    RunConfig c = merged_config(f);
    if (!c.prefix_n) c.prefix_n = 100;
    Inputs in;
    try {
        in = load_inputs(c, true);
    } catch (const MissingLabel& e) {
        throw ConfigError(std::string("gold labels required for ablation: ") + e.what());
    }
    RoleClients clients = make_clients(c);
    PipelineConfig pc{c.mode, c.max_retries, in.templates};
    const std::string digest = config_digest(c);

    auto runs = run_ablation(in.corpus, in.scale, in.task, pc, clients, *c.prefix_n, c.workers, c.include_failed,
                             digest);

    fs::path dir = f.out.empty() ? fresh_dir(fs::path(c.output_dir) / in.task.task_id / "ablation") : fs::path(f.out);
    fs::create_directories(dir);
    std::vector<EvalReport> reports;
    json summary = json::array();
    for (const auto& run : runs) {
        fs::path sub = dir / std::string(to_token(run.mode));
        fs::create_directories(sub);
        write_traces(run.records, (sub / "traces.jsonl").string());
        text::write_file_atomic((sub / "report.json").string(), report_to_json(run.report).dump(2) + "\n");
        reports.push_back(run.report);
        summary.push_back({{"mode", std::string(to_token(run.mode))},
                           {"n_evaluated", run.report.n_evaluated},
                           {"weighted_f1", run.report.weighted_f1},
                           {"accuracy", run.report.accuracy}});
    }
    const std::string table = format_summary_table(reports);
    text::write_file_atomic((dir / "summary.txt").string(), table);
    text::write_file_atomic((dir / "summary.json").string(), summary.dump(2) + "\n");
    text::write_file_atomic((dir / "merged_config.json").string(), run_config_to_json(c).dump(2) + "\n");
    out << "ablation: " << dir.string() << '\n' << table;
    print_transport_counts(clients, out);
    return kOk;
}

int cmd_validate(const std::string& path, std::string kind, const std::string& task_path, std::ostream& out,
                 std::ostream& err) {
    if (!fs::exists(path)) {
        err << "file not found: " << path << '\n';
        return kConfigError;
    }
    json doc;
    if (kind == "auto") {
        if (fs::path(path).extension() == ".jsonl") {
            kind = "corpus";
        } else {
            try {
                doc = json::parse(text::read_file(path));
            } catch (const json::parse_error& e) {
                out << "invalid JSON: " << e.what() << '\n';
                return kViolations;
            }
            if (doc.is_object() && doc.contains("items")) kind = "scale";
            else if (doc.is_object() && doc.contains("labels")) kind = "task";
            else {
                err << "cannot tell whether " << path << " is a scale, task or corpus; pass --kind\n";
                return kConfigError;
            }
        }
    }

    std::vector<std::string> violations;
    try {
        if (kind == "scale") {
            load_scale(path);
        } else if (kind == "task") {
            load_task(path);
        } else if (kind == "corpus") {
            std::optional<TaskSpec> task;
            if (!task_path.empty()) task = load_task(task_path);
            load_corpus(path, task ? &*task : nullptr, false);
        } else {
            err << "--kind must be auto, scale, task or corpus\n";
            return kConfigError;
        }
    } catch (const MalformedScale& e) {
        violations = e.violations();
    } catch (const MalformedTask& e) {
        violations = e.violations();
    } catch (const MalformedRecord& e) {
        violations.emplace_back(e.what());
    } catch (const DuplicateId& e) {
        violations.emplace_back(e.what());
    } catch (const MissingLabel& e) {
        violations.emplace_back(e.what());
    }
    if (violations.empty()) {
        out << "OK\n";
        return kOk;
    }
    for (const auto& v : violations) out << v << '\n';
    return kViolations;
}

int cmd_show_trace(const std::string& trace_path, const std::string& post_id, const std::string& scale_path,
                   std::ostream& out) {
    auto records = read_traces(trace_path);
    std::optional<MentalScale> scale;
    if (!scale_path.empty()) scale = load_scale(scale_path);
    for (const auto& r : records) {
        if (r.post_id == post_id) {
            out << render_trace(r, scale ? &*scale : nullptr);
            return kOk;
        }
    }
    throw NotFound("post " + post_id + " in " + trace_path);
}

std::string resolve_cache_dir(const std::string& cache_dir, const std::string& config) {
    if (!cache_dir.empty()) return cache_dir;
    if (!config.empty()) {
        RunConfig c = load_run_config(config);
        if (!c.cache_dir.empty()) return c.cache_dir;
    }
    throw ConfigError("no cache directory: pass --cache-dir or a --config that sets cache_dir");
}

} // namespace

std::string render_trace(const FinalRecord& r, const MentalScale* scale) {
    std::ostringstream out;
    out << "Post " << r.post_id << "  (mode " << to_token(r.mode) << ", status " << to_token(r.status) << ")\n";
    out << r.post_text << "\n\n";

    if (r.scale_response) {
        out << "MS Record (scale " << r.scale_response->scale_id << ", " << r.scale_response->attempts
            << " attempt(s)):\n";
        std::vector<std::string> unmentioned;
        for (const auto& item : r.scale_response->items) {
            if (item.mention == MentionCategory::NoMention) {
                unmentioned.push_back(item.item_id);
                continue;
            }
            std::string option = item.selected_option.value_or("-");
            if (scale != nullptr) {
                if (const auto* si = scale->find_item(item.item_id)) {
                    if (const auto* o = si->find_option(option)) option = o->text;
                }
            }
            out << "  ('" << item.item_id << "', ['" << to_token(item.mention) << "', '" << option;
            if (!item.rationale.empty()) out << " " << item.rationale;
            out << "'])\n";
            for (std::size_t i = 0; i < item.evidence_quotes.size(); ++i) {
                bool ok = i < item.evidence_verified.size() && item.evidence_verified[i];
                out << "      evidence: \"" << item.evidence_quotes[i] << "\" "
                    << (ok ? "[verified]" : "\xE2\x9A\xA0 UNVERIFIED") << '\n';
            }
        }
        if (!unmentioned.empty()) {
            out << "  not mentioned:";
            for (const auto& id : unmentioned) out << ' ' << id;
            out << '\n';
        }
        out << '\n';
    }

    if (!r.verdicts.empty()) {
        out << "Verdicts:\n";
        for (const auto& v : r.verdicts) {
            out << "  [" << to_token(v.stage) << "] " << (v.accepted ? "ACCEPT" : "REJECT");
            if (!v.critique.empty()) out << ": " << v.critique;
            out << '\n';
        }
        out << '\n';
    }
    out << "Final answer: " << r.analysis.label << '\n';
    if (!r.analysis.explanation.empty()) out << "Explanation: " << r.analysis.explanation << '\n';
    if (!r.analysis.cited_items.empty()) {
        out << "Cited items:";
        for (const auto& id : r.analysis.cited_items) out << ' ' << id;
        out << '\n';
    }
    if (r.failure) out << "Failure: " << r.failure->kind << ": " << r.failure->message << '\n';
    return out.str();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Scale-grounded mental health analysis pipeline", "maims"};
    app.require_subcommand(1);

    RunFlags run_flags, eval_flags, ablate_flags;
    auto* run_cmd = app.add_subcommand("run", "Run the pipeline over a corpus");
    add_run_flags(run_cmd, run_flags, true);

    auto* eval_cmd = app.add_subcommand("eval", "Re-score an existing traces file");
    add_run_flags(eval_cmd, eval_flags, false);
    std::string eval_traces, eval_report;
    eval_cmd->add_option("--traces", eval_traces, "traces.jsonl to score")->required();
    eval_cmd->add_option("--report", eval_report, "Write the report JSON here");

    auto* ablate_cmd = app.add_subcommand("ablate", "Run full, no_scale and no_discriminator on the first n posts");
    add_run_flags(ablate_cmd, ablate_flags, true);

    auto* validate_cmd = app.add_subcommand("validate", "Validate a scale, task or corpus file");
    std::string validate_path, validate_kind = "auto", validate_task;
    validate_cmd->add_option("path", validate_path, "File to validate")->required();
    validate_cmd->add_option("--kind", validate_kind, "auto | scale | task | corpus");
    validate_cmd->add_option("--task", validate_task, "Task file used to check corpus labels");

    auto* show_cmd = app.add_subcommand("show-trace", "Render one post's trace");
    std::string show_path, show_id, show_scale;
    show_cmd->add_option("trace", show_path, "traces.jsonl")->required();
    show_cmd->add_option("post_id", show_id, "Post id")->required();
    show_cmd->add_option("--scale", show_scale, "Scale file, to print option texts");

    auto* cache_cmd = app.add_subcommand("cache", "Inspect or manage the response cache");
    cache_cmd->require_subcommand(1);
    std::string cache_dir, cache_config, export_out;
    cache_cmd->add_option("--cache-dir", cache_dir, "Cache directory");
    cache_cmd->add_option("--config", cache_config, "Take cache_dir from this run configuration");
    auto* stats_cmd = cache_cmd->add_subcommand("stats", "Entry counts per role");
    auto* clear_cmd = cache_cmd->add_subcommand("clear", "Delete every cached response");
    auto* export_cmd = cache_cmd->add_subcommand("export-script", "Write cached responses as a mock script");
    export_cmd->add_option("--out", export_out, "Mock script path")->required();

    auto* templates_cmd = app.add_subcommand("templates", "Write the default prompt templates to a directory");
    std::string templates_dir;
    templates_cmd->add_option("dir", templates_dir, "Destination directory")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "maims: " << e.what() << '\n';
        return kConfigError;
    }

    try {
        if (run_cmd->parsed()) return cmd_run(run_flags, out);
        if (eval_cmd->parsed()) return cmd_eval(eval_flags, eval_traces, eval_report, out);
        if (ablate_cmd->parsed()) return cmd_ablate(ablate_flags, out);
        if (validate_cmd->parsed()) return cmd_validate(validate_path, validate_kind, validate_task, out, err);
        if (show_cmd->parsed()) return cmd_show_trace(show_path, show_id, show_scale, out);
        if (templates_cmd->parsed()) {
            PromptTemplates::defaults().save_dir(templates_dir);
            out << "wrote 6 templates to " << templates_dir << '\n';
            return kOk;
        }
        if (cache_cmd->parsed()) {
            ResponseCache cache(resolve_cache_dir(cache_dir, cache_config));
            if (stats_cmd->parsed()) {
                CacheStats s = cache.stats();
                out << "entries: " << s.entries << "\nbytes: " << s.bytes << '\n';
                for (const auto& [role, n] : s.per_role) out << role << ": " << n << '\n';
            } else if (clear_cmd->parsed()) {
                out << "removed " << cache.clear() << " entries\n";
            } else if (export_cmd->parsed()) {
                MockScript script = cache.export_script();
                script.save(export_out);
                out << "wrote " << script.entries.size() << " entries to " << export_out << '\n';
            }
            return kOk;
        }
    } catch (const BackendAbort& e) {
        err << "maims: aborted, " << e.cause_kind() << ": " << e.what() << '\n';
        return kBackendError;
    } catch (const NotFound& e) {
        err << "maims: " << e.what() << '\n';
        return kViolations;
    } catch (const EmptyCache& e) {
        err << "maims: " << e.what() << '\n';
        return kViolations;
    } catch (const Error& e) {
        err << "maims: " << e.kind() << ": " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        err << "maims: " << e.what() << '\n';
        return kConfigError;
    }
    return kConfigError;
}

} // namespace maims::cli
