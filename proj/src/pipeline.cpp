#include "maims/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <mutex>
#include <thread>

#include "maims/text.hpp"

namespace maims {

namespace {

// Critiques from every rejected round, oldest first.
std::optional<std::string> joined_critique(const std::vector<std::string>& critiques) {
    if (critiques.empty()) return std::nullopt;
    if (critiques.size() == 1) return critiques.front();
    std::string out;
    for (std::size_t i = 0; i < critiques.size(); ++i) {
        if (i > 0) out += '\n';
        out += "Round " + std::to_string(i + 1) + ": " + critiques[i];
    }
    return out;
}

bool backend_kind(const std::string& kind) {
    return kind == "BackendUnreachable" || kind == "BackendRejected" || kind == "MockScriptMiss";
}

} // namespace

bool is_backend_failure(const FailureInfo& failure) { return backend_kind(failure.kind); }

Pipeline::Pipeline(MentalScale scale, TaskSpec task, PipelineConfig config, RoleClients clients)
    : scale_(std::move(scale)), task_(std::move(task)), config_(std::move(config)), clients_(std::move(clients)) {
    if (config_.max_retries < 0) throw ConfigError("max_retries must be >= 0");
    if (config_.mode != Mode::NoScale && !clients_.poster) throw ConfigError("poster role client is required");
    if (!clients_.analysis) throw ConfigError("analysis role client is required");
    if (config_.mode != Mode::NoDiscriminator && !clients_.discriminator)
        throw ConfigError("discriminator role client is required");
    config_.templates.validate();
}

std::string Pipeline::ask(LlmClient& client, const std::string& prompt, int& counter) const {
    ++counter;
    return client.complete(prompt).text;
}

ScaleOutcome Pipeline::complete_scale(const Post& post, CallCounts& calls) const {
    std::vector<std::string> critiques;
    std::vector<Verdict> history;
    const int rounds = 1 + config_.max_retries;

    for (int attempt = 1; attempt <= rounds; ++attempt) {
        const std::string prompt = build_step1_prompt(post, scale_, joined_critique(critiques), config_.templates);
        std::string raw = ask(*clients_.poster, prompt, calls.poster);
        ScaleParseResult parsed = parse_scale_response(raw, scale_, post);
        if (!parsed.ok()) {
            const std::string repair = render_template(config_.templates.step1_repair,
                                                       {{"prompt", prompt},
                                                        {"previous_output", raw},
                                                        {"problems", parsed.failure.describe()},
                                                        {"layout", scale_answer_layout()}});
            raw = ask(*clients_.poster, repair, calls.poster);
            parsed = parse_scale_response(raw, scale_, post);
            if (!parsed.ok())
                throw PipelineFailure("scale answer unparseable after repair re-ask for post " + post.post_id + ":\n" +
                                      parsed.failure.describe());
        }

        ScaleResponse response = std::move(*parsed.response);
        response.attempts = attempt;
        if (config_.mode == Mode::NoDiscriminator) return {std::move(response), false};

        Verdict verdict = discriminate_scale(post, response, calls);
        history.push_back(verdict);
        response.verdict_history = history;
        if (verdict.accepted) return {std::move(response), false};
        if (attempt == rounds) return {std::move(response), true};
        critiques.push_back(verdict.critique);
    }
    throw PipelineFailure("unreachable: scale loop exited without a result");
}

Verdict Pipeline::discriminate_scale(const Post& post, const ScaleResponse& response, CallCounts& calls) const {
    const std::string prompt = build_scale_discriminator_prompt(post, scale_, response, config_.templates);
    return parse_verdict(ask(*clients_.discriminator, prompt, calls.discriminator), Stage::Scale, &scale_);
}

Verdict Pipeline::discriminate_analysis(const Post& post, const ScaleResponse* response, const AnalysisResult& result,
                                        CallCounts& calls) const {
    const std::string prompt =
        build_analysis_discriminator_prompt(post, response, &scale_, task_, result, config_.templates);
    return parse_verdict(ask(*clients_.discriminator, prompt, calls.discriminator), Stage::Analysis);
}

FinalRecord Pipeline::run(const Post& post) const {
    const auto started = std::chrono::steady_clock::now();
    FinalRecord record;
    record.post_id = post.post_id;
    record.post_text = post.text;
    record.mode = config_.mode;

    auto finish = [&](FinalRecord& r) -> FinalRecord {
        r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        return std::move(r);
    };
    auto fail = [&](const std::string& kind, const std::string& message) -> FinalRecord {
        record.status = Status::Failed;
        record.failure = FailureInfo{kind, message};
        record.analysis.label = task_.fallback_label();
        return finish(record);
    };

    bool forced = false;
    try {
        // Step 1: scale completion, skipped when the scale is ablated.
        if (config_.mode != Mode::NoScale) {
            ScaleOutcome outcome = complete_scale(post, record.calls);
            forced = outcome.forced;
            record.verdicts = outcome.response.verdict_history;
            record.scale_response = std::move(outcome.response);
        }
        const ScaleResponse* scale_response = record.scale_response ? &*record.scale_response : nullptr;

        // Step 2: analysis; a rejection re-runs only this step.
        std::vector<std::string> critiques;
        const int rounds = 1 + config_.max_retries;
        for (int attempt = 1; attempt <= rounds; ++attempt) {
            record.analysis_attempts = attempt;
            const std::string prompt =
                build_step2_prompt(post, scale_response, &scale_, task_, joined_critique(critiques), config_.templates);
            std::string raw = ask(*clients_.analysis, prompt, record.calls.analysis);
            LabelParseResult parsed = parse_label(raw, task_);
            if (!parsed.ok()) {
                const std::string repair = render_template(config_.templates.step2_repair,
                                                           {{"prompt", prompt},
                                                            {"previous_output", raw},
                                                            {"problems", parsed.problem},
                                                            {"labels", [&] {
                                                                 std::string l;
                                                                 for (const auto& s : task_.labels)
                                                                     l += (l.empty() ? "" : ", ") + s;
                                                                 return l;
                                                             }()}});
                raw = ask(*clients_.analysis, repair, record.calls.analysis);
                parsed = parse_label(raw, task_);
                if (!parsed.ok()) {
                    record.analysis.explanation = raw;
                    return fail("LabelParseFailure", "no single label in analysis output after repair re-ask (" +
                                                         parsed.problem + ")");
                }
            }
            record.analysis.label = *parsed.label;
            record.analysis.explanation = parsed.explanation;
            record.analysis.cited_items =
                scale_response ? cited_items(parsed.explanation, *scale_response) : std::vector<std::string>{};

            if (config_.mode == Mode::NoDiscriminator) break;
            Verdict verdict = discriminate_analysis(post, scale_response, record.analysis, record.calls);
            record.verdicts.push_back(verdict);
            if (verdict.accepted) break;
            if (attempt == rounds) {
                forced = true;
                break;
            }
            critiques.push_back(verdict.critique);
        }
    } catch (const Error& e) {
        return fail(e.kind(), e.what());
    } catch (const std::exception& e) {
        return fail("InternalError", e.what());
    }

    bool any_rejection = false;
    for (const auto& v : record.verdicts) any_rejection = any_rejection || !v.accepted;
    if (forced) record.status = Status::ForcedAfterMaxRetries;
    else if (any_rejection) record.status = Status::AcceptedAfterRetry;
    else record.status = Status::Accepted;
    return finish(record);
}

std::vector<FinalRecord> run_corpus(const Pipeline& pipeline, const Corpus& corpus, int workers,
                                    const ProgressFn& progress) {
    const std::size_t n = corpus.posts.size();
    std::vector<std::optional<FinalRecord>> slots(n);
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};
    std::atomic<bool> abort{false};
    std::mutex mu;
    std::optional<FailureInfo> abort_cause;

    auto worker = [&] {
        while (!abort.load()) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            FinalRecord r = pipeline.run(corpus.posts[i]);
            if (r.failure && is_backend_failure(*r.failure)) {
                std::lock_guard<std::mutex> lock(mu);
                if (!abort_cause) abort_cause = r.failure;
                abort = true;
                return;
            }
            slots[i] = std::move(r);
            const std::size_t d = ++done;
            if (progress) {
                std::lock_guard<std::mutex> lock(mu);
                progress(d, n);
            }
        }
    };

    const int count = std::max(1, std::min<int>(workers, static_cast<int>(std::max<std::size_t>(n, 1))));
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(count));
    for (int t = 0; t < count; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();

    if (abort_cause) throw BackendAbort(abort_cause->kind, abort_cause->message);
    std::vector<FinalRecord> out;
    out.reserve(n);
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

} // namespace maims
