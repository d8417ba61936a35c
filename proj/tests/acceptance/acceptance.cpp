// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <mutex>
#include <sstream>

#include "maims/cli.hpp"
#include "maims/error.hpp"
#include "maims/eval.hpp"
#include "maims/pipeline.hpp"
#include "maims/run_config.hpp"
#include "support/test_support.hpp"

using namespace maims;
using maims::testing::independent_evidence_check;
using maims::testing::rule;
using maims::testing::source_path;
using maims::testing::TempDir;

namespace {

/// Collects failed expectations for one criterion.
class Check {
  public:
    void expect(bool ok, const std::string& what) {
        if (!ok) failures_.push_back(what);
    }
    [[nodiscard]] bool ok() const { return failures_.empty(); }
    [[nodiscard]] const std::vector<std::string>& failures() const { return failures_; }

  private:
    std::vector<std::string> failures_;
};

int g_failed = 0;

void criterion(int number, const std::string& title, const std::function<void(Check&)>& body) {
    Check c;
    const auto start = std::chrono::steady_clock::now();
    try {
        body(c);
    } catch (const std::exception& e) {
        c.expect(false, std::string("unexpected exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::ostringstream line;
    line << (c.ok() ? "PASS" : "FAIL") << " criterion " << number << ": " << title << " (" << std::fixed;
    line.precision(2);
    line << secs << " s)";
    std::cout << line.str() << '\n';
    for (const auto& f : c.failures()) std::cout << "    - " << f << '\n';
    std::cout.flush();
    if (!c.ok()) ++g_failed;
}

int invoke(const std::vector<std::string>& args, std::string* out = nullptr, std::string* err = nullptr) {
    std::ostringstream o, e;
    int code = cli::run(args, o, e);
    if (out) *out = o.str();
    if (err) *err = e.str();
    return code;
}

std::string strip_meta(const std::string& jsonl) {
    std::string out;
    for (const auto& line : text::split_lines(jsonl)) {
        if (text::trim(line).empty()) continue;
        auto j = nlohmann::json::parse(line);
        j.erase("meta");
        out += j.dump() + "\n";
    }
    return out;
}

std::string sample_config(const TempDir& dir, const std::string& script = source_path("assets/sample_mock_script.json"),
                          const std::string& cache = "") {
    nlohmann::json c = {{"scale", source_path("assets/sample_scale.json")},
                        {"corpus", source_path("assets/sample_corpus.jsonl")},
                        {"task", source_path("assets/sample_task.json")},
                        {"cache_dir", cache},
                        {"output_dir", dir.file("out")},
                        {"workers", 4},
                        {"roles", {{"default", {{"backend", "mock"}, {"script", script}}}}}};
    dir.write("config.json", c.dump(2));
    return dir.file("config.json");
}

// ---------------------------------------------------------------------------
// 1: benchmark numbers are documented as out of reach; live smoke run

/// Posts for the smoke run: five describe sustained low mood, five do not.
std::string smoke_corpus() {
    static const char* low[] = {"I feel low nearly every day and nothing helps.",
                                "Every morning I wake up sad and empty, it has been weeks.",
                                "I can't enjoy anything anymore, even music feels flat.",
                                "I am exhausted all the time and feel hopeless about everything.",
                                "Crying again tonight. I feel worthless and tired of trying."};
    static const char* fine[] = {"Just finished a 10k run, feeling great!",
                                 "Anyone know a good recipe for banana bread?",
                                 "Started a new job this week and my team is lovely.",
                                 "Our garden tomatoes finally turned red, so proud.",
                                 "Planning a trip to the coast with my sister next month."};
    std::string out;
    for (int i = 0; i < 5; ++i) {
        out += nlohmann::json{{"post_id", "s" + std::to_string(2 * i + 1)}, {"text", low[i]}, {"label", "Yes"}}.dump() + "\n";
        out += nlohmann::json{{"post_id", "s" + std::to_string(2 * i + 2)}, {"text", fine[i]}, {"label", "No"}}.dump() + "\n";
    }
    return out;
}

/// A crude but protocol-faithful stand-in for a chat model.
std::pair<int, std::string> stand_in_model(const std::string& prompt) {
    if (prompt.find("FILLED-IN ANSWERS") != std::string::npos) return {200, "ACCEPT"};
    if (prompt.find("ASSESSMENT\nAnswer:") != std::string::npos) return {200, "ACCEPT"};
    const auto post_start = prompt.find("<<<\n");
    const auto post_end = prompt.find("\n>>>");
    const std::string post = prompt.substr(post_start + 4, post_end - post_start - 4);
    bool low = false;
    for (const char* cue : {"low", "sad", "enjoy", "exhausted", "worthless"})
        low = low || text::to_lower(post).find(cue) != std::string::npos;
    if (prompt.find("```scale") != std::string::npos) {
        std::string first_sentence = post.substr(0, post.find_first_of(".,!"));
        std::string block = "```scale\n";
        block += low ? "1 | direct_mention | 2 | evidence: \"" + first_sentence + "\" | reason: low mood\n"
                     : "1 | no_mention | - | evidence: - | reason: not discussed\n";
        block += "2 | no_mention | - | evidence: - | reason: not discussed\n";
        block += "3 | no_mention | - | evidence: - | reason: not discussed\n```";
        return {200, block};
    }
    return {200, low ? "Answer: Yes. The post describes persistent low mood (item 1)."
                     : "Answer: No. Nothing in the post suggests low mood."};
}

void criterion_1(Check& c) {
    const std::string readme = text::read_file(source_path("README.md"));
    for (const char* needle : {"88.68", "77.93", "not reproduced"})
        c.expect(readme.find(needle) != std::string::npos, std::string("README does not mention ") + needle);

    TempDir dir;
    std::string config_path;
    std::unique_ptr<maims::testing::FakeChatServer> server;
    if (const char* live = std::getenv("MAIMS_LIVE_CONFIG"); live != nullptr && *live != '\0') {
        config_path = live;
        std::cout << "    (live backend from MAIMS_LIVE_CONFIG)\n";
    } else {
        server = std::make_unique<maims::testing::FakeChatServer>(
            [](const std::string& prompt, const httplib::Request&) { return stand_in_model(prompt); });
        dir.write("smoke.jsonl", smoke_corpus());
        nlohmann::json role = {{"backend", "remote"}, {"endpoint", server->endpoint()}, {"model", "stand-in"},
                               {"request_timeout", 10}};
        nlohmann::json cfg = {{"scale", source_path("assets/sample_scale.json")},
                              {"corpus", dir.file("smoke.jsonl")},
                              {"task", source_path("assets/sample_task.json")},
                              {"output_dir", dir.file("out")},
                              {"workers", 2},
                              {"roles", {{"default", role}}}};
        dir.write("smoke.json", cfg.dump(2));
        config_path = dir.file("smoke.json");
        std::cout << "    (MAIMS_LIVE_CONFIG not set; using a local OpenAI-compatible stand-in)\n";
    }

    std::string err;
    const int code = invoke({"run", "--config", config_path, "--n", "10", "--out", dir.file("smoke_out")}, nullptr, &err);
    c.expect(code == 0, "run exited with " + std::to_string(code) + ": " + err);
    if (code != 0) return;

    RunConfig rc = load_run_config(config_path);
    TaskSpec task = load_task(rc.task_path);
    auto records = read_traces(dir.file("smoke_out/traces.jsonl"));
    c.expect(records.size() == 10, "expected 10 records, got " + std::to_string(records.size()));
    for (const auto& r : records) {
        c.expect(!r.post_id.empty(), "record without post_id");
        c.expect(task.canonical_label(r.analysis.label).has_value(), r.post_id + ": label not in task labels");
        c.expect(r.scale_response.has_value() || r.status == Status::Failed, r.post_id + ": no completed scale");
        c.expect(record_from_json(to_json(r)) == r, r.post_id + ": record does not round-trip");
    }
    auto report = report_from_json(nlohmann::json::parse(text::read_file(dir.file("smoke_out/report.json"))));
    c.expect(report.n_records == 10, "report.n_records != 10");
    c.expect(report.weighted_f1 >= 0.0 && report.weighted_f1 <= 1.0, "weighted_f1 outside [0,1]");
    c.expect(report.accuracy >= 0.0 && report.accuracy <= 1.0, "accuracy outside [0,1]");
    c.expect(report.confusion.total() == report.n_evaluated, "confusion total disagrees with n_evaluated");
}

// ---------------------------------------------------------------------------
// 2: exhaustive metric oracle

struct OracleMetrics {
    double wf1;
    double acc;
};

/// Brute force on bitmasks: bit i set means label "1" at position i.
OracleMetrics oracle(unsigned gold, unsigned pred, int n) {
    const unsigned mask = (n == 32) ? ~0u : ((1u << n) - 1u);
    double wf1 = 0.0;
    for (int cls = 0; cls <= 1; ++cls) {
        const unsigned g = cls ? gold : (~gold & mask);
        const unsigned p = cls ? pred : (~pred & mask);
        const int support = std::popcount(g);
        if (support == 0) continue;
        const int tp = std::popcount(g & p);
        const int predicted = std::popcount(p);
        const double precision = predicted == 0 ? 0.0 : static_cast<double>(tp) / predicted;
        const double recall = static_cast<double>(tp) / support;
        const double f1 = (precision + recall) == 0.0 ? 0.0 : 2 * precision * recall / (precision + recall);
        wf1 += f1 * support / n;
    }
    const double acc = static_cast<double>(n - std::popcount((gold ^ pred) & mask)) / n;
    return {wf1, acc};
}

void criterion_2(Check& c) {
    long long pairs = 0;
    double worst = 0.0;
    for (int n = 1; n <= 12; ++n) {
        const unsigned count = 1u << n;
        std::vector<std::vector<std::string>> vecs(count);
        for (unsigned m = 0; m < count; ++m) {
            vecs[m].reserve(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i) vecs[m].push_back((m >> i) & 1u ? "1" : "0");
        }
        for (unsigned g = 0; g < count; ++g) {
            for (unsigned p = 0; p < count; ++p) {
                const OracleMetrics o = oracle(g, p, n);
                const double wf1 = weighted_f1(vecs[g], vecs[p]);
                const double acc = accuracy(vecs[g], vecs[p]);
                const double diff = std::max(std::abs(wf1 - o.wf1), std::abs(acc - o.acc));
                worst = std::max(worst, diff);
                if (diff > 1e-9 && c.ok())
                    c.expect(false, "mismatch at n=" + std::to_string(n) + " gold=" + std::to_string(g) +
                                        " pred=" + std::to_string(p));
                ++pairs;
            }
        }
    }
    std::cout << "    (" << pairs << " vector pairs, max abs difference " << worst << ")\n";
}

// ---------------------------------------------------------------------------
// 3: hand-checked fixtures

void criterion_3(Check& c) {
    using V = std::vector<std::string>;
    const double a = weighted_f1(V{"1", "1", "0", "0"}, V{"1", "0", "0", "0"});
    c.expect(std::abs(a - 0.733333) <= 1e-6, "weighted F1 of fixture A is " + std::to_string(a));
    c.expect(accuracy(V{"1", "1", "0", "0"}, V{"1", "0", "0", "0"}) == 0.75, "accuracy of fixture A is not 0.75");
    const double b = weighted_f1(V{"1", "1", "1", "0"}, V{"1", "1", "1", "1"});
    c.expect(std::abs(b - 0.642857) <= 1e-6, "weighted F1 of fixture B is " + std::to_string(b));
}

// ---------------------------------------------------------------------------
// 4: retry bound for both stages

const char* kValidScale = "```scale\n"
                          "1 | direct_mention | 3 | evidence: \"I feel low nearly every day\" | reason: low\n"
                          "2 | no_mention | - | evidence: - | reason: -\n"
                          "3 | direct_mention | 3 | evidence: \"I am tired all the time\" | reason: tired\n"
                          "```";

MockScript accepting_script() {
    MockScript s;
    s.rules.push_back(rule(Role::Poster, {"QUESTIONNAIRE"}, kValidScale));
    s.rules.push_back(rule(Role::Analysis, {"QUESTION"}, "Answer: Yes. Low mood (item 1)."));
    s.rules.push_back(rule(Role::Discriminator, {"FILLED-IN ANSWERS"}, "ACCEPT"));
    s.rules.push_back(rule(Role::Discriminator, {"ASSESSMENT"}, "ACCEPT"));
    return s;
}

void criterion_4(Check& c) {
    const Post post = maims::testing::sample_corpus().posts[0];
    {
        MockScript s = accepting_script();
        s.rules.insert(s.rules.begin(), rule(Role::Discriminator, {"FILLED-IN ANSWERS"}, "REJECT: item 1: wrong"));
        RoleClients clients = maims::testing::mock_clients(s);
        Pipeline p(maims::testing::sample_scale(), maims::testing::sample_task(), PipelineConfig{Mode::Full, 2}, clients);
        FinalRecord r = p.run(post);
        int scale_verdicts = 0;
        for (const auto& v : r.verdicts) scale_verdicts += v.stage == Stage::Scale ? 1 : 0;
        c.expect(clients.poster->transport_invocations() == 3,
                 "scale stage: poster invocations " + std::to_string(clients.poster->transport_invocations()));
        c.expect(scale_verdicts == 3, "scale stage: " + std::to_string(scale_verdicts) + " scale verdicts");
        c.expect(r.status == Status::ForcedAfterMaxRetries, "scale stage: status " + std::string(to_token(r.status)));
    }
    {
        MockScript s = accepting_script();
        s.rules.insert(s.rules.begin(), rule(Role::Discriminator, {"ASSESSMENT"}, "REJECT: over-inference"));
        RoleClients clients = maims::testing::mock_clients(s);
        Pipeline p(maims::testing::sample_scale(), maims::testing::sample_task(), PipelineConfig{Mode::Full, 2}, clients);
        FinalRecord r = p.run(post);
        int analysis_verdicts = 0;
        for (const auto& v : r.verdicts) analysis_verdicts += v.stage == Stage::Analysis ? 1 : 0;
        c.expect(clients.analysis->transport_invocations() == 3,
                 "analysis stage: analysis invocations " + std::to_string(clients.analysis->transport_invocations()));
        c.expect(analysis_verdicts == 3, "analysis stage: " + std::to_string(analysis_verdicts) + " verdicts");
        c.expect(r.status == Status::ForcedAfterMaxRetries, "analysis stage: status " + std::string(to_token(r.status)));
        c.expect(clients.poster->transport_invocations() == 1, "analysis retries re-ran the scale step");
    }
}

// ---------------------------------------------------------------------------
// 5: ablation purity

/// Forwards to a mock and counts scale-discriminator prompts separately.
class StageCountingTransport : public Transport {
  public:
    explicit StageCountingTransport(const MockScript& s) : inner_(s) {}
    std::string send(const ChatRequest& request) override {
        if (request.prompt.find("FILLED-IN ANSWERS") != std::string::npos) ++scale_stage_;
        return inner_.send(request);
    }
    [[nodiscard]] std::string identity() const override { return inner_.identity(); }
    [[nodiscard]] int scale_stage() const { return scale_stage_.load(); }

  private:
    MockTransport inner_;
    std::atomic<int> scale_stage_{0};
};

void criterion_5(Check& c) {
    const MockScript script = maims::testing::sample_script();
    const Corpus corpus = take_prefix(maims::testing::sample_corpus(), 5);
    c.expect(corpus.posts.size() == 5, "corpus prefix is not 5 posts");

    for (Mode mode : {Mode::NoScale, Mode::NoDiscriminator}) {
        auto disc_transport = std::make_shared<StageCountingTransport>(script);
        RoleClients clients = maims::testing::mock_clients(script);
        clients.discriminator = std::make_shared<LlmClient>(RoleConfig{Role::Discriminator}, disc_transport);
        Pipeline p(maims::testing::sample_scale(), maims::testing::sample_task(), PipelineConfig{mode}, clients);
        auto records = run_corpus(p, corpus, 2);
        const std::string m(to_token(mode));
        c.expect(records.size() == 5, m + ": expected 5 records");
        if (mode == Mode::NoScale) {
            c.expect(clients.poster->transport_invocations() == 0, m + ": poster was called");
            c.expect(disc_transport->scale_stage() == 0, m + ": scale discriminator was called");
            for (const auto& r : records) {
                c.expect(!r.scale_response, m + ": " + r.post_id + " has a completed scale");
                c.expect(r.calls.poster == 0, m + ": " + r.post_id + " counts poster calls");
                for (const auto& v : r.verdicts) c.expect(v.stage == Stage::Analysis, m + ": scale verdict recorded");
            }
        } else {
            c.expect(clients.discriminator->transport_invocations() == 0, m + ": discriminator was called");
            for (const auto& r : records) {
                c.expect(r.verdicts.empty(), m + ": " + r.post_id + " has verdicts");
                c.expect(r.scale_response && r.scale_response->verdict_history.empty(),
                         m + ": " + r.post_id + " has a scale verdict history");
                c.expect(r.calls.discriminator == 0, m + ": " + r.post_id + " counts discriminator calls");
            }
        }
    }
}

// ---------------------------------------------------------------------------
// 6: evidence soundness

void criterion_6(Check& c) {
    auto golden = read_traces(source_path("tests/fixtures/golden/traces.jsonl"));
    int quotes = 0, agree = 0;
    for (const auto& r : golden) {
        if (!r.scale_response) continue;
        for (const auto& item : r.scale_response->items) {
            c.expect(item.evidence_verified.size() == item.evidence_quotes.size(), r.post_id + ": flag count mismatch");
            for (std::size_t i = 0; i < item.evidence_quotes.size(); ++i) {
                ++quotes;
                const bool expected = independent_evidence_check(item.evidence_quotes[i], r.post_text);
                if (i < item.evidence_verified.size() && item.evidence_verified[i] == expected) ++agree;
            }
        }
    }
    c.expect(quotes > 0, "golden trace has no evidence quotes");
    c.expect(agree == quotes, "flag agreement " + std::to_string(agree) + "/" + std::to_string(quotes));
    std::cout << "    (golden trace: " << agree << "/" << quotes << " flags agree)\n";

    const Post post = maims::testing::sample_corpus().posts[0];
    const std::string fabricated = "```scale\n"
                                   "1 | direct_mention | 3 | evidence: \"I feel low nearly every day\" | reason: low\n"
                                   "2 | direct_mention | 2 | evidence: \"I barely smile at my kids anymore\" | reason: x\n"
                                   "3 | direct_mention | 3 | evidence: \"can't get out of bed\" | reason: tired\n```";
    auto parsed = parse_scale_response(fabricated, maims::testing::sample_scale(), post);
    c.expect(parsed.ok(), "fabricated-quote fixture did not parse");
    if (!parsed.ok()) return;
    int unverified = 0, disagreements = 0;
    for (const auto& item : parsed.response->items) {
        for (std::size_t i = 0; i < item.evidence_quotes.size(); ++i) {
            if (!item.evidence_verified[i]) ++unverified;
            if (item.evidence_verified[i] != independent_evidence_check(item.evidence_quotes[i], post.text))
                ++disagreements;
        }
    }
    c.expect(unverified == 1, "fabricated fixture has " + std::to_string(unverified) + " unverified flags");
    c.expect(disagreements == 0, "independent checker disagrees on the fabricated fixture");
}

// ---------------------------------------------------------------------------
// 7: golden determinism

void criterion_7(Check& c) {
    TempDir dir;
    const std::string config = sample_config(dir);
    std::string err;
    for (const char* run : {"run1", "run2"}) {
        int code = invoke({"run", "--config", config, "--out", dir.file(run)}, nullptr, &err);
        c.expect(code == 0, std::string(run) + " exited with " + std::to_string(code) + ": " + err);
        if (code != 0) return;
    }
    const std::string t1 = strip_meta(text::read_file(dir.file("run1/traces.jsonl")));
    const std::string t2 = strip_meta(text::read_file(dir.file("run2/traces.jsonl")));
    const std::string r1 = text::read_file(dir.file("run1/report.json"));
    const std::string r2 = text::read_file(dir.file("run2/report.json"));
    c.expect(std::count(t1.begin(), t1.end(), '\n') >= 5, "fewer than 5 trace lines");
    c.expect(t1 == t2, "traces differ between consecutive runs");
    c.expect(r1 == r2, "report.json differs between consecutive runs");
    c.expect(t1 == strip_meta(text::read_file(source_path("tests/fixtures/golden/traces.jsonl"))),
             "traces differ from the golden file");
    c.expect(r1 == text::read_file(source_path("tests/fixtures/golden/report.json")),
             "report.json differs from the golden file");
}

// ---------------------------------------------------------------------------
// 8: cache contract and offline replay

std::vector<FinalRecord> without_timing(std::vector<FinalRecord> records) {
    for (auto& r : records) r.wall_seconds = 0.0;
    return records;
}

void criterion_8(Check& c) {
    TempDir dir;
    const MockScript script = maims::testing::sample_script();
    const Corpus corpus = maims::testing::sample_corpus();
    const TaskSpec task = maims::testing::sample_task();
    auto cache = std::make_shared<ResponseCache>(dir.file("cache"));

    auto run_with = [&](const RoleClients& clients) {
        Pipeline p(maims::testing::sample_scale(), task, PipelineConfig{}, clients);
        return run_corpus(p, corpus, 3);
    };
    auto transport_total = [](const RoleClients& cl) {
        return cl.poster->transport_invocations() + cl.analysis->transport_invocations() +
               cl.discriminator->transport_invocations();
    };

    RoleClients first = maims::testing::mock_clients(script, cache);
    auto records1 = run_with(first);
    c.expect(transport_total(first) > 0, "first run made no transport calls");

    RoleClients second = maims::testing::mock_clients(script, cache);
    auto records2 = run_with(second);
    c.expect(transport_total(second) == 0,
             "second run made " + std::to_string(transport_total(second)) + " transport calls");
    c.expect(report_to_json(evaluate(records1, corpus, task, true)) == report_to_json(evaluate(records2, corpus, task, true)),
             "reports differ between the cold and cached runs");
    c.expect(without_timing(records1) == without_timing(records2), "records differ between cold and cached runs");

    // export, then replay with no cache and only the exported script
    std::string out, err;
    int code = invoke({"cache", "--cache-dir", dir.file("cache"), "export-script", "--out", dir.file("replay.json")}, &out, &err);
    c.expect(code == 0, "export-script exited with " + std::to_string(code) + ": " + err);
    if (code != 0) return;
    MockScript exported = MockScript::load(dir.file("replay.json"));
    c.expect(exported.rules.empty(), "exported script should contain exact entries only");
    RoleClients replay = maims::testing::mock_clients(exported);
    auto records3 = run_with(replay);
    c.expect(without_timing(records1) == without_timing(records3), "offline replay produced different records");
    c.expect(report_to_json(evaluate(records1, corpus, task, true)) == report_to_json(evaluate(records3, corpus, task, true)),
             "offline replay produced a different report");
}

// ---------------------------------------------------------------------------
// 9: parse robustness

void criterion_9(Check& c) {
    MentalScale bdi{"bdi_fragment", "Fragment", "1", "", {}};
    bdi.items.push_back({"13",
                         "Indecisiveness",
                         "",
                         {{"0", "I make decisions about as well as ever.", 0.0},
                          {"1", "I find it more difficult to make decisions than usual.", 1.0},
                          {"2", "I have much greater difficulty in making decisions than I used to.", 2.0},
                          {"3", "I have trouble making any decisions.", 3.0}}});
    const Post post{"t3", "I keep going back and forth, I can't decide on anything anymore.", std::nullopt};
    const std::string fragment =
        "13 | directly_mention | I find it more difficult to make decisions than usual. The poster says they keep "
        "going back and forth | evidence: \"I can't decide on anything anymore\" | reason: indecision is stated\n";
    auto parsed = parse_scale_response(fragment, bdi, post);
    c.expect(parsed.ok(), "record fragment did not parse: " + parsed.failure.describe());
    if (parsed.ok()) {
        const ItemResponse& r = parsed.response->items.at(0);
        c.expect(r.item_id == "13", "item id " + r.item_id);
        c.expect(r.mention == MentionCategory::DirectMention, "mention is not direct_mention");
        c.expect(r.selected_option == std::optional<std::string>("1"), "selected option is not 1");
    }

    MockScript s = accepting_script();
    s.rules.insert(s.rules.begin(),
                   rule(Role::Poster, {"QUESTIONNAIRE"},
                        "```scale\n1 | direct_mention | 3 | evidence: \"low\" | reason: x\n"
                        "3 | direct_mention | 3 | evidence: \"tired\" | reason: y\n```"));
    RoleClients clients = maims::testing::mock_clients(s);
    Pipeline p(maims::testing::sample_scale(), maims::testing::sample_task(), PipelineConfig{}, clients);
    FinalRecord r = p.run(maims::testing::sample_corpus().posts[0]);
    c.expect(clients.poster->transport_invocations() == 2,
             "poster invocations " + std::to_string(clients.poster->transport_invocations()) + ", expected 2");
    c.expect(r.status == Status::Failed, "status " + std::string(to_token(r.status)) + ", expected failed");
}

// ---------------------------------------------------------------------------
// 10: scale validation fixtures

void criterion_10(Check& c) {
    const std::vector<std::pair<std::string, std::string>> fixtures = {
        {"tests/fixtures/scale_duplicate_id.json", "duplicate item id: 13"},
        {"tests/fixtures/scale_single_option.json", "item 7: fewer than 2 options"},
        {"tests/fixtures/scale_mixed_values.json", "item 7: mixed valued and unvalued options"},
    };
    for (const auto& [path, violation] : fixtures) {
        std::string out;
        const int code = invoke({"validate", source_path(path)}, &out);
        c.expect(code != 0, path + ": exit code 0");
        c.expect(out == violation + "\n", path + ": printed '" + out + "'");
        try {
            load_scale(source_path(path));
            c.expect(false, path + ": load_scale accepted it");
        } catch (const MalformedScale& e) {
            c.expect(e.violations() == std::vector<std::string>{violation}, path + ": library violations differ");
        }
    }
}

} // namespace

int main() {
    criterion(1, "benchmark numbers documented as not reproduced; smoke run yields 10 well-formed records", criterion_1);
    criterion(2, "weighted F1 and accuracy match a brute-force oracle on all binary vectors up to length 12",
              criterion_2);
    criterion(3, "hand-checked metric fixtures", criterion_3);
    criterion(4, "retry bound of max_retries + 1 rounds in both stages", criterion_4);
    criterion(5, "ablation modes never call the removed roles", criterion_5);
    criterion(6, "evidence flags agree with an independent substring check", criterion_6);
    criterion(7, "run output is byte-identical across runs and matches the golden files", criterion_7);
    criterion(8, "cached rerun makes zero transport calls; exported script replays identically", criterion_8);
    criterion(9, "record-style fragment parses; missing item gets exactly one repair re-ask", criterion_9);
    criterion(10, "scale validation fixtures report their violation and exit non-zero", criterion_10);
    std::cout << (g_failed == 0 ? "ALL PASS" : std::to_string(g_failed) + " FAILED") << '\n';
    return g_failed == 0 ? 0 : 1;
}
