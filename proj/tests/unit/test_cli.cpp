#include <doctest.h>

#include <sstream>

#include "maims/cli.hpp"
#include "maims/eval.hpp"
#include "maims/records.hpp"
#include "support/test_support.hpp"

using namespace maims;
using maims::testing::source_path;
using maims::testing::TempDir;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result invoke(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

/// Sample config rewritten to absolute asset paths, with cache and output in `dir`.
std::string write_config(const TempDir& dir, nlohmann::json overrides = nlohmann::json::object()) {
    nlohmann::json c = {{"scale", source_path("assets/sample_scale.json")},
                        {"corpus", source_path("assets/sample_corpus.jsonl")},
                        {"task", source_path("assets/sample_task.json")},
                        {"cache_dir", dir.file("cache")},
                        {"output_dir", dir.file("out")},
                        {"workers", 2},
                        {"roles", {{"default", {{"backend", "mock"}, {"script", source_path("assets/sample_mock_script.json")}}}}}};
    c.merge_patch(overrides);
    dir.write("config.json", c.dump(2));
    return dir.file("config.json");
}

} // namespace

TEST_CASE("validate") {
    auto ok = invoke({"validate", source_path("assets/sample_scale.json")});
    CHECK(ok.code == 0);
    CHECK(ok.out == "OK\n");

    auto dup = invoke({"validate", source_path("tests/fixtures/scale_duplicate_id.json")});
    CHECK(dup.code == 1);
    CHECK(dup.out == "duplicate item id: 13\n");

    CHECK(invoke({"validate", source_path("tests/fixtures/task_bad_positive.json")}).code == 1);
    CHECK(invoke({"validate", source_path("assets/sample_task.json")}).code == 0);
    CHECK(invoke({"validate", source_path("assets/sample_corpus.jsonl"), "--task", source_path("assets/sample_task.json")})
              .code == 0);
    CHECK(invoke({"validate", "/no/such/file.json"}).code == 2);
}

TEST_CASE("run writes traces and a report") {
    TempDir dir;
    const std::string config = write_config(dir);
    auto r = invoke({"run", "--config", config, "--out", dir.file("run1")});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    auto records = read_traces(dir.file("run1/traces.jsonl"));
    CHECK(records.size() == 6);
    auto report = report_from_json(nlohmann::json::parse(text::read_file(dir.file("run1/report.json"))));
    CHECK(report.mode == Mode::Full);
    CHECK(report.accuracy == 1.0);
    CHECK(report.config_digest.size() == 64);
    CHECK(std::filesystem::exists(dir.file("run1/merged_config.json")));
    CHECK(r.out.find("weighted_f1") != std::string::npos);

    SUBCASE("mode flag labels the report") {
        auto ns = invoke({"run", "--config", config, "--mode", "no_scale", "--out", dir.file("ns")});
        REQUIRE(ns.code == 0);
        auto j = nlohmann::json::parse(text::read_file(dir.file("ns/report.json")));
        CHECK(j["mode"] == "no_scale");
    }
    SUBCASE("default output directory") {
        REQUIRE(invoke({"run", "--config", config, "--n", "2"}).code == 0);
        const auto base = std::filesystem::path(dir.file("out")) / "depression_sample" / "full";
        REQUIRE(std::filesystem::is_directory(base));
        int runs = 0;
        for (const auto& e : std::filesystem::directory_iterator(base)) {
            ++runs;
            CHECK(read_traces((e.path() / "traces.jsonl").string()).size() == 2);
        }
        CHECK(runs == 1);
    }
    SUBCASE("eval re-scores the traces") {
        auto e = invoke({"eval", "--config", config, "--traces", dir.file("run1/traces.jsonl"), "--report",
                      dir.file("re.json")});
        REQUIRE(e.code == 0);
        CHECK(nlohmann::json::parse(text::read_file(dir.file("re.json"))) ==
              nlohmann::json::parse(text::read_file(dir.file("run1/report.json"))));
    }
}

TEST_CASE("run errors map to exit codes") {
    TempDir dir;
    SUBCASE("missing scale file") {
        auto r = invoke({"run", "--config", write_config(dir, {{"scale", dir.file("missing_scale.json")}})});
        CHECK(r.code == 2);
        CHECK(r.err.find(dir.file("missing_scale.json")) != std::string::npos);
    }
    SUBCASE("backend miss") {
        dir.write("empty_script.json", R"({"entries": {}, "rules": []})");
        auto r = invoke({"run", "--config",
                      write_config(dir, {{"roles", {{"default", {{"script", dir.file("empty_script.json")}}}}}}),
                      "--no-cache", "--out", dir.file("o")});
        CHECK(r.code == 3);
        CHECK(r.err.find("MockScriptMiss") != std::string::npos);
    }
    SUBCASE("credentials in config") {
        auto r = invoke({"run", "--config", write_config(dir, {{"roles", {{"default", {{"api_key", "sk-x"}}}}}})});
        CHECK(r.code == 2);
        CHECK(r.err.find("MAIMS_API_KEY") != std::string::npos);
    }
    SUBCASE("bad flags") {
        CHECK(invoke({"run"}).code == 2);
        CHECK(invoke({"frobnicate"}).code == 2);
        CHECK(invoke({"run", "--config", write_config(dir), "--mode", "bogus"}).code == 2);
    }
}

TEST_CASE("ablate") {
    TempDir dir;
    const std::string config = write_config(dir);
    auto r = invoke({"ablate", "--config", config, "--n", "5", "--out", dir.file("abl")});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    for (const char* mode : {"full", "no_scale", "no_discriminator"}) {
        auto j = nlohmann::json::parse(text::read_file(dir.file(std::string("abl/") + mode + "/report.json")));
        CHECK(j["n_evaluated"] == 5);
        CHECK(j["mode"] == mode);
    }
    CHECK(std::filesystem::exists(dir.file("abl/summary.txt")));
    auto again = invoke({"ablate", "--config", config, "--n", "5", "--out", dir.file("abl2")});
    REQUIRE(again.code == 0);
    CHECK(text::read_file(dir.file("abl/summary.txt")) == text::read_file(dir.file("abl2/summary.txt")));

    dir.write("unlabeled.jsonl", R"({"post_id":"u1","text":"hello"})");
    auto unlabeled = invoke({"ablate", "--config", write_config(dir, {{"corpus", dir.file("unlabeled.jsonl")}})});
    CHECK(unlabeled.code == 2);
    CHECK(unlabeled.err.find("gold labels required") != std::string::npos);
}

TEST_CASE("show-trace") {
    TempDir dir;
    REQUIRE(invoke({"run", "--config", write_config(dir), "--out", dir.file("r")}).code == 0);
    auto shown = invoke({"show-trace", dir.file("r/traces.jsonl"), "p1", "--scale", source_path("assets/sample_scale.json")});
    REQUIRE(shown.code == 0);
    CHECK(shown.out.find("('1', ['direct_mention', 'I have felt low nearly every day.") != std::string::npos);
    CHECK(shown.out.find("('3', ") != std::string::npos);
    CHECK(shown.out.find("Final answer: Yes") != std::string::npos);
    CHECK(invoke({"show-trace", dir.file("r/traces.jsonl"), "nope"}).code == 1);

    FinalRecord rec = read_traces(dir.file("r/traces.jsonl")).at(0);
    rec.scale_response->items[0].evidence_verified[0] = false;
    const std::string rendered = cli::render_trace(rec);
    CHECK(rendered.find("\xE2\x9A\xA0 UNVERIFIED") != std::string::npos);
    for (const auto& item : rec.scale_response->items) CHECK(rendered.find(item.item_id) != std::string::npos);
}

TEST_CASE("cache subcommands") {
    TempDir dir;
    const std::string config = write_config(dir);
    CHECK(invoke({"cache", "--config", config, "export-script", "--out", dir.file("s.json")}).code == 1);
    REQUIRE(invoke({"run", "--config", config, "--out", dir.file("r")}).code == 0);

    auto stats = invoke({"cache", "--config", config, "stats"});
    CHECK(stats.code == 0);
    CHECK(stats.out.find("poster: ") != std::string::npos);

    auto exp = invoke({"cache", "--cache-dir", dir.file("cache"), "export-script", "--out", dir.file("s.json")});
    CHECK(exp.code == 0);
    CHECK_FALSE(MockScript::load(dir.file("s.json")).entries.empty());

    auto clear = invoke({"cache", "--config", config, "clear"});
    CHECK(clear.code == 0);
    CHECK(ResponseCache(dir.file("cache")).stats().entries == 0);
}
