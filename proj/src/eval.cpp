#include "maims/eval.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

#include "maims/error.hpp"

namespace maims {

using nlohmann::json;

int ConfusionCounts::get(const std::string& gold, const std::string& pred) const {
    auto it = counts.find({gold, pred});
    return it == counts.end() ? 0 : it->second;
}

int ConfusionCounts::total() const {
    int t = 0;
    for (const auto& [k, v] : counts) t += v;
    return t;
}

int ConfusionCounts::trace() const {
    int t = 0;
    for (const auto& [k, v] : counts) {
        if (k.first == k.second) t += v;
    }
    return t;
}

namespace {

void check_inputs(const std::vector<std::string>& golds, const std::vector<std::string>& preds) {
    if (golds.size() != preds.size()) throw LengthMismatch(golds.size(), preds.size());
    if (golds.empty()) throw EmptyInput();
}

double safe_div(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

} // namespace

ClassificationMetrics classification_metrics(const std::vector<std::string>& golds,
                                             const std::vector<std::string>& preds,
                                             const std::vector<std::string>& label_order) {
    check_inputs(golds, preds);
    ClassificationMetrics m;
    m.confusion.labels = label_order;
    auto note = [&](const std::string& l) {
        if (std::find(m.confusion.labels.begin(), m.confusion.labels.end(), l) == m.confusion.labels.end())
            m.confusion.labels.push_back(l);
    };
    for (std::size_t i = 0; i < golds.size(); ++i) {
        note(golds[i]);
        note(preds[i]);
        ++m.confusion.counts[{golds[i], preds[i]}];
    }

    const double n = static_cast<double>(golds.size());
    for (const auto& c : m.confusion.labels) {
        int tp = 0, fp = 0, fn = 0;
        for (const auto& [key, count] : m.confusion.counts) {
            const bool g = key.first == c;
            const bool p = key.second == c;
            if (g && p) tp += count;
            else if (p) fp += count;
            else if (g) fn += count;
        }
        ClassMetrics cm;
        cm.support = tp + fn;
        cm.precision = safe_div(tp, tp + fp);
        cm.recall = safe_div(tp, tp + fn);
        cm.f1 = safe_div(2.0 * cm.precision * cm.recall, cm.precision + cm.recall);
        m.weighted_f1 += (cm.support / n) * cm.f1;
        m.per_class.emplace_back(c, cm);
    }
    m.accuracy = m.confusion.trace() / n;
    return m;
}

double weighted_f1(const std::vector<std::string>& golds, const std::vector<std::string>& preds) {
    check_inputs(golds, preds);
    // Label sets are tiny, so a linear intern table beats hashing.
    std::vector<const std::string*> labels;
    auto index = [&](const std::string& l) {
        for (std::size_t k = 0; k < labels.size(); ++k)
            if (*labels[k] == l) return k;
        labels.push_back(&l);
        return labels.size() - 1;
    };
    std::vector<int> tp, fp, fn;
    auto grow = [&] {
        tp.resize(labels.size());
        fp.resize(labels.size());
        fn.resize(labels.size());
    };
    for (std::size_t i = 0; i < golds.size(); ++i) {
        const std::size_t g = index(golds[i]);
        const std::size_t p = index(preds[i]);
        grow();
        if (g == p) {
            ++tp[g];
        } else {
            ++fn[g];
            ++fp[p];
        }
    }
    const double n = static_cast<double>(golds.size());
    double total = 0.0;
    for (std::size_t k = 0; k < labels.size(); ++k) {
        const int support = tp[k] + fn[k];
        if (support == 0) continue;
        const double precision = safe_div(tp[k], tp[k] + fp[k]);
        const double recall = safe_div(tp[k], support);
        total += (support / n) * safe_div(2.0 * precision * recall, precision + recall);
    }
    return total;
}

double accuracy(const std::vector<std::string>& golds, const std::vector<std::string>& preds) {
    check_inputs(golds, preds);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < golds.size(); ++i) hits += golds[i] == preds[i] ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(golds.size());
}

EvalReport evaluate(const std::vector<FinalRecord>& records, const Corpus& corpus, const TaskSpec& task,
                    bool include_failed, const std::string& config_digest) {
    EvalReport report;
    report.task_id = task.task_id;
    report.mode = records.empty() ? Mode::Full : records.front().mode;
    report.include_failed = include_failed;
    report.config_digest = config_digest;
    report.n_records = static_cast<int>(records.size());

    std::vector<std::string> golds_all, preds_all, golds_ok, preds_ok;
    for (const auto& r : records) {
        const Post* post = corpus.find(r.post_id);
        if (post == nullptr) throw UnknownRecord(r.post_id);
        if (!post->gold_label) throw MissingGold(r.post_id);
        const std::string pred = task.canonical_label(r.analysis.label).value_or(r.analysis.label);
        golds_all.push_back(*post->gold_label);
        preds_all.push_back(pred);
        if (r.status == Status::Failed) {
            ++report.n_failed_status;
        } else {
            golds_ok.push_back(*post->gold_label);
            preds_ok.push_back(pred);
        }
    }

    auto& golds = include_failed ? golds_all : golds_ok;
    auto& preds = include_failed ? preds_all : preds_ok;
    auto& other_golds = include_failed ? golds_ok : golds_all;
    auto& other_preds = include_failed ? preds_ok : preds_all;

    report.n_evaluated = static_cast<int>(golds.size());
    report.confusion.labels = task.labels;
    if (!golds.empty()) {
        auto m = classification_metrics(golds, preds, task.labels);
        report.per_class = std::move(m.per_class);
        report.weighted_f1 = m.weighted_f1;
        report.accuracy = m.accuracy;
        report.confusion = std::move(m.confusion);
    } else {
        for (const auto& l : task.labels) report.per_class.emplace_back(l, ClassMetrics{});
    }

    report.alternate.include_failed = !include_failed;
    report.alternate.n_evaluated = static_cast<int>(other_golds.size());
    if (!other_golds.empty()) {
        auto m = classification_metrics(other_golds, other_preds, task.labels);
        report.alternate.weighted_f1 = m.weighted_f1;
        report.alternate.accuracy = m.accuracy;
    }
    return report;
}

json report_to_json(const EvalReport& r) {
    json per_class = json::array();
    for (const auto& [label, m] : r.per_class) {
        per_class.push_back({{"label", label},
                             {"precision", m.precision},
                             {"recall", m.recall},
                             {"f1", m.f1},
                             {"support", m.support}});
    }
    json matrix = json::array();
    for (const auto& g : r.confusion.labels) {
        json row = json::array();
        for (const auto& p : r.confusion.labels) row.push_back(r.confusion.get(g, p));
        matrix.push_back(std::move(row));
    }
    return {{"report_schema_version", 1},
            {"task_id", r.task_id},
            {"mode", std::string(to_token(r.mode))},
            {"include_failed", r.include_failed},
            {"n_records", r.n_records},
            {"n_evaluated", r.n_evaluated},
            {"n_failed_status", r.n_failed_status},
            {"weighted_f1", r.weighted_f1},
            {"accuracy", r.accuracy},
            {"per_class", std::move(per_class)},
            {"confusion", {{"labels", r.confusion.labels}, {"rows_gold_cols_pred", std::move(matrix)}}},
            {"alternate",
             {{"include_failed", r.alternate.include_failed},
              {"n_evaluated", r.alternate.n_evaluated},
              {"weighted_f1", r.alternate.weighted_f1},
              {"accuracy", r.alternate.accuracy}}},
            {"config_digest", r.config_digest}};
}

EvalReport report_from_json(const json& j) {
    EvalReport r;
    r.task_id = j.at("task_id").get<std::string>();
    r.mode = mode_from_token(j.at("mode").get<std::string>()).value_or(Mode::Full);
    r.include_failed = j.at("include_failed").get<bool>();
    r.n_records = j.value("n_records", 0);
    r.n_evaluated = j.at("n_evaluated").get<int>();
    r.n_failed_status = j.at("n_failed_status").get<int>();
    r.weighted_f1 = j.at("weighted_f1").get<double>();
    r.accuracy = j.at("accuracy").get<double>();
    for (const auto& c : j.at("per_class")) {
        r.per_class.emplace_back(c.at("label").get<std::string>(),
                                 ClassMetrics{c.at("precision").get<double>(), c.at("recall").get<double>(),
                                              c.at("f1").get<double>(), c.at("support").get<int>()});
    }
    const auto& conf = j.at("confusion");
    r.confusion.labels = conf.at("labels").get<std::vector<std::string>>();
    const auto& rows = conf.at("rows_gold_cols_pred");
    for (std::size_t g = 0; g < r.confusion.labels.size(); ++g) {
        for (std::size_t p = 0; p < r.confusion.labels.size(); ++p) {
            int v = rows.at(g).at(p).get<int>();
            if (v != 0) r.confusion.counts[{r.confusion.labels[g], r.confusion.labels[p]}] = v;
        }
    }
    const auto& alt = j.at("alternate");
    r.alternate.include_failed = alt.at("include_failed").get<bool>();
    r.alternate.n_evaluated = alt.at("n_evaluated").get<int>();
    r.alternate.weighted_f1 = alt.at("weighted_f1").get<double>();
    r.alternate.accuracy = alt.at("accuracy").get<double>();
    r.config_digest = j.value("config_digest", "");
    return r;
}

std::string format_summary_table(const std::vector<EvalReport>& reports) {
    std::ostringstream out;
    out << std::left << std::setw(18) << "mode" << std::right << std::setw(11) << "n_eval" << std::setw(9)
        << "failed" << std::setw(13) << "weighted_f1" << std::setw(10) << "accuracy" << std::setw(16)
        << "wf1_alt" << '\n';
    out << std::string(77, '-') << '\n';
    out << std::fixed << std::setprecision(4);
    for (const auto& r : reports) {
        out << std::left << std::setw(18) << to_token(r.mode) << std::right << std::setw(11) << r.n_evaluated
            << std::setw(9) << r.n_failed_status << std::setw(13) << r.weighted_f1 << std::setw(10) << r.accuracy
            << std::setw(16) << r.alternate.weighted_f1 << '\n';
    }
    out << "(wf1_alt: weighted F1 with failed-status records "
        << (reports.empty() || reports.front().include_failed ? "excluded" : "included") << ")\n";
    return out.str();
}

std::vector<AblationRun> run_ablation(const Corpus& corpus, const MentalScale& scale, const TaskSpec& task,
                                      const PipelineConfig& config, const RoleClients& clients, std::size_t n,
                                      int workers, bool include_failed, const std::string& config_digest) {
    if (n < 1) throw ConfigError("ablation prefix n must be >= 1");
    const Corpus subset = take_prefix(corpus, n);
    std::vector<AblationRun> runs;
    for (Mode mode : {Mode::Full, Mode::NoScale, Mode::NoDiscriminator}) {
        PipelineConfig cfg = config;
        cfg.mode = mode;
        Pipeline pipeline(scale, task, cfg, clients);
        AblationRun run;
        run.mode = mode;
        run.records = run_corpus(pipeline, subset, workers);
        run.report = evaluate(run.records, subset, task, include_failed, config_digest);
        run.report.mode = mode;
        runs.push_back(std::move(run));
    }
    return runs;
}

} // namespace maims
