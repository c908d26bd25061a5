#include "phasefeat/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "phasefeat/error.hpp"

namespace phasefeat {

namespace {

template <class F>
auto stage(const char* name, F&& body) {
    try {
        return body();
    } catch (const DataError& e) {
        throw DataError(std::string("stage ") + name + ": " + e.what());
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("stage ") + name + ": " + e.what());
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("stage ") + name + ": " + e.what());
    }
}

class Stopwatch {
public:
    explicit Stopwatch(StageTiming& timing) : timing_(timing) {}
    void lap(std::string name) {
        const auto now = std::chrono::steady_clock::now();
        timing_.seconds.emplace_back(std::move(name),
                                     std::chrono::duration<double>(now - last_).count());
        last_ = now;
    }

private:
    StageTiming& timing_;
    std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

SelectionConfig selection_config(const PipelineConfig& cfg) {
    SelectionConfig s = cfg.selection;
    s.sfffs.knn_k = cfg.knn_k;
    return s;
}

std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace

LoadedCohort load_cohort(const std::filesystem::path& manifest, double dt) {
    LoadedCohort out;
    out.cohort = load_manifest(manifest);
    if (out.cohort.records.empty()) throw DataError("manifest " + manifest.string() + " lists no subjects");
    out.series.reserve(out.cohort.records.size());
    for (const auto& rec : out.cohort.records) {
        auto ts = load_roi_csv(rec.path, dt, rec.subject_id);
        if (!out.cohort.region_count) out.cohort.region_count = ts.regions();
        if (ts.regions() != *out.cohort.region_count)
            throw DataError("subject " + rec.subject_id + " has " + std::to_string(ts.regions()) +
                            " regions, cohort has " + std::to_string(*out.cohort.region_count));
        out.series.push_back(std::move(ts));
    }
    return out;
}

FeatureTable extract_table(const std::vector<RoiTimeSeries>& series,
                           const std::vector<ClassLabel>& labels, std::span<const std::size_t> rows,
                           const FeatureConfig& cfg, const ExtractionObserver& observer) {
    FeatureTable table;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& ts = series[rows[r]];
        auto ex = extract_subject(ts, cfg);
        if (r == 0) {
            table.layout = ex.features.layout;
            table.values = Matrix(rows.size(), table.layout.size());
        } else if (ex.features.values.size() != table.layout.size()) {
            throw DataError("subject " + ts.subject_id() + ": feature length mismatch");
        }
        std::copy(ex.features.values.begin(), ex.features.values.end(), table.values.row(r).begin());
        table.subject_ids.push_back(ts.subject_id());
        table.labels.push_back(labels[rows[r]]);
        if (observer) observer(rows[r], ex);
    }
    return table;
}

SelectionRun run_selection(const std::vector<RoiTimeSeries>& series,
                           const std::vector<ClassLabel>& labels, const PipelineConfig& cfg) {
    cfg.validate();
    SelectionRun run;
    run.split = stage("split", [&] { return stratified_split(labels, cfg.per_class_test, cfg.split_seed); });
    run.train = stage("extract", [&] {
        return extract_table(series, labels, run.split.train, cfg.feature_config());
    });
    run.outcome = stage("select", [&] { return select_features(run.train, selection_config(cfg)); });
    return run;
}

EvaluationRun run_evaluation(const std::vector<RoiTimeSeries>& series,
                             const std::vector<ClassLabel>& labels, const PipelineConfig& cfg,
                             const RunOptions& options) {
    cfg.validate();
    EvaluationRun run;
    Stopwatch clock(run.timing);

    run.split = stage("split", [&] { return stratified_split(labels, cfg.per_class_test, cfg.split_seed); });
    if (run.split.test.empty()) throw DataError("stage split: test set is empty");
    clock.lap("split");

    const auto fcfg = cfg.feature_config();
    const FeatureTable train = stage("extract", [&] { return extract_table(series, labels, run.split.train, fcfg); });
    const FeatureTable test = stage("extract", [&] { return extract_table(series, labels, run.split.test, fcfg); });
    run.layout = train.layout;
    clock.lap("extract");

    run.selection_skipped = options.skip_selection;
    if (options.skip_selection) {
        run.final_columns.resize(train.layout.size());
        std::iota(run.final_columns.begin(), run.final_columns.end(), std::size_t{0});
    } else {
        run.selection = stage("select", [&] { return select_features(train, selection_config(cfg)); });
        run.final_columns = run.selection->retained_columns;
        if (run.final_columns.empty()) {
            run.filter_fallback = true;
            run.final_columns = run.selection->candidate_columns;
        }
    }
    clock.lap("select");

    stage("classify", [&] {
        run.scaler = Standardizer::fit(train.select_columns(run.final_columns));
        if (run.scaler.kept.empty()) throw DataError("every retained feature is constant on the training set");
        const KnnModel model(run.scaler.apply(train.select_columns(run.final_columns)), train.labels,
                             cfg.knn_k);
        const Matrix test_z = run.scaler.apply(test.select_columns(run.final_columns));
        std::vector<ClassLabel> predicted;
        for (std::size_t r = 0; r < test.subjects(); ++r) {
            predicted.push_back(model.predict(test_z.row(r)));
            run.predictions.push_back({test.subject_ids[r], test.labels[r], predicted.back()});
        }
        run.confusion = confusion_matrix(test.labels, predicted);
        run.metrics = compute_metrics(run.confusion);
        return 0;
    });
    clock.lap("classify");
    return run;
}

std::vector<SplitRepeat> repeated_splits(const std::vector<RoiTimeSeries>& series,
                                         const std::vector<ClassLabel>& labels,
                                         const PipelineConfig& cfg, std::size_t count,
                                         const RunOptions& options) {
    std::vector<SplitRepeat> out;
    for (std::size_t i = 0; i < count; ++i) {
        PipelineConfig c = cfg;
        c.split_seed = cfg.split_seed + i;
        out.push_back({c.split_seed, run_evaluation(series, labels, c, options).metrics});
    }
    return out;
}

// ---------------------------------------------------------------------------

Json selection_json(const SelectionOutcome& outcome, const FeatureLayout& layout,
                    const SelectionConfig& cfg) {
    Json j;
    j["skipped"] = false;
    j["alpha"] = cfg.alpha;
    j["rule"] = cfg.rule == CombineRule::Union ? "union" : "intersection";
    j["selected_sets"] = Json::array();
    for (auto s : outcome.sets.selected) j["selected_sets"].push_back(std::string(to_string(s)));
    j["criterion"] = outcome.sets.criterion;
    j["trace"] = Json::array();
    for (const auto& step : outcome.sets.trace)
        j["trace"].push_back({{"step", step.kind == StepKind::Add ? "add" : "remove"},
                              {"set", std::string(to_string(step.set))},
                              {"criterion", step.criterion}});
    j["candidate_features"] = outcome.candidate_columns.size();
    j["retained_features"] = outcome.retained_columns.size();
    Json counts;
    for (std::size_t p = 0; p < 3; ++p)
        counts[std::string(pair_name(p))] = outcome.significance.pairwise_significant[p];
    j["pairwise_significant"] = counts;
    j["degenerate_features"] = outcome.significance.degenerate_features;
    j["retained_indices"] = outcome.retained_columns;
    Json per_set;
    for (auto s : kAllFeatureSets) {
        const auto r = layout.range(s);
        std::size_t n = 0;
        for (auto c : outcome.retained_columns) n += (c >= r.begin && c < r.end);
        per_set[std::string(to_string(s))] = n;
    }
    j["retained_per_set"] = per_set;
    return j;
}

Json metrics_json(const MetricsReport& m) {
    Json j;
    Json per;
    for (std::size_t c = 0; c < 3; ++c) {
        const auto& pc = m.per_class[c];
        per[std::string(to_string(kAllClasses[c]))] = {
            {"TP", pc.tp}, {"FP", pc.fp}, {"FN", pc.fn}, {"TN", pc.tn},
            {"AC", optional_number(pc.accuracy)}, {"PR", optional_number(pc.precision)},
            {"SP", optional_number(pc.specificity)}, {"SE", optional_number(pc.sensitivity)}};
    }
    j["per_class"] = per;
    j["macro"] = {{"AC", optional_number(m.macro_accuracy)},
                  {"PR", optional_number(m.macro_precision)},
                  {"SP", optional_number(m.macro_specificity)},
                  {"SE", optional_number(m.macro_sensitivity)}};
    j["raw_accuracy"] = m.raw_accuracy;
    return j;
}

Json repeats_json(const std::vector<SplitRepeat>& repeats) {
    Json j;
    Json rows = Json::array();
    double macro = 0.0, raw = 0.0;
    for (const auto& r : repeats) {
        rows.push_back({{"split_seed", r.split_seed},
                        {"macro_accuracy", optional_number(r.metrics.macro_accuracy)},
                        {"raw_accuracy", r.metrics.raw_accuracy}});
        macro += r.metrics.macro_accuracy.value_or(0.0);
        raw += r.metrics.raw_accuracy;
    }
    const double n = repeats.empty() ? 1.0 : static_cast<double>(repeats.size());
    j["splits"] = rows;
    j["mean_macro_accuracy"] = macro / n;
    j["mean_raw_accuracy"] = raw / n;
    return j;
}

Json report_json(const EvaluationRun& run, const LoadedCohort& data, const PipelineConfig& cfg) {
    Json j;
    j["tool"] = "phasefeat";
    j["version"] = kVersion;
    Json config;
    for (const auto& [k, v] : cfg.entries()) config[k] = v;
    j["config"] = config;

    Json cohort;
    cohort["subjects"] = data.series.size();
    cohort["regions"] = data.series.empty() ? 0 : data.series.front().regions();
    cohort["timepoints"] = data.series.empty() ? 0 : data.series.front().timepoints();
    std::array<std::size_t, 3> counts{};
    for (const auto& r : data.cohort.records) ++counts[class_index(r.label)];
    for (std::size_t c = 0; c < 3; ++c) cohort["class_counts"][std::string(to_string(kAllClasses[c]))] = counts[c];
    j["cohort"] = cohort;

    Json split;
    split["train"] = Json::array();
    split["test"] = Json::array();
    for (auto i : run.split.train) split["train"].push_back(data.cohort.records[i].subject_id);
    for (auto i : run.split.test) split["test"].push_back(data.cohort.records[i].subject_id);
    j["split"] = split;

    if (run.selection) {
        j["selection"] = selection_json(*run.selection, run.layout, selection_config(cfg));
        j["selection"]["filter_fallback"] = run.filter_fallback;
        if (run.filter_fallback)
            j["selection"]["note"] = "no feature passed the significance filter; every feature of the selected sets was used";
    } else {
        j["selection"] = {{"skipped", true},
                          {"note", "selection skipped: all 6 sets and all features used"},
                          {"retained_features", run.final_columns.size()}};
    }

    Json stdz;
    stdz["features"] = run.final_columns.size();
    stdz["kept"] = run.scaler.kept.size();
    Json dropped = Json::array();
    for (auto d : run.scaler.dropped) dropped.push_back(run.final_columns[d]);
    stdz["dropped_indices"] = dropped;
    stdz["mean"] = run.scaler.mean;
    stdz["stddev"] = run.scaler.stddev;
    j["standardization"] = stdz;

    Json cm;
    cm["layout"] = "rows=predicted, columns=true";
    cm["classes"] = {"ALZ", "MCI", "NORMAL"};
    cm["counts"] = run.confusion.counts;
    j["confusion_matrix"] = cm;
    j["metrics"] = metrics_json(run.metrics);

    Json preds = Json::array();
    for (const auto& p : run.predictions)
        preds.push_back({{"subject_id", p.subject_id},
                         {"true", std::string(to_string(p.truth))},
                         {"predicted", std::string(to_string(p.predicted))}});
    j["predictions"] = preds;
    return j;
}

void write_confusion_csv(const std::filesystem::path& path, const ConfusionMatrix& cm) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    for (const auto& row : cm.counts) out << row[0] << ',' << row[1] << ',' << row[2] << '\n';
}

ConfusionMatrix read_confusion_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open confusion matrix " + path.string());
    ConfusionMatrix cm;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (row >= 3) throw DataError(path.string() + ": more than 3 rows");
        std::stringstream ss(line);
        std::string cell;
        std::size_t col = 0;
        while (std::getline(ss, cell, ',')) {
            const auto first = cell.find_first_not_of(" \t\r");
            const auto last = cell.find_last_not_of(" \t\r");
            const std::string v = first == std::string::npos ? "" : cell.substr(first, last - first + 1);
            if (col >= 3) throw DataError(path.string() + ": row " + std::to_string(row + 1) + " has more than 3 columns");
            std::size_t used = 0;
            long long n = -1;
            try {
                n = std::stoll(v, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (v.empty() || used != v.size() || n < 0)
                throw DataError(path.string() + ": cell (" + std::to_string(row + 1) + "," +
                                std::to_string(col + 1) + ") is not a non-negative integer: '" + v + "'");
            cm.counts[row][col++] = n;
        }
        if (col != 3) throw DataError(path.string() + ": row " + std::to_string(row + 1) + " needs 3 columns");
        ++row;
    }
    if (row != 3) throw DataError(path.string() + ": expected 3 rows, got " + std::to_string(row));
    return cm;
}

std::string format_metrics(const MetricsReport& m) {
    auto pct = [](const std::optional<double>& v) {
        if (!v) return std::string("   n/a");
        char buf[16];
        std::snprintf(buf, sizeof buf, "%5.1f%%", 100.0 * *v);
        return std::string(buf);
    };
    std::ostringstream out;
    out << "class     AC      PR      SP      SE\n";
    for (std::size_t c = 0; c < 3; ++c) {
        const auto& pc = m.per_class[c];
        char name[16];
        std::snprintf(name, sizeof name, "%-7s", std::string(to_string(kAllClasses[c])).c_str());
        out << name << ' ' << pct(pc.accuracy) << "  " << pct(pc.precision) << "  "
            << pct(pc.specificity) << "  " << pct(pc.sensitivity) << '\n';
    }
    out << "macro   " << pct(m.macro_accuracy) << "  " << pct(m.macro_precision) << "  "
        << pct(m.macro_specificity) << "  " << pct(m.macro_sensitivity) << '\n';
    out << "raw accuracy " << pct(m.raw_accuracy) << '\n';
    return out.str();
}

void write_feature_table(const std::filesystem::path& path, const FeatureTable& table) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << "subject_id,label";
    for (const auto& l : table.layout.labels()) out << ',' << l;
    out << '\n';
    std::string line;
    for (std::size_t r = 0; r < table.subjects(); ++r) {
        line = table.subject_ids[r] + "," + std::to_string(static_cast<int>(table.labels[r]));
        for (double v : table.values.row(r)) {
            line += ',';
            line += fmt17(v);
        }
        line += '\n';
        out << line;
    }
    if (!out) throw DataError("write failed for " + path.string());
}

void write_feature_index(const std::filesystem::path& path, const FeatureLayout& layout) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << "set,begin,end\n";
    for (auto s : kAllFeatureSets) {
        const auto r = layout.range(s);
        out << to_string(s) << ',' << r.begin << ',' << r.end << '\n';
    }
}

void write_json(const std::filesystem::path& path, const Json& json) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << json.dump(2) << '\n';
}

}  // namespace phasefeat
