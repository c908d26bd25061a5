// phasefeat command-line front end.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "phasefeat/error.hpp"
#include "phasefeat/pipeline.hpp"
#include "phasefeat/synth.hpp"

namespace fs = std::filesystem;
using namespace phasefeat;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kInternal = 3 };

struct Common {
    std::string config;
    std::string manifest;
    std::string out;
    std::optional<std::uint64_t> seed;
};

PipelineConfig load_config(const Common& c) {
    PipelineConfig cfg = c.config.empty() ? PipelineConfig{} : PipelineConfig::load(c.config);
    if (c.seed) cfg.set_all_seeds(*c.seed);
    cfg.validate();
    return cfg;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());
}

void require(const std::string& value, const char* flag) {
    if (value.empty()) throw ConfigError(std::string(flag) + " is required");
}

int cmd_synth(const Common& c, const std::string& preset) {
    require(c.out, "--out");
    PipelineConfig cfg = load_config(c);
    if (!preset.empty()) cfg.synth_preset = preset;
    const auto scfg = cfg.synth_config();
    const auto cohort = generate_cohort(scfg, c.out);
    std::cout << "wrote " << cohort.records.size() << " subjects (" << scfg.regions << " regions x "
              << scfg.timepoints << " timepoints, preset " << cfg.synth_preset << ") to "
              << (fs::path(c.out) / "manifest.csv").string() << '\n';
    return kOk;
}

int cmd_features(const Common& c, bool emit_matrices) {
    require(c.manifest, "--manifest");
    require(c.out, "--out");
    const PipelineConfig cfg = load_config(c);
    const auto data = load_cohort(c.manifest, cfg.dt);
    const auto labels = data.cohort.labels();
    ensure_dir(c.out);
    const fs::path out = c.out;
    if (emit_matrices) ensure_dir(out / "matrices");

    std::vector<std::size_t> rows(data.series.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    ExtractionObserver observer;
    if (emit_matrices)
        observer = [&](std::size_t row, const SubjectExtraction& ex) {
            const auto& id = data.series[row].subject_id();
            write_matrix_csv(out / "matrices" / (id + "_plv.csv"), ex.plv.values);
            write_matrix_csv(out / "matrices" / (id + "_msc.csv"), ex.msc.values);
        };
    const auto table = extract_table(data.series, labels, rows, cfg.feature_config(), observer);
    write_feature_table(out / "features.csv", table);
    write_feature_index(out / "features_index.csv", table.layout);
    std::cout << "wrote " << table.subjects() << " x " << table.layout.size() << " feature table to "
              << (out / "features.csv").string() << '\n';
    return kOk;
}

int cmd_select(const Common& c) {
    require(c.manifest, "--manifest");
    require(c.out, "--out");
    const PipelineConfig cfg = load_config(c);
    const auto data = load_cohort(c.manifest, cfg.dt);
    const auto run = run_selection(data.series, data.cohort.labels(), cfg);
    ensure_dir(c.out);
    SelectionConfig scfg = cfg.selection;
    scfg.sfffs.knn_k = cfg.knn_k;
    Json j = selection_json(run.outcome, run.train.layout, scfg);
    Json ids = Json::array();
    for (const auto& id : run.train.subject_ids) ids.push_back(id);
    j["train_subjects"] = ids;
    write_json(fs::path(c.out) / "selection.json", j);
    std::cout << "selected sets:";
    for (auto s : run.outcome.sets.selected) std::cout << ' ' << to_string(s);
    std::cout << "\ncriterion " << run.outcome.sets.criterion << ", retained "
              << run.outcome.retained_columns.size() << " of " << run.outcome.candidate_columns.size()
              << " features\n";
    return kOk;
}

int cmd_run(const Common& c, bool skip_selection, std::size_t repeats) {
    require(c.manifest, "--manifest");
    require(c.out, "--out");
    const PipelineConfig cfg = load_config(c);
    const auto data = load_cohort(c.manifest, cfg.dt);
    const auto run = run_evaluation(data.series, data.cohort.labels(), cfg, {skip_selection});
    ensure_dir(c.out);
    const fs::path out = c.out;
    write_json(out / "report.json", report_json(run, data, cfg));
    write_confusion_csv(out / "confusion.csv", run.confusion);
    Json timing;
    for (const auto& [name, secs] : run.timing.seconds) timing[name] = secs;
    write_json(out / "timing.json", timing);
    if (skip_selection) std::cout << "selection skipped: all 6 sets and all features used\n";
    if (run.filter_fallback)
        std::cout << "no feature passed the significance filter; every feature of the selected sets was used\n";
    std::cout << format_metrics(run.metrics);
    if (repeats > 0) {
        const auto rep = repeated_splits(data.series, data.cohort.labels(), cfg, repeats, {skip_selection});
        const Json j = repeats_json(rep);
        write_json(out / "repeated_splits.json", j);
        std::cout << "repeated splits (" << repeats << "): mean macro accuracy "
                  << 100.0 * j["mean_macro_accuracy"].get<double>() << "%, mean raw accuracy "
                  << 100.0 * j["mean_raw_accuracy"].get<double>() << "%\n";
    }
    return kOk;
}

int cmd_metrics(const std::string& input) {
    require(input, "--input");
    const auto cm = read_confusion_csv(input);
    std::cout << format_metrics(compute_metrics(cm));
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fMRI regional phase/envelope feature pipeline"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    Common common;
    std::string preset;
    std::string input;
    bool skip_selection = false;
    bool emit_matrices = false;

    auto add_common = [&](CLI::App* sub, bool needs_manifest) {
        sub->add_option("--config", common.config, "key = value configuration file")->check(CLI::ExistingFile);
        if (needs_manifest) sub->add_option("--manifest", common.manifest, "subject_id,label,path manifest");
        sub->add_option("--out", common.out, "output directory");
        sub->add_option("--seed", common.seed, "override every seed");
    };

    auto* synth = app.add_subcommand("synth", "generate a synthetic cohort");
    add_common(synth, false);
    synth->add_option("--preset", preset, "separable | hard | null");

    auto* features = app.add_subcommand("features", "extract the feature table");
    add_common(features, true);
    features->add_flag("--emit-matrices", emit_matrices, "also write per-subject PLV and MSC matrices");

    auto* select = app.add_subcommand("select", "run set search and significance filtering on the training split");
    add_common(select, true);

    auto* run = app.add_subcommand("run", "full split / select / classify / evaluate protocol");
    add_common(run, true);
    run->add_flag("--skip-selection", skip_selection, "feed every feature to the classifier");
    std::size_t repeats = 0;
    run->add_option("--repeat-splits", repeats, "also evaluate this many split seeds (reporting only)");

    auto* metrics = app.add_subcommand("metrics", "metrics of a 3x3 predicted-by-true confusion CSV");
    metrics->add_option("--input", input, "confusion matrix CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (synth->parsed()) return cmd_synth(common, preset);
        if (features->parsed()) return cmd_features(common, emit_matrices);
        if (select->parsed()) return cmd_select(common);
        if (run->parsed()) return cmd_run(common, skip_selection, repeats);
        if (metrics->parsed()) return cmd_metrics(input);
    } catch (const ConfigError& e) {
        std::cerr << "phasefeat: configuration error: " << e.what() << '\n';
        return kUsage;
    } catch (const DataError& e) {
        std::cerr << "phasefeat: data error: " << e.what() << '\n';
        return kData;
    } catch (const std::exception& e) {
        std::cerr << "phasefeat: internal error: " << e.what() << '\n';
        return kInternal;
    }
    return kUsage;
}
