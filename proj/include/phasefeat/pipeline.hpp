#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "phasefeat/classify.hpp"
#include "phasefeat/config.hpp"
#include "phasefeat/dataset.hpp"
#include "phasefeat/ingest.hpp"
#include "phasefeat/selection.hpp"

namespace phasefeat {

inline constexpr const char* kVersion = "0.1.0";

struct LoadedCohort {
    SubjectCohort cohort;
    std::vector<RoiTimeSeries> series;  // one per record, same order
};

/// Loads every series of a manifest. Throws DataError on unreadable files or
/// inconsistent region counts.
LoadedCohort load_cohort(const std::filesystem::path& manifest, double dt);

/// Called after each subject is extracted; receives the subject's row index.
using ExtractionObserver = std::function<void(std::size_t, const SubjectExtraction&)>;

/// Feature table for `rows` of `series`, in the given order.
FeatureTable extract_table(const std::vector<RoiTimeSeries>& series,
                           const std::vector<ClassLabel>& labels, std::span<const std::size_t> rows,
                           const FeatureConfig& cfg, const ExtractionObserver& observer = {});

struct StageTiming {
    std::vector<std::pair<std::string, double>> seconds;
};

struct SelectionRun {
    Split split;
    FeatureTable train;
    SelectionOutcome outcome;
};

/// Split, extract the training subjects, select sets and features.
SelectionRun run_selection(const std::vector<RoiTimeSeries>& series,
                           const std::vector<ClassLabel>& labels, const PipelineConfig& cfg);

struct Prediction {
    std::string subject_id;
    ClassLabel truth;
    ClassLabel predicted;
};

struct EvaluationRun {
    Split split;
    bool selection_skipped = false;
    std::optional<SelectionOutcome> selection;
    bool filter_fallback = false;  // nothing passed the t-test filter; all candidate columns used
    std::vector<std::size_t> final_columns;  // indices into the full feature vector
    Standardizer scaler;                     // over final_columns
    std::vector<Prediction> predictions;
    ConfusionMatrix confusion;
    MetricsReport metrics;
    FeatureLayout layout;
    StageTiming timing;
};

struct RunOptions {
    bool skip_selection = false;
};

/// Full protocol: split -> extract -> select on train -> standardize ->
/// KNN -> confusion matrix -> metrics. Test subjects are only ever passed
/// through the fitted transforms.
EvaluationRun run_evaluation(const std::vector<RoiTimeSeries>& series,
                             const std::vector<ClassLabel>& labels, const PipelineConfig& cfg,
                             const RunOptions& options = {});

struct SplitRepeat {
    std::uint64_t split_seed;
    MetricsReport metrics;
};

/// Reporting-only: reruns the protocol with split seeds split_seed, +1, ...
/// `count` times.
std::vector<SplitRepeat> repeated_splits(const std::vector<RoiTimeSeries>& series,
                                         const std::vector<ClassLabel>& labels,
                                         const PipelineConfig& cfg, std::size_t count,
                                         const RunOptions& options = {});

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

using Json = nlohmann::ordered_json;

Json selection_json(const SelectionOutcome& outcome, const FeatureLayout& layout,
                    const SelectionConfig& cfg);
Json metrics_json(const MetricsReport& metrics);
Json repeats_json(const std::vector<SplitRepeat>& repeats);
Json report_json(const EvaluationRun& run, const LoadedCohort& data, const PipelineConfig& cfg);

/// 3 rows x 3 columns, predicted-by-true, no header.
void write_confusion_csv(const std::filesystem::path& path, const ConfusionMatrix& cm);
/// Throws DataError for anything other than a 3 x 3 table of non-negative integers.
ConfusionMatrix read_confusion_csv(const std::filesystem::path& path);

/// Human-readable per-class and macro table.
std::string format_metrics(const MetricsReport& metrics);

/// `subject_id,label,<features...>` with one row per subject.
void write_feature_table(const std::filesystem::path& path, const FeatureTable& table);
/// `set,begin,end` rows describing the column ranges (end exclusive).
void write_feature_index(const std::filesystem::path& path, const FeatureLayout& layout);

void write_json(const std::filesystem::path& path, const Json& json);

}  // namespace phasefeat
