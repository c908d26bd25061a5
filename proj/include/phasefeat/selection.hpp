#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "phasefeat/dataset.hpp"
#include "phasefeat/features.hpp"

namespace phasefeat {

// ---------------------------------------------------------------------------
// Student's t
// ---------------------------------------------------------------------------

/// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double incomplete_beta(double a, double b, double x);

/// CDF of Student's t with `df` degrees of freedom.
double t_cdf(double t, double df);

struct TTestResult {
    double t_statistic = 0.0;
    double degrees_of_freedom = 0.0;
    double p_value = 1.0;  // two-tailed
    bool degenerate = false;  // both samples had zero variance
};

/// Pooled-variance two-sample t-test. Requires at least 2 values per sample.
TTestResult pooled_t_test(std::span<const double> a, std::span<const double> b);

// ---------------------------------------------------------------------------
// Set-level floating search
// ---------------------------------------------------------------------------

struct SfffsConfig {
    std::size_t criterion_folds = 5;
    std::size_t knn_k = 5;
    std::uint64_t seed = 0;
    std::size_t max_sets = kFeatureSetCount;
};

enum class StepKind { Add, Remove };

struct TraceStep {
    StepKind kind;
    FeatureSetId set;
    double criterion;

    bool operator==(const TraceStep&) const = default;
};

struct SetSelection {
    std::vector<FeatureSetId> selected;  // enumeration order
    std::vector<TraceStep> trace;
    double criterion = 0.0;
};

/// Mean stratified k-fold accuracy of a z-scored KNN restricted to `sets`.
/// Folds depend only on `cfg.seed` and the labels.
class SelectionCriterion {
public:
    SelectionCriterion(const FeatureTable& train, const SfffsConfig& cfg);

    double operator()(std::span<const FeatureSetId> sets) const;

private:
    const FeatureTable& train_;
    SfffsConfig cfg_;
    std::vector<std::size_t> fold_of_;
};

/// Floating forward search over the six feature sets. Additions and removals
/// are accepted only on strict criterion improvement; ties prefer the
/// smaller selection, then enumeration order.
SetSelection sfffs_select_sets(const FeatureTable& train, const SfffsConfig& cfg);

// ---------------------------------------------------------------------------
// Per-feature significance filter
// ---------------------------------------------------------------------------

enum class CombineRule { Union, Intersection };

/// Class pairs in report order: ALZ-MCI, ALZ-NORMAL, MCI-NORMAL.
inline constexpr std::array<std::array<ClassLabel, 2>, 3> kClassPairs = {{
    {ClassLabel::Alzheimer, ClassLabel::MCI},
    {ClassLabel::Alzheimer, ClassLabel::Normal},
    {ClassLabel::MCI, ClassLabel::Normal},
}};

std::string_view pair_name(std::size_t pair);

struct SignificanceResult {
    std::vector<bool> mask;  // per input column
    std::array<std::size_t, 3> pairwise_significant{};
    std::size_t degenerate_features = 0;  // zero variance across all subjects
};

/// Pooled t-test per column and class pair; a column is kept when p < alpha
/// in at least one pair (Union) or in every pair (Intersection).
SignificanceResult significance_filter(const Matrix& values, std::span<const ClassLabel> labels,
                                       double alpha, CombineRule rule = CombineRule::Union);

struct SelectionOutcome {
    SetSelection sets;
    std::vector<std::size_t> candidate_columns;  // selected sets, concatenated
    SignificanceResult significance;             // over candidate_columns
    std::vector<std::size_t> retained_columns;   // candidate columns passing the mask
};

struct SelectionConfig {
    SfffsConfig sfffs;
    double alpha = 0.05;
    CombineRule rule = CombineRule::Union;
};

/// Set search followed by significance filtering, on training data only.
SelectionOutcome select_features(const FeatureTable& train, const SelectionConfig& cfg);

}  // namespace phasefeat
