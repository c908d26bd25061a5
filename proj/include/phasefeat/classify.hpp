#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "phasefeat/ingest.hpp"
#include "phasefeat/matrix.hpp"

namespace phasefeat {

// ---------------------------------------------------------------------------
// Splitting
// ---------------------------------------------------------------------------

struct Split {
    std::vector<std::size_t> train;  // ascending
    std::vector<std::size_t> test;   // ascending
};

/// Draws exactly `per_class_test` test subjects per present class, uniformly
/// without replacement. Throws DataError when a class has no more than
/// `per_class_test` members.
Split stratified_split(std::span<const ClassLabel> labels, std::size_t per_class_test,
                       std::uint64_t seed);

inline Split stratified_split(const SubjectCohort& cohort, std::size_t per_class_test,
                              std::uint64_t seed) {
    const auto labels = cohort.labels();
    return stratified_split(labels, per_class_test, seed);
}

/// Stratified assignment of subjects to `folds` folds; returns the fold index
/// of every subject. Throws DataError when a present class has fewer than
/// `folds` members.
std::vector<std::size_t> stratified_folds(std::span<const ClassLabel> labels, std::size_t folds,
                                          std::uint64_t seed);

// ---------------------------------------------------------------------------
// Standardization
// ---------------------------------------------------------------------------

/// Per-feature z-scoring fitted on training rows. Zero-variance features are
/// dropped; `kept` lists the surviving input columns in order.
struct Standardizer {
    std::vector<std::size_t> kept;
    std::vector<std::size_t> dropped;
    std::vector<double> mean;    // per kept feature
    std::vector<double> stddev;  // per kept feature, sample (n-1) estimate

    static Standardizer fit(const Matrix& train);

    std::vector<double> apply(std::span<const double> row) const;
    Matrix apply(const Matrix& rows) const;

    bool operator==(const Standardizer&) const = default;
};

// ---------------------------------------------------------------------------
// KNN
// ---------------------------------------------------------------------------

class KnnModel {
public:
    /// Throws DataError when k is zero or exceeds the training size.
    KnnModel(Matrix train, std::vector<ClassLabel> labels, std::size_t k);

    /// Majority vote among the k nearest training rows (Euclidean). Ties in
    /// distance at rank k go to the earlier training row; ties in votes go to
    /// the class with the smaller mean neighbor distance, then the lower label.
    ClassLabel predict(std::span<const double> sample) const;

    std::size_t k() const { return k_; }
    std::size_t dimension() const { return train_.cols(); }

private:
    Matrix train_;
    std::vector<ClassLabel> labels_;
    std::size_t k_;
};

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

/// counts[predicted][true], zero-based class indices.
struct ConfusionMatrix {
    std::array<std::array<std::int64_t, 3>, 3> counts{};

    std::int64_t total() const;
    std::int64_t trace() const;
    bool operator==(const ConfusionMatrix&) const = default;
};

ConfusionMatrix confusion_matrix(std::span<const ClassLabel> truth,
                                 std::span<const ClassLabel> predicted);

/// One-vs-rest indicators; nullopt where the denominator is zero.
struct ClassMetrics {
    std::int64_t tp = 0, fp = 0, fn = 0, tn = 0;
    std::optional<double> accuracy;
    std::optional<double> precision;
    std::optional<double> specificity;
    std::optional<double> sensitivity;
};

struct MetricsReport {
    std::array<ClassMetrics, 3> per_class;
    // Unweighted means over classes with a defined value.
    std::optional<double> macro_accuracy;
    std::optional<double> macro_precision;
    std::optional<double> macro_specificity;
    std::optional<double> macro_sensitivity;
    double raw_accuracy = 0.0;  // trace / total
};

/// Throws DataError for an all-zero matrix.
MetricsReport compute_metrics(const ConfusionMatrix& cm);

}  // namespace phasefeat
