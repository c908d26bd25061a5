#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "phasefeat/features.hpp"
#include "phasefeat/ingest.hpp"
#include "phasefeat/matrix.hpp"

namespace phasefeat {

/// Subjects x features, with labels and the feature layout of the columns.
struct FeatureTable {
    std::vector<std::string> subject_ids;
    std::vector<ClassLabel> labels;
    Matrix values;
    FeatureLayout layout;

    std::size_t subjects() const { return values.rows(); }

    /// Rows `rows` restricted to `columns`, in the given orders.
    Matrix submatrix(std::span<const std::size_t> rows, std::span<const std::size_t> columns) const;
    /// All rows restricted to `columns`.
    Matrix select_columns(std::span<const std::size_t> columns) const;
    /// New table holding only `rows`.
    FeatureTable subset(std::span<const std::size_t> rows) const;
};

}  // namespace phasefeat
