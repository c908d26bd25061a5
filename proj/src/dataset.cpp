#include "phasefeat/dataset.hpp"

#include <numeric>

namespace phasefeat {

Matrix FeatureTable::submatrix(std::span<const std::size_t> rows,
                               std::span<const std::size_t> columns) const {
    Matrix out(rows.size(), columns.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto src = values.row(rows[r]);
        auto dst = out.row(r);
        for (std::size_t c = 0; c < columns.size(); ++c) dst[c] = src[columns[c]];
    }
    return out;
}

Matrix FeatureTable::select_columns(std::span<const std::size_t> columns) const {
    std::vector<std::size_t> rows(subjects());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return submatrix(rows, columns);
}

FeatureTable FeatureTable::subset(std::span<const std::size_t> rows) const {
    FeatureTable out;
    out.layout = layout;
    std::vector<std::size_t> cols(values.cols());
    std::iota(cols.begin(), cols.end(), std::size_t{0});
    out.values = submatrix(rows, cols);
    for (auto r : rows) {
        out.subject_ids.push_back(subject_ids[r]);
        out.labels.push_back(labels[r]);
    }
    return out;
}

}  // namespace phasefeat
