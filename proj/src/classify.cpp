#include "phasefeat/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "phasefeat/error.hpp"
#include "phasefeat/rng.hpp"

namespace phasefeat {

namespace {

std::array<std::vector<std::size_t>, 3> members_by_class(std::span<const ClassLabel> labels) {
    std::array<std::vector<std::size_t>, 3> members;
    for (std::size_t i = 0; i < labels.size(); ++i) members[class_index(labels[i])].push_back(i);
    return members;
}

// Fisher-Yates on a mt19937_64 stream; std::shuffle's exact algorithm is
// implementation-defined, this one is not.
void shuffle(std::vector<std::size_t>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const std::uint64_t bound = i;
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % bound;
        std::uint64_t r;
        do {
            r = rng();
        } while (r >= limit);
        std::swap(v[i - 1], v[r % bound]);
    }
}

}  // namespace

Split stratified_split(std::span<const ClassLabel> labels, std::size_t per_class_test,
                       std::uint64_t seed) {
    auto members = members_by_class(labels);
    Split split;
    for (std::size_t c = 0; c < 3; ++c) {
        auto& m = members[c];
        if (m.empty()) continue;
        if (per_class_test > 0 && m.size() <= per_class_test)
            throw DataError("stratified_split: class " + std::string(to_string(kAllClasses[c])) +
                            " has " + std::to_string(m.size()) + " subjects, need more than " +
                            std::to_string(per_class_test));
        Rng rng(derive_seed(seed, c));
        shuffle(m, rng);
        split.test.insert(split.test.end(), m.begin(), m.begin() + static_cast<std::ptrdiff_t>(per_class_test));
        split.train.insert(split.train.end(), m.begin() + static_cast<std::ptrdiff_t>(per_class_test), m.end());
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

std::vector<std::size_t> stratified_folds(std::span<const ClassLabel> labels, std::size_t folds,
                                          std::uint64_t seed) {
    if (folds < 2) throw ConfigError("stratified_folds: need at least 2 folds");
    auto members = members_by_class(labels);
    std::vector<std::size_t> fold_of(labels.size(), 0);
    std::size_t offset = 0;  // rotates so small classes do not all start in fold 0
    for (std::size_t c = 0; c < 3; ++c) {
        auto& m = members[c];
        if (m.empty()) continue;
        if (m.size() < folds)
            throw DataError("cross-validation: class " + std::string(to_string(kAllClasses[c])) +
                            " has " + std::to_string(m.size()) + " training subjects, need at least " +
                            std::to_string(folds));
        Rng rng(derive_seed(seed ^ 0xf01dULL, c));
        shuffle(m, rng);
        for (std::size_t i = 0; i < m.size(); ++i) fold_of[m[i]] = (i + offset) % folds;
        offset += m.size();
    }
    return fold_of;
}

// ---------------------------------------------------------------------------

Standardizer Standardizer::fit(const Matrix& train) {
    const std::size_t n = train.rows();
    if (n < 2) throw DataError("standardize: need at least 2 training vectors");
    Standardizer s;
    for (std::size_t c = 0; c < train.cols(); ++c) {
        double mean = 0.0;
        for (std::size_t r = 0; r < n; ++r) mean += train(r, c);
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            const double d = train(r, c) - mean;
            ss += d * d;
        }
        const double sd = std::sqrt(ss / static_cast<double>(n - 1));
        // Relative floor: a column whose spread is pure rounding noise is constant.
        if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) {
            s.dropped.push_back(c);
            continue;
        }
        s.kept.push_back(c);
        s.mean.push_back(mean);
        s.stddev.push_back(sd);
    }
    return s;
}

std::vector<double> Standardizer::apply(std::span<const double> row) const {
    std::vector<double> out(kept.size());
    for (std::size_t i = 0; i < kept.size(); ++i) out[i] = (row[kept[i]] - mean[i]) / stddev[i];
    return out;
}

Matrix Standardizer::apply(const Matrix& rows) const {
    Matrix out(rows.rows(), kept.size());
    for (std::size_t r = 0; r < rows.rows(); ++r) {
        const auto z = apply(rows.row(r));
        std::copy(z.begin(), z.end(), out.row(r).begin());
    }
    return out;
}

// ---------------------------------------------------------------------------

KnnModel::KnnModel(Matrix train, std::vector<ClassLabel> labels, std::size_t k)
    : train_(std::move(train)), labels_(std::move(labels)), k_(k) {
    if (labels_.size() != train_.rows())
        throw DataError("knn: label count does not match training rows");
    if (k_ == 0 || k_ > train_.rows())
        throw DataError("knn: k=" + std::to_string(k_) + " invalid for " +
                        std::to_string(train_.rows()) + " training vectors");
}

ClassLabel KnnModel::predict(std::span<const double> sample) const {
    if (sample.size() != train_.cols())
        throw DataError("knn: sample has " + std::to_string(sample.size()) +
                        " features, model expects " + std::to_string(train_.cols()));
    const std::size_t n = train_.rows();
    std::vector<std::pair<double, std::size_t>> dist(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = train_.row(i);
        double d2 = 0.0;
        for (std::size_t f = 0; f < row.size(); ++f) {
            const double d = row[f] - sample[f];
            d2 += d * d;
        }
        dist[i] = {std::sqrt(d2), i};
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k_), dist.end());

    std::array<std::size_t, 3> votes{};
    std::array<double, 3> dist_sum{};
    for (std::size_t i = 0; i < k_; ++i) {
        const auto c = class_index(labels_[dist[i].second]);
        ++votes[c];
        dist_sum[c] += dist[i].first;
    }
    std::size_t best = 0;
    for (std::size_t c = 1; c < 3; ++c) {
        if (votes[c] > votes[best]) {
            best = c;
        } else if (votes[c] == votes[best] && votes[c] > 0) {
            const double mc = dist_sum[c] / static_cast<double>(votes[c]);
            const double mb = dist_sum[best] / static_cast<double>(votes[best]);
            if (mc < mb) best = c;
        }
    }
    return kAllClasses[best];
}

// ---------------------------------------------------------------------------

std::int64_t ConfusionMatrix::total() const {
    std::int64_t t = 0;
    for (const auto& row : counts)
        for (auto v : row) t += v;
    return t;
}

std::int64_t ConfusionMatrix::trace() const { return counts[0][0] + counts[1][1] + counts[2][2]; }

ConfusionMatrix confusion_matrix(std::span<const ClassLabel> truth,
                                 std::span<const ClassLabel> predicted) {
    if (truth.size() != predicted.size())
        throw DataError("confusion_matrix: " + std::to_string(truth.size()) + " truths vs " +
                        std::to_string(predicted.size()) + " predictions");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < truth.size(); ++i)
        ++cm.counts[class_index(predicted[i])][class_index(truth[i])];
    return cm;
}

namespace {

std::optional<double> ratio(std::int64_t num, std::int64_t den) {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
}

std::optional<double> macro(const std::array<ClassMetrics, 3>& per_class,
                            std::optional<double> ClassMetrics::*field) {
    double sum = 0.0;
    int n = 0;
    for (const auto& m : per_class)
        if (const auto& v = m.*field) {
            sum += *v;
            ++n;
        }
    if (n == 0) return std::nullopt;
    return sum / n;
}

}  // namespace

MetricsReport compute_metrics(const ConfusionMatrix& cm) {
    const std::int64_t total = cm.total();
    if (total <= 0) throw DataError("compute_metrics: empty confusion matrix");
    MetricsReport rep;
    for (std::size_t c = 0; c < 3; ++c) {
        auto& m = rep.per_class[c];
        m.tp = cm.counts[c][c];
        for (std::size_t o = 0; o < 3; ++o) {
            if (o == c) continue;
            m.fp += cm.counts[c][o];
            m.fn += cm.counts[o][c];
        }
        m.tn = total - m.tp - m.fp - m.fn;
        m.accuracy = ratio(m.tp + m.tn, total);
        m.precision = ratio(m.tp, m.tp + m.fp);
        m.specificity = ratio(m.tn, m.tn + m.fp);
        m.sensitivity = ratio(m.tp, m.tp + m.fn);
    }
    rep.macro_accuracy = macro(rep.per_class, &ClassMetrics::accuracy);
    rep.macro_precision = macro(rep.per_class, &ClassMetrics::precision);
    rep.macro_specificity = macro(rep.per_class, &ClassMetrics::specificity);
    rep.macro_sensitivity = macro(rep.per_class, &ClassMetrics::sensitivity);
    rep.raw_accuracy = static_cast<double>(cm.trace()) / static_cast<double>(total);
    return rep;
}

}  // namespace phasefeat
