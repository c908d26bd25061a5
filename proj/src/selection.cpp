#include "phasefeat/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "phasefeat/classify.hpp"
#include "phasefeat/error.hpp"

namespace phasefeat {

// ---------------------------------------------------------------------------
// Incomplete beta / t distribution
// ---------------------------------------------------------------------------

namespace {

// Modified Lentz evaluation of the continued fraction for I_x(a, b).
double beta_continued_fraction(double a, double b, double x) {
    constexpr int kMaxIter = 10000;
    constexpr double kEps = 1e-16;
    constexpr double kTiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) break;
    }
    return h;
}

// I_x(a, b) given both x and 1 - x, so callers can pass an accurately
// computed complement.
double incomplete_beta_split(double a, double b, double x, double one_minus_x) {
    if (x <= 0.0) return 0.0;
    if (one_minus_x <= 0.0) return 1.0;
    const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                             a * std::log(x) + b * std::log(one_minus_x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
    return 1.0 - front * beta_continued_fraction(b, a, one_minus_x) / b;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw DataError("incomplete_beta: parameters must be positive");
    if (x < 0.0 || x > 1.0) throw DataError("incomplete_beta: x outside [0, 1]");
    return incomplete_beta_split(a, b, x, 1.0 - x);
}

double t_cdf(double t, double df) {
    if (!(df > 0.0)) throw DataError("t_cdf: degrees of freedom must be positive");
    if (std::isnan(t)) return t;
    if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
    const double t2 = t * t;
    const double x = df / (df + t2);
    const double one_minus_x = t2 / (df + t2);
    const double tail = 0.5 * incomplete_beta_split(0.5 * df, 0.5, x, one_minus_x);
    return t > 0.0 ? 1.0 - tail : tail;
}

namespace {

struct Moments {
    double mean = 0.0;
    double var = 0.0;  // sample variance
};

Moments moments(std::span<const double> v) {
    Moments m;
    for (double x : v) m.mean += x;
    m.mean /= static_cast<double>(v.size());
    for (double x : v) m.var += (x - m.mean) * (x - m.mean);
    m.var /= static_cast<double>(v.size() - 1);
    return m;
}

}  // namespace

TTestResult pooled_t_test(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2)
        throw DataError("pooled_t_test: each sample needs at least 2 values");
    const auto ma = moments(a);
    const auto mb = moments(b);
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    TTestResult r;
    r.degrees_of_freedom = na + nb - 2.0;
    const double pooled = ((na - 1.0) * ma.var + (nb - 1.0) * mb.var) / r.degrees_of_freedom;
    if (!(pooled > 0.0)) {
        r.degenerate = true;
        const bool equal = ma.mean == mb.mean;
        r.t_statistic = equal ? 0.0
                              : std::copysign(std::numeric_limits<double>::infinity(), ma.mean - mb.mean);
        r.p_value = equal ? 1.0 : 0.0;
        return r;
    }
    r.t_statistic = (ma.mean - mb.mean) / std::sqrt(pooled * (1.0 / na + 1.0 / nb));
    const double lower = t_cdf(-std::abs(r.t_statistic), r.degrees_of_freedom);
    r.p_value = std::clamp(2.0 * lower, 0.0, 1.0);
    return r;
}

// ---------------------------------------------------------------------------
// Floating search
// ---------------------------------------------------------------------------

SelectionCriterion::SelectionCriterion(const FeatureTable& train, const SfffsConfig& cfg)
    : train_(train), cfg_(cfg) {
    if (cfg.criterion_folds < 2) throw ConfigError("selection: folds must be >= 2");
    if (cfg.knn_k < 1) throw ConfigError("selection: knn k must be >= 1");
    fold_of_ = stratified_folds(train.labels, cfg.criterion_folds, cfg.seed);
}

double SelectionCriterion::operator()(std::span<const FeatureSetId> sets) const {
    const auto columns = train_.layout.columns(sets);
    double acc_sum = 0.0;
    for (std::size_t f = 0; f < cfg_.criterion_folds; ++f) {
        std::vector<std::size_t> fit_rows, eval_rows;
        for (std::size_t i = 0; i < fold_of_.size(); ++i)
            (fold_of_[i] == f ? eval_rows : fit_rows).push_back(i);
        if (eval_rows.empty()) continue;
        const auto scaler = Standardizer::fit(train_.submatrix(fit_rows, columns));
        std::vector<ClassLabel> fit_labels;
        for (auto i : fit_rows) fit_labels.push_back(train_.labels[i]);
        const KnnModel model(scaler.apply(train_.submatrix(fit_rows, columns)), std::move(fit_labels),
                             std::min(cfg_.knn_k, fit_rows.size()));
        const Matrix eval = scaler.apply(train_.submatrix(eval_rows, columns));
        std::size_t correct = 0;
        for (std::size_t r = 0; r < eval_rows.size(); ++r)
            if (model.predict(eval.row(r)) == train_.labels[eval_rows[r]]) ++correct;
        acc_sum += static_cast<double>(correct) / static_cast<double>(eval_rows.size());
    }
    return acc_sum / static_cast<double>(cfg_.criterion_folds);
}

namespace {

std::vector<FeatureSetId> sets_of(unsigned mask) {
    std::vector<FeatureSetId> out;
    for (std::size_t s = 0; s < kFeatureSetCount; ++s)
        if (mask & (1u << s)) out.push_back(kAllFeatureSets[s]);
    return out;
}

}  // namespace

SetSelection sfffs_select_sets(const FeatureTable& train, const SfffsConfig& cfg) {
    const SelectionCriterion criterion(train, cfg);
    std::map<unsigned, double> cache;
    auto J = [&](unsigned mask) {
        if (auto it = cache.find(mask); it != cache.end()) return it->second;
        const double v = criterion(sets_of(mask));
        cache.emplace(mask, v);
        return v;
    };

    const std::size_t cap = std::clamp<std::size_t>(cfg.max_sets, 1, kFeatureSetCount);
    SetSelection out;
    unsigned selected = 0;
    double current = -std::numeric_limits<double>::infinity();
    auto count = [](unsigned m) { return static_cast<std::size_t>(__builtin_popcount(m)); };

    while (count(selected) < cap) {
        int best = -1;
        double best_j = -std::numeric_limits<double>::infinity();
        for (std::size_t s = 0; s < kFeatureSetCount; ++s) {
            if (selected & (1u << s)) continue;
            const double j = J(selected | (1u << s));
            if (j > best_j) {
                best_j = j;
                best = static_cast<int>(s);
            }
        }
        if (best < 0 || !(best_j > current)) break;
        selected |= 1u << best;
        current = best_j;
        out.trace.push_back({StepKind::Add, kAllFeatureSets[best], current});

        while (count(selected) > 1) {
            int worst = -1;
            double rem_j = -std::numeric_limits<double>::infinity();
            for (std::size_t s = 0; s < kFeatureSetCount; ++s) {
                if (!(selected & (1u << s))) continue;
                const double j = J(selected & ~(1u << s));
                if (j > rem_j) {
                    rem_j = j;
                    worst = static_cast<int>(s);
                }
            }
            if (worst < 0 || !(rem_j > current)) break;
            selected &= ~(1u << worst);
            current = rem_j;
            out.trace.push_back({StepKind::Remove, kAllFeatureSets[worst], current});
        }
    }
    out.selected = sets_of(selected);
    out.criterion = current;
    return out;
}

// ---------------------------------------------------------------------------
// Significance filter
// ---------------------------------------------------------------------------

std::string_view pair_name(std::size_t pair) {
    static constexpr std::array<std::string_view, 3> names = {"ALZ-MCI", "ALZ-NORMAL", "MCI-NORMAL"};
    return names[pair];
}

SignificanceResult significance_filter(const Matrix& values, std::span<const ClassLabel> labels,
                                       double alpha, CombineRule rule) {
    if (labels.size() != values.rows())
        throw DataError("significance_filter: label count does not match rows");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("selection: alpha must lie in (0, 1)");
    std::array<std::vector<std::size_t>, 3> rows;
    for (std::size_t i = 0; i < labels.size(); ++i) rows[class_index(labels[i])].push_back(i);
    for (std::size_t c = 0; c < 3; ++c)
        if (rows[c].size() < 2)
            throw DataError("significance_filter: class " + std::string(to_string(kAllClasses[c])) +
                            " has fewer than 2 training subjects");

    SignificanceResult out;
    out.mask.assign(values.cols(), false);
    std::array<std::vector<double>, 3> samples;
    for (std::size_t col = 0; col < values.cols(); ++col) {
        const double first = values(0, col);
        bool constant = true;
        for (std::size_t r = 1; r < values.rows() && constant; ++r) constant = values(r, col) == first;
        if (constant) {
            ++out.degenerate_features;
            continue;
        }
        for (std::size_t c = 0; c < 3; ++c) {
            samples[c].clear();
            for (auto r : rows[c]) samples[c].push_back(values(r, col));
        }
        std::size_t hits = 0;
        for (std::size_t p = 0; p < kClassPairs.size(); ++p) {
            const auto a = class_index(kClassPairs[p][0]);
            const auto b = class_index(kClassPairs[p][1]);
            if (pooled_t_test(samples[a], samples[b]).p_value < alpha) {
                ++out.pairwise_significant[p];
                ++hits;
            }
        }
        out.mask[col] = rule == CombineRule::Union ? hits > 0 : hits == kClassPairs.size();
    }
    return out;
}

SelectionOutcome select_features(const FeatureTable& train, const SelectionConfig& cfg) {
    SelectionOutcome out;
    out.sets = sfffs_select_sets(train, cfg.sfffs);
    out.candidate_columns = train.layout.columns(out.sets.selected);
    out.significance =
        significance_filter(train.select_columns(out.candidate_columns), train.labels, cfg.alpha, cfg.rule);
    for (std::size_t i = 0; i < out.candidate_columns.size(); ++i)
        if (out.significance.mask[i]) out.retained_columns.push_back(out.candidate_columns[i]);
    return out;
}

}  // namespace phasefeat
