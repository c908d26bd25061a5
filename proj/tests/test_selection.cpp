#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>

#include "phasefeat/error.hpp"
#include "phasefeat/selection.hpp"

using namespace phasefeat;

namespace {

// CDF of Student's t by adaptive quadrature of the density from 0 to |t|.
double t_cdf_by_integration(double t, double df) {
    const double c = std::exp(std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df)) /
                     std::sqrt(df * std::numbers::pi);
    auto density = [&](double u) { return c * std::pow(1.0 + u * u / df, -0.5 * (df + 1.0)); };
    const double half = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        density, 0.0, std::abs(t), 15, 1e-14);
    return t >= 0.0 ? 0.5 + half : 0.5 - half;
}

std::vector<ClassLabel> balanced_labels(std::size_t per_class) {
    std::vector<ClassLabel> labels;
    for (auto c : kAllClasses)
        for (std::size_t i = 0; i < per_class; ++i) labels.push_back(c);
    return labels;
}

// Table over three regions: every set has three columns.
FeatureTable make_table(const std::vector<ClassLabel>& labels) {
    FeatureTable t;
    t.layout = FeatureLayout(3);
    t.labels = labels;
    t.values = Matrix(labels.size(), t.layout.size());
    for (std::size_t i = 0; i < labels.size(); ++i) t.subject_ids.push_back("s" + std::to_string(i));
    return t;
}

void fill_noise(FeatureTable& t, std::mt19937_64& rng) {
    std::normal_distribution<double> n;
    for (std::size_t r = 0; r < t.values.rows(); ++r)
        for (std::size_t c = 0; c < t.values.cols(); ++c) t.values(r, c) = n(rng);
}

void set_signal(FeatureTable& t, FeatureSetId set, const std::function<double(ClassLabel)>& level,
                double noise, std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, noise);
    const auto range = t.layout.range(set);
    for (std::size_t r = 0; r < t.values.rows(); ++r)
        for (std::size_t c = range.begin; c < range.end; ++c) t.values(r, c) = level(t.labels[r]) + n(rng);
}

struct Exhaustive {
    double best = -1.0;
    unsigned mask = 0;
};

Exhaustive exhaustive_best(const SelectionCriterion& J) {
    Exhaustive e;
    for (unsigned mask = 1; mask < 64; ++mask) {
        std::vector<FeatureSetId> sets;
        for (std::size_t s = 0; s < 6; ++s)
            if (mask & (1u << s)) sets.push_back(kAllFeatureSets[s]);
        const double j = J(sets);
        if (j > e.best) {
            e.best = j;
            e.mask = mask;
        }
    }
    return e;
}

void expect_valid_trace(const SetSelection& sel) {
    for (std::size_t i = 1; i < sel.trace.size(); ++i) EXPECT_GE(sel.trace[i].criterion, sel.trace[i - 1].criterion);
    for (std::size_t i = 0; i < sel.selected.size(); ++i)
        for (std::size_t j = i + 1; j < sel.selected.size(); ++j) EXPECT_NE(sel.selected[i], sel.selected[j]);
    EXPECT_FALSE(sel.selected.empty());
    if (!sel.trace.empty()) EXPECT_EQ(sel.trace.back().criterion, sel.criterion);
}

}  // namespace

// ---------------------------------------------------------------------------

TEST(TCdf, Examples) {
    for (double df : {1.0, 2.0, 7.0, 100.0}) EXPECT_DOUBLE_EQ(t_cdf(0.0, df), 0.5);
    EXPECT_NEAR(t_cdf(1.0, 1.0), 0.75, 1e-12);
    EXPECT_NEAR(t_cdf(1.96, 200.0), 0.9743, 1e-3);
    EXPECT_NEAR(t_cdf(1.96, 200.0), t_cdf_by_integration(1.96, 200.0), 1e-10);
}

TEST(TCdf, CauchyClosedForm) {
    for (double t = -20.0; t <= 20.0; t += 0.37)
        EXPECT_NEAR(t_cdf(t, 1.0), 0.5 + std::atan(t) / std::numbers::pi, 1e-12);
}

TEST(TCdf, MatchesNumericIntegration) {
    for (double df : {1.0, 2.0, 3.0, 5.0, 10.0, 30.0, 100.0})
        for (double t = -5.0; t <= 5.0; t += 0.125)
            EXPECT_NEAR(t_cdf(t, df), t_cdf_by_integration(t, df), 1e-10) << "t=" << t << " df=" << df;
}

TEST(TCdf, SymmetricAndMonotone) {
    for (double df : {1.0, 4.0, 25.0, 300.0}) {
        double prev = 0.0;
        for (double t = -40.0; t <= 40.0; t += 0.05) {
            const double p = t_cdf(t, df);
            EXPECT_NEAR(p + t_cdf(-t, df), 1.0, 1e-10);
            EXPECT_GE(p, prev);
            prev = p;
        }
    }
    EXPECT_THROW(t_cdf(1.0, 0.0), DataError);
}

TEST(IncompleteBeta, MatchesReference) {
    for (double a : {0.5, 1.0, 2.5, 15.0, 50.0})
        for (double b : {0.5, 1.0, 3.0, 40.0})
            for (double x : {0.0, 1e-6, 0.1, 0.5, 0.77, 0.999, 1.0})
                EXPECT_NEAR(incomplete_beta(a, b, x), boost::math::ibeta(a, b, x), 1e-12)
                    << a << " " << b << " " << x;
    EXPECT_THROW(incomplete_beta(0.0, 1.0, 0.5), DataError);
    EXPECT_THROW(incomplete_beta(1.0, 1.0, 1.5), DataError);
}

// ---------------------------------------------------------------------------

TEST(PooledTTest, IdenticalSamples) {
    const std::vector<double> a = {1.0, 4.0, 2.0, 8.0};
    const auto r = pooled_t_test(a, a);
    EXPECT_EQ(r.t_statistic, 0.0);
    EXPECT_EQ(r.p_value, 1.0);
    EXPECT_FALSE(r.degenerate);
}

TEST(PooledTTest, HandComputableExample) {
    const std::vector<double> a = {1, 2, 3, 4, 5}, b = {2, 3, 4, 5, 6};
    const auto r = pooled_t_test(a, b);
    EXPECT_NEAR(r.t_statistic, -1.0, 1e-12);
    EXPECT_EQ(r.degrees_of_freedom, 8.0);
    const double oracle = 2.0 * t_cdf_by_integration(-1.0, 8.0);
    EXPECT_NEAR(r.p_value, oracle, 1e-10);
    EXPECT_NEAR(r.p_value, 0.3466, 1e-4);

    const auto swapped = pooled_t_test(b, a);
    EXPECT_EQ(swapped.t_statistic, -r.t_statistic);
    EXPECT_EQ(swapped.p_value, r.p_value);
}

TEST(PooledTTest, AffineInvariance) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n;
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> a(7), b(11);
        for (auto& v : a) v = n(rng);
        for (auto& v : b) v = n(rng) + 0.5;
        const double p = pooled_t_test(a, b).p_value;
        for (auto& v : a) v = 4.0 * v + 100.0;
        for (auto& v : b) v = 4.0 * v + 100.0;
        EXPECT_NEAR(pooled_t_test(a, b).p_value, p, 1e-12);
    }
}

TEST(PooledTTest, DegenerateAndTooSmall) {
    const std::vector<double> a = {2, 2, 2}, b = {2, 2}, c = {3, 3, 3};
    auto r = pooled_t_test(a, b);
    EXPECT_TRUE(r.degenerate);
    EXPECT_EQ(r.p_value, 1.0);
    r = pooled_t_test(a, c);
    EXPECT_TRUE(r.degenerate);
    EXPECT_EQ(r.p_value, 0.0);
    EXPECT_THROW(pooled_t_test(std::vector<double>{1.0}, a), DataError);
}

// ---------------------------------------------------------------------------

TEST(SignificanceFilter, SeparatingFeatureSignificantEverywhere) {
    const auto labels = balanced_labels(10);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> tiny(0.0, 1e-3), n;
    Matrix m(labels.size(), 3);
    for (std::size_t r = 0; r < labels.size(); ++r) {
        m(r, 0) = static_cast<double>(labels[r]) + tiny(rng);
        m(r, 1) = n(rng);
        m(r, 2) = 7.0;
    }
    const auto res = significance_filter(m, labels, 0.05);
    EXPECT_TRUE(res.mask[0]);
    EXPECT_FALSE(res.mask[2]);
    EXPECT_EQ(res.degenerate_features, 1u);
    for (auto count : res.pairwise_significant) EXPECT_GE(count, 1u);
    const auto inter = significance_filter(m, labels, 0.05, CombineRule::Intersection);
    EXPECT_TRUE(inter.mask[0]);
}

TEST(SignificanceFilter, IntersectionIsStricterThanUnion) {
    const auto labels = balanced_labels(12);
    std::mt19937_64 rng(6);
    std::normal_distribution<double> n;
    Matrix m(labels.size(), 200);
    for (std::size_t r = 0; r < labels.size(); ++r)
        for (std::size_t c = 0; c < 200; ++c)
            m(r, c) = n(rng) + (labels[r] == ClassLabel::Alzheimer ? 0.02 * static_cast<double>(c) : 0.0);
    const auto u = significance_filter(m, labels, 0.05, CombineRule::Union);
    const auto i = significance_filter(m, labels, 0.05, CombineRule::Intersection);
    std::size_t nu = 0, ni = 0;
    for (std::size_t c = 0; c < 200; ++c) {
        nu += u.mask[c];
        ni += i.mask[c];
        if (i.mask[c]) EXPECT_TRUE(u.mask[c]);
    }
    EXPECT_LT(ni, nu);
    EXPECT_EQ(u.pairwise_significant, i.pairwise_significant);
}

TEST(SignificanceFilter, NullFalsePositiveRate) {
    const auto labels = balanced_labels(27);
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> n;
    const std::size_t features = 10000;
    Matrix m(labels.size(), features);
    for (std::size_t r = 0; r < labels.size(); ++r)
        for (std::size_t c = 0; c < features; ++c) m(r, c) = n(rng);
    const auto res = significance_filter(m, labels, 0.05);
    for (auto count : res.pairwise_significant)
        EXPECT_NEAR(static_cast<double>(count) / features, 0.05, 0.02);
}

TEST(SignificanceFilter, RequiresTwoPerClass) {
    const std::vector<ClassLabel> labels = {ClassLabel::Alzheimer, ClassLabel::Alzheimer, ClassLabel::MCI,
                                            ClassLabel::MCI, ClassLabel::Normal};
    EXPECT_THROW(significance_filter(Matrix(5, 2), labels, 0.05), DataError);
}

// ---------------------------------------------------------------------------

TEST(Sfffs, SingleInformativeSetMatchesExhaustive) {
    std::mt19937_64 rng(10);
    auto t = make_table(balanced_labels(15));
    fill_noise(t, rng);
    set_signal(t, FeatureSetId::IPEnt, [](ClassLabel c) { return 2.0 * static_cast<double>(c); }, 0.4, rng);
    SfffsConfig cfg;
    cfg.seed = 1;
    const auto sel = sfffs_select_sets(t, cfg);
    expect_valid_trace(sel);
    EXPECT_EQ(sel.selected, (std::vector<FeatureSetId>{FeatureSetId::IPEnt}));
    const auto best = exhaustive_best(SelectionCriterion(t, cfg));
    EXPECT_EQ(sel.criterion, best.best);
    EXPECT_EQ(best.mask, 1u << 2);
}

TEST(Sfffs, IdenticalCopiesSelectFirstOnly) {
    std::mt19937_64 rng(11);
    auto t = make_table(balanced_labels(12));
    fill_noise(t, rng);
    set_signal(t, FeatureSetId::IPPow, [](ClassLabel c) { return static_cast<double>(c); }, 0.6, rng);
    const auto src = t.layout.range(FeatureSetId::IPPow);
    for (auto s : kAllFeatureSets) {
        const auto dst = t.layout.range(s);
        for (std::size_t r = 0; r < t.values.rows(); ++r)
            for (std::size_t k = 0; k < src.size(); ++k) t.values(r, dst.begin + k) = t.values(r, src.begin + k);
    }
    const auto sel = sfffs_select_sets(t, SfffsConfig{});
    EXPECT_EQ(sel.selected, (std::vector<FeatureSetId>{FeatureSetId::IPPow}));
    ASSERT_EQ(sel.trace.size(), 1u);
}

TEST(Sfffs, ComplementarySetsSelectedTogether) {
    std::mt19937_64 rng(12);
    auto t = make_table(balanced_labels(15));
    fill_noise(t, rng);
    // One set isolates ALZ, the other isolates NORMAL; only together do they
    // resolve all three classes.
    set_signal(t, FeatureSetId::IEPow, [](ClassLabel c) { return c == ClassLabel::Alzheimer ? 3.0 : 0.0; }, 0.5, rng);
    set_signal(t, FeatureSetId::MSC, [](ClassLabel c) { return c == ClassLabel::Normal ? 3.0 : 0.0; }, 0.5, rng);
    SfffsConfig cfg;
    cfg.seed = 4;
    const SelectionCriterion J(t, cfg);
    const auto sel = sfffs_select_sets(t, cfg);
    expect_valid_trace(sel);
    const std::vector<FeatureSetId> both = {FeatureSetId::IEPow, FeatureSetId::MSC};
    EXPECT_EQ(sel.selected, both);
    const std::vector<FeatureSetId> a = {FeatureSetId::IEPow}, b = {FeatureSetId::MSC};
    EXPECT_GT(J(both), J(a));
    EXPECT_GT(J(both), J(b));
    EXPECT_EQ(sel.criterion, exhaustive_best(J).best);
}

TEST(Sfffs, RandomProblemsStayCloseToExhaustive) {
    std::size_t matches = 0;
    for (std::uint64_t trial = 0; trial < 10; ++trial) {
        std::mt19937_64 rng(100 + trial);
        auto t = make_table(balanced_labels(12));
        fill_noise(t, rng);
        std::uniform_real_distribution<double> strength(0.0, 1.5);
        for (auto s : kAllFeatureSets) {
            const double g = strength(rng);
            const int target = static_cast<int>(rng() % 3) + 1;
            set_signal(t, s, [&](ClassLabel c) { return static_cast<int>(c) == target ? g : 0.0; }, 1.0, rng);
        }
        SfffsConfig cfg;
        cfg.seed = trial;
        const auto sel = sfffs_select_sets(t, cfg);
        expect_valid_trace(sel);
        const auto best = exhaustive_best(SelectionCriterion(t, cfg));
        EXPECT_LE(sel.criterion, best.best);
        EXPECT_GE(sel.criterion, best.best - 0.1);
        matches += sel.criterion == best.best;
    }
    EXPECT_GE(matches, 5u);
}

TEST(Sfffs, MaxSetsCapAndDeterminism) {
    std::mt19937_64 rng(13);
    auto t = make_table(balanced_labels(10));
    fill_noise(t, rng);
    for (auto s : kAllFeatureSets)
        set_signal(t, s, [&](ClassLabel c) { return 0.3 * static_cast<double>(c); }, 1.0, rng);
    SfffsConfig cfg;
    cfg.max_sets = 2;
    const auto a = sfffs_select_sets(t, cfg);
    EXPECT_LE(a.selected.size(), 2u);
    const auto b = sfffs_select_sets(t, cfg);
    EXPECT_EQ(a.selected, b.selected);
    EXPECT_EQ(a.trace, b.trace);
}

TEST(Sfffs, TooFewSubjectsForFolds) {
    std::mt19937_64 rng(14);
    auto t = make_table(balanced_labels(4));
    fill_noise(t, rng);
    EXPECT_THROW(sfffs_select_sets(t, SfffsConfig{}), DataError);
    SfffsConfig bad;
    bad.criterion_folds = 1;
    EXPECT_THROW(sfffs_select_sets(t, bad), ConfigError);
}

TEST(SelectFeatures, RetainedColumnsComeFromSelectedSets) {
    std::mt19937_64 rng(15);
    auto t = make_table(balanced_labels(15));
    fill_noise(t, rng);
    set_signal(t, FeatureSetId::PLV, [](ClassLabel c) { return static_cast<double>(c); }, 0.3, rng);
    const auto out = select_features(t, SelectionConfig{});
    EXPECT_EQ(out.sets.selected, (std::vector<FeatureSetId>{FeatureSetId::PLV}));
    EXPECT_EQ(out.candidate_columns, t.layout.columns(out.sets.selected));
    EXPECT_EQ(out.significance.mask.size(), out.candidate_columns.size());
    EXPECT_EQ(out.retained_columns.size(), 3u);
    for (auto c : out.significance.pairwise_significant) EXPECT_LE(c, out.candidate_columns.size());
}
