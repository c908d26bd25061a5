#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "phasefeat/ingest.hpp"
#include "phasefeat/matrix.hpp"
#include "phasefeat/sigproc.hpp"

namespace phasefeat {

enum class FeatureSetId { IPPow = 0, IEPow, IPEnt, IEEnt, PLV, MSC };

inline constexpr std::size_t kFeatureSetCount = 6;
inline constexpr std::array<FeatureSetId, kFeatureSetCount> kAllFeatureSets = {
    FeatureSetId::IPPow, FeatureSetId::IEPow, FeatureSetId::IPEnt,
    FeatureSetId::IEEnt, FeatureSetId::PLV,   FeatureSetId::MSC};

std::string_view to_string(FeatureSetId id);
std::optional<FeatureSetId> parse_feature_set(std::string_view name);

// ---------------------------------------------------------------------------
// Local-scale features
// ---------------------------------------------------------------------------

/// Sum of squares.
double power_feature(std::span<const double> seq);

struct EntropyConfig {
    std::size_t bins = 16;
    double log_base = 2.0;
};

/// Shannon entropy of a B-bin equal-width histogram spanning [min, max].
/// A constant sequence has entropy 0.
double entropy_feature(std::span<const double> seq, const EntropyConfig& cfg = {});

// ---------------------------------------------------------------------------
// Coherency matrices
// ---------------------------------------------------------------------------

enum class CoherencyKind { PLV, MSC };

/// Symmetric N x N matrix with unit diagonal and entries in [0, 1].
struct CoherencyMatrix {
    Matrix values;
    CoherencyKind kind = CoherencyKind::PLV;
};

/// Phase locking value of every region pair. Rows of `phases` are phase
/// sequences of equal length.
CoherencyMatrix plv_matrix(const Matrix& phases);

enum class WindowKind { Hann, Rectangular };
enum class BandReduce { Mean, Max };

struct WelchConfig {
    std::size_t segment_length = 64;
    double overlap_fraction = 0.5;
    WindowKind window = WindowKind::Hann;
    double band_lo = 0.01;  // Hz, inclusive
    double band_hi = 0.1;   // Hz, inclusive
    BandReduce reduce = BandReduce::Mean;

    std::size_t step() const;
    std::size_t segment_count(std::size_t length) const;
    /// Throws ConfigError for a segment shorter than 8 or overlap outside [0, 1).
    void validate() const;
};

/// Welch magnitude-squared coherence of every region pair, reduced over the
/// bins inside the configured band. Segments are mean-removed before
/// windowing. Throws DataError when fewer than two segments fit.
CoherencyMatrix msc_matrix(const Matrix& envelopes, double fs, const WelchConfig& cfg);

// ---------------------------------------------------------------------------
// Subject feature vectors
// ---------------------------------------------------------------------------

struct IndexRange {
    std::size_t begin = 0;
    std::size_t end = 0;  // exclusive
    std::size_t size() const { return end - begin; }
};

/// Layout of the concatenated vector: IPPow, IEPow, IPEnt, IEEnt (N each),
/// then PLV and MSC upper triangles (i < j, row-major).
class FeatureLayout {
public:
    FeatureLayout() = default;
    explicit FeatureLayout(std::size_t regions, std::vector<std::string> region_names = {});

    std::size_t regions() const { return regions_; }
    std::size_t size() const { return labels_.size(); }
    IndexRange range(FeatureSetId id) const { return ranges_[static_cast<std::size_t>(id)]; }
    const std::string& label(std::size_t index) const { return labels_[index]; }
    const std::vector<std::string>& labels() const { return labels_; }
    /// Vector indices of the given sets, concatenated in argument order.
    std::vector<std::size_t> columns(std::span<const FeatureSetId> sets) const;

    bool operator==(const FeatureLayout&) const = default;

private:
    std::size_t regions_ = 0;
    std::array<IndexRange, kFeatureSetCount> ranges_{};
    std::vector<std::string> labels_;
};

enum class PhaseForm { Unwrapped, Wrapped };

struct FeatureConfig {
    FilterSpec filter;  // fs is taken from the series' sampling interval
    TfpConfig tfp;
    EntropyConfig entropy;
    WelchConfig welch;
    PhaseForm ip_form = PhaseForm::Unwrapped;
};

struct SubjectFeatures {
    std::vector<double> values;
    FeatureLayout layout;
};

struct SubjectExtraction {
    SubjectFeatures features;
    CoherencyMatrix plv;
    CoherencyMatrix msc;
};

/// TFP seed used for a subject: derived from the global seed and the id, so
/// results do not depend on processing order.
std::uint64_t subject_seed(std::uint64_t global_seed, std::string_view subject_id);

SubjectExtraction extract_subject(const RoiTimeSeries& ts, const FeatureConfig& cfg);

inline SubjectFeatures extract_subject_features(const RoiTimeSeries& ts, const FeatureConfig& cfg) {
    return extract_subject(ts, cfg).features;
}

/// Writes a full symmetric N x N matrix as CSV.
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);

}  // namespace phasefeat
