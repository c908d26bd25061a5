#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "phasefeat/matrix.hpp"

namespace phasefeat {

enum class ClassLabel : int { Alzheimer = 1, MCI = 2, Normal = 3 };

inline constexpr std::array<ClassLabel, 3> kAllClasses = {
    ClassLabel::Alzheimer, ClassLabel::MCI, ClassLabel::Normal};

/// "ALZ", "MCI" or "NORMAL".
std::string_view to_string(ClassLabel label);

/// Accepts "1".."3" or the names above, case-insensitive.
std::optional<ClassLabel> parse_label(std::string_view token);

/// Zero-based position of a label in kAllClasses.
constexpr std::size_t class_index(ClassLabel label) {
    return static_cast<std::size_t>(label) - 1;
}

/// Regional time series of one subject, stored region-major (N x T).
class RoiTimeSeries {
public:
    /// Throws DataError unless N >= 2, T >= 16, dt > 0 and all entries are finite.
    RoiTimeSeries(std::string subject_id, Matrix data, double dt,
                  std::vector<std::string> region_names = {});

    const std::string& subject_id() const { return subject_id_; }
    const Matrix& data() const { return data_; }
    double dt() const { return dt_; }
    std::size_t regions() const { return data_.rows(); }
    std::size_t timepoints() const { return data_.cols(); }
    const std::vector<std::string>& region_names() const { return region_names_; }

private:
    std::string subject_id_;
    Matrix data_;
    double dt_;
    std::vector<std::string> region_names_;
};

inline constexpr std::size_t kMinRegions = 2;
inline constexpr std::size_t kMinTimepoints = 16;

struct SubjectRecord {
    std::string subject_id;
    ClassLabel label;
    std::filesystem::path path;  // resolved against the manifest directory
};

struct SubjectCohort {
    std::vector<SubjectRecord> records;
    std::optional<std::size_t> region_count;  // set once a series has been loaded

    std::vector<ClassLabel> labels() const;
};

/// Parses a `subject_id,label,path` manifest. Record order follows row order.
SubjectCohort load_manifest(const std::filesystem::path& path);

/// Writes a manifest whose paths are relative to the manifest's directory
/// when possible.
void write_manifest(const std::filesystem::path& path, const SubjectCohort& cohort);

/// Reads T rows x N columns; a non-numeric first row is taken as region names.
RoiTimeSeries load_roi_csv(const std::filesystem::path& path, double dt,
                           std::string subject_id = {});

/// Inverse of load_roi_csv. Values are written with 17 significant digits.
void write_roi_csv(const std::filesystem::path& path, const RoiTimeSeries& ts);

struct ValidationReport {
    std::array<std::size_t, 3> class_counts{};
    std::optional<std::size_t> region_count;
    std::vector<std::string> findings;

    bool ok() const { return findings.empty(); }
};

/// Loads every series once and reports dimension mismatches, unreadable files
/// and degenerate cohorts. Never throws for data problems.
ValidationReport validate_cohort(const SubjectCohort& cohort, double dt = 3.0);

}  // namespace phasefeat
