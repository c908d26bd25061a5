#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "phasefeat/ingest.hpp"
#include "phasefeat/rng.hpp"

namespace phasefeat {

struct SynthClassParams {
    std::vector<std::pair<std::size_t, std::size_t>> coupled_pairs;
    double kappa = 5.0;  // phase-jitter concentration; infinity means exact locking
    double amplitude = 1.0;
    double noise = 0.2;  // white-noise standard deviation
};

struct SynthConfig {
    std::size_t regions = 16;
    std::size_t timepoints = 140;
    double dt = 3.0;
    std::array<std::size_t, 3> subjects_per_class{37, 37, 37};
    std::uint64_t seed = 1;
    std::array<SynthClassParams, 3> classes;

    /// Throws ConfigError on N < 2, T < 32, dt <= 0, bad pairs or parameters.
    void validate() const;
};

/// Names accepted by synth_preset.
std::vector<std::string_view> synth_preset_names();

/// "separable", "hard" or "null" with `regions` regions; half of the regions
/// are coupled in adjacent pairs (0,1), (2,3), ...
SynthConfig synth_preset(std::string_view name, std::size_t regions = 16);

/// Angle drawn from a von Mises distribution centred on 0.
double sample_von_mises(Rng& rng, double kappa);

std::string synth_subject_id(ClassLabel label, std::size_t index);

/// Each region is a weighted sum of three in-band sinusoids plus white noise.
/// For a coupled pair (i, j), region j's dominant sinusoid follows region i's
/// dominant phase plus a constant offset and per-sample von Mises jitter.
RoiTimeSeries generate_subject(const SynthConfig& cfg, ClassLabel label, std::size_t index);

/// Writes `subjects/<id>.csv` for every subject and `manifest.csv` under
/// `out_dir` (created if missing). Returns the cohort as written.
SubjectCohort generate_cohort(const SynthConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace phasefeat
