#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "phasefeat/features.hpp"
#include "phasefeat/selection.hpp"
#include "phasefeat/synth.hpp"

namespace phasefeat {

/// Per-class synth overrides applied on top of the chosen preset.
struct SynthClassOverride {
    std::optional<double> kappa;
    std::optional<double> amplitude;
    std::optional<double> noise;
    std::optional<std::vector<std::pair<std::size_t, std::size_t>>> pairs;
};

/// Every tunable of the pipeline. Loaded from `key = value` lines; `#`
/// starts a comment; unknown keys are rejected.
struct PipelineConfig {
    double dt = 3.0;
    FeatureConfig features;
    SelectionConfig selection;
    std::size_t knn_k = 5;
    std::size_t per_class_test = 10;
    std::uint64_t split_seed = 0;

    std::string synth_preset = "separable";
    std::size_t synth_regions = 16;
    std::size_t synth_timepoints = 140;
    std::size_t synth_subjects_per_class = 37;
    std::uint64_t synth_seed = 1;
    std::array<SynthClassOverride, 3> synth_overrides;

    /// Parses one assignment. Throws ConfigError for unknown keys or bad values.
    void set(std::string_view key, std::string_view value);

    /// Overrides every seed (tfp, selection, split, synth).
    void set_all_seeds(std::uint64_t seed);

    /// Checks every module precondition. Throws ConfigError.
    void validate() const;

    /// Canonical `key -> value` listing of the effective configuration, in a
    /// fixed order.
    std::vector<std::pair<std::string, std::string>> entries() const;

    /// Feature configuration with the filter and Welch band bound to `dt`.
    FeatureConfig feature_config() const;

    SynthConfig synth_config() const;

    static PipelineConfig load(const std::filesystem::path& path);
    static PipelineConfig parse(std::string_view text, std::string_view origin = "<config>");
};

}  // namespace phasefeat
