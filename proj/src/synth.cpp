#include "phasefeat/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>

#include "phasefeat/error.hpp"

namespace phasefeat {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kBandLo = 0.01;
constexpr double kBandHi = 0.1;
constexpr std::array<double, 3> kComponentWeights = {1.0, 0.15, 0.1};

std::vector<std::pair<std::size_t, std::size_t>> adjacent_pairs(std::size_t regions) {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t k = 0; 2 * k + 1 < regions && 4 * k < regions; ++k)
        pairs.emplace_back(2 * k, 2 * k + 1);
    return pairs;
}

}  // namespace

void SynthConfig::validate() const {
    if (regions < 2) throw ConfigError("synth: regions must be >= 2");
    if (timepoints < 32) throw ConfigError("synth: timepoints must be >= 32");
    if (!(dt > 0.0)) throw ConfigError("synth: dt must be positive");
    if (!(kBandHi < 0.5 / dt)) throw ConfigError("synth: dt too coarse for the 0.01-0.1 Hz band");
    for (std::size_t c = 0; c < 3; ++c) {
        const auto& p = classes[c];
        const std::string who = "synth." + std::string(to_string(kAllClasses[c]));
        if (!(p.kappa >= 0.0)) throw ConfigError(who + ": kappa must be >= 0");
        if (!(p.amplitude > 0.0)) throw ConfigError(who + ": amplitude must be positive");
        if (!(p.noise >= 0.0)) throw ConfigError(who + ": noise must be >= 0");
        for (const auto& [i, j] : p.coupled_pairs)
            if (i >= regions || j >= regions || i == j)
                throw ConfigError(who + ": invalid coupled pair " + std::to_string(i) + "-" +
                                  std::to_string(j));
    }
}

std::vector<std::string_view> synth_preset_names() { return {"separable", "hard", "null"}; }

SynthConfig synth_preset(std::string_view name, std::size_t regions) {
    SynthConfig cfg;
    cfg.regions = regions;
    const auto pairs = adjacent_pairs(regions);
    const double inf = std::numeric_limits<double>::infinity();
    auto set = [&](std::array<double, 3> kappa, std::array<double, 3> amp, std::array<double, 3> noise) {
        for (std::size_t c = 0; c < 3; ++c) cfg.classes[c] = {pairs, kappa[c], amp[c], noise[c]};
    };
    if (name == "separable") {
        set({3.0, 8.0, inf}, {1.0, 1.5, 2.2}, {0.25, 0.25, 0.25});
    } else if (name == "hard") {
        // MCI sits between the other two and overlaps both.
        set({4.0, 5.0, 10.0}, {1.0, 1.04, 1.12}, {0.4, 0.4, 0.4});
    } else if (name == "null") {
        set({5.0, 5.0, 5.0}, {1.0, 1.0, 1.0}, {0.3, 0.3, 0.3});
    } else {
        std::string msg = "unknown synth preset '" + std::string(name) + "'; available:";
        for (auto n : synth_preset_names()) msg += " " + std::string(n);
        throw ConfigError(msg);
    }
    return cfg;
}

double sample_von_mises(Rng& rng, double kappa) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (std::isinf(kappa)) return 0.0;
    if (kappa < 1e-8) return kPi * (2.0 * u(rng) - 1.0);
    if (kappa > 1e6) {
        std::normal_distribution<double> n(0.0, 1.0 / std::sqrt(kappa));
        return n(rng);
    }
    // Best & Fisher (1979) rejection sampler.
    const double tau = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
    const double rho = (tau - std::sqrt(2.0 * tau)) / (2.0 * kappa);
    const double r = (1.0 + rho * rho) / (2.0 * rho);
    while (true) {
        const double u1 = u(rng);
        const double u2 = u(rng);
        const double u3 = u(rng);
        const double z = std::cos(kPi * u1);
        const double f = (1.0 + r * z) / (r + z);
        const double c = kappa * (r - f);
        if (c * (2.0 - c) - u2 > 0.0 || std::log(c / u2) + 1.0 - c >= 0.0) {
            const double theta = std::acos(std::clamp(f, -1.0, 1.0));
            return u3 > 0.5 ? theta : -theta;
        }
    }
}

std::string synth_subject_id(ClassLabel label, std::size_t index) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%03zu", index);
    return std::string(to_string(label)) + "_" + buf;
}

RoiTimeSeries generate_subject(const SynthConfig& cfg, ClassLabel label, std::size_t index) {
    cfg.validate();
    const auto& params = cfg.classes[class_index(label)];
    const std::size_t N = cfg.regions;
    const std::size_t T = cfg.timepoints;
    Rng rng(derive_seed(derive_seed(cfg.seed, static_cast<std::uint64_t>(label)), index));
    std::uniform_real_distribution<double> freq(kBandLo, kBandHi);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);

    std::vector<std::array<double, 3>> f(N), theta(N);
    for (std::size_t r = 0; r < N; ++r)
        for (std::size_t k = 0; k < 3; ++k) {
            f[r][k] = freq(rng);
            theta[r][k] = angle(rng);
        }

    // Dominant-component phase trajectories.
    Matrix dominant(N, T);
    for (std::size_t r = 0; r < N; ++r)
        for (std::size_t t = 0; t < T; ++t)
            dominant(r, t) = 2.0 * kPi * f[r][0] * static_cast<double>(t) * cfg.dt + theta[r][0];
    for (const auto& [i, j] : params.coupled_pairs) {
        const double offset = angle(rng);
        f[j][0] = f[i][0];
        for (std::size_t t = 0; t < T; ++t)
            dominant(j, t) = dominant(i, t) + offset + sample_von_mises(rng, params.kappa);
    }

    Matrix data(N, T);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (std::size_t r = 0; r < N; ++r)
        for (std::size_t t = 0; t < T; ++t) {
            const double time = static_cast<double>(t) * cfg.dt;
            double v = kComponentWeights[0] * std::cos(dominant(r, t));
            for (std::size_t k = 1; k < 3; ++k)
                v += kComponentWeights[k] * std::cos(2.0 * kPi * f[r][k] * time + theta[r][k]);
            data(r, t) = params.amplitude * v + params.noise * noise(rng);
        }
    return RoiTimeSeries(synth_subject_id(label, index), std::move(data), cfg.dt);
}

SubjectCohort generate_cohort(const SynthConfig& cfg, const std::filesystem::path& out_dir) {
    cfg.validate();
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir / "subjects", ec);
    if (ec) throw DataError("cannot create " + (out_dir / "subjects").string() + ": " + ec.message());

    SubjectCohort cohort;
    cohort.region_count = cfg.regions;
    for (auto label : kAllClasses)
        for (std::size_t i = 0; i < cfg.subjects_per_class[class_index(label)]; ++i) {
            const auto ts = generate_subject(cfg, label, i);
            const auto path = out_dir / "subjects" / (ts.subject_id() + ".csv");
            write_roi_csv(path, ts);
            cohort.records.push_back({ts.subject_id(), label, path});
        }
    write_manifest(out_dir / "manifest.csv", cohort);
    return cohort;
}

}  // namespace phasefeat
