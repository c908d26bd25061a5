#include "phasefeat/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "phasefeat/error.hpp"

namespace phasefeat {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view what) {
    throw ConfigError("config: " + std::string(key) + " = '" + std::string(value) + "': " +
                      std::string(what));
}

double to_double(std::string_view key, std::string_view v) {
    const auto l = lower(v);
    if (l == "inf" || l == "infinity") return std::numeric_limits<double>::infinity();
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size() || v.empty() || std::isnan(out))
        bad_value(key, v, "expected a number");
    return out;
}

std::uint64_t to_u64(std::string_view key, std::string_view v) {
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size() || v.empty())
        bad_value(key, v, "expected a non-negative integer");
    return out;
}

std::size_t to_size(std::string_view key, std::string_view v) {
    return static_cast<std::size_t>(to_u64(key, v));
}

std::vector<std::pair<std::size_t, std::size_t>> to_pairs(std::string_view key, std::string_view v) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    std::string_view rest = v;
    while (!trim(rest).empty()) {
        const auto semi = rest.find(';');
        const auto item = trim(rest.substr(0, semi));
        rest = semi == std::string_view::npos ? std::string_view{} : rest.substr(semi + 1);
        if (item.empty()) continue;
        const auto dash = item.find('-');
        if (dash == std::string_view::npos) bad_value(key, v, "pairs are written i-j;k-l");
        out.emplace_back(to_size(key, trim(item.substr(0, dash))), to_size(key, trim(item.substr(dash + 1))));
    }
    return out;
}

std::string fmt(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string fmt(std::uint64_t v) { return std::to_string(v); }

std::string fmt_pairs(const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
    std::string out;
    for (const auto& [i, j] : pairs) {
        if (!out.empty()) out += ';';
        out += std::to_string(i) + "-" + std::to_string(j);
    }
    return out;
}

constexpr std::array<std::string_view, 3> kClassKeys = {"alz", "mci", "normal"};

}  // namespace

void PipelineConfig::set(std::string_view key, std::string_view raw) {
    const auto value = trim(raw);
    auto& f = features;
    const std::string k(key);
    if (k == "sampling.dt") dt = to_double(key, value);
    else if (k == "filter.f_lo") f.filter.f_lo = to_double(key, value);
    else if (k == "filter.f_hi") f.filter.f_hi = to_double(key, value);
    else if (k == "filter.order") f.filter.order = static_cast<int>(to_size(key, value));
    else if (k == "tfp.ensembles") f.tfp.ensembles = to_size(key, value);
    else if (k == "tfp.dither") f.tfp.dither = to_double(key, value);
    else if (k == "tfp.seed") f.tfp.seed = to_u64(key, value);
    else if (k == "tfp.input_snr_db") {
        if (lower(value) == "off") f.tfp.input_dither_snr_db.reset();
        else f.tfp.input_dither_snr_db = to_double(key, value);
    }
    else if (k == "entropy.bins") f.entropy.bins = to_size(key, value);
    else if (k == "entropy.log_base") f.entropy.log_base = to_double(key, value);
    else if (k == "features.ip_form") {
        const auto l = lower(value);
        if (l == "unwrapped") f.ip_form = PhaseForm::Unwrapped;
        else if (l == "wrapped") f.ip_form = PhaseForm::Wrapped;
        else bad_value(key, value, "expected unwrapped or wrapped");
    }
    else if (k == "welch.segment") f.welch.segment_length = to_size(key, value);
    else if (k == "welch.overlap") f.welch.overlap_fraction = to_double(key, value);
    else if (k == "welch.window") {
        const auto l = lower(value);
        if (l == "hann") f.welch.window = WindowKind::Hann;
        else if (l == "rectangular") f.welch.window = WindowKind::Rectangular;
        else bad_value(key, value, "expected hann or rectangular");
    }
    else if (k == "welch.reduce") {
        const auto l = lower(value);
        if (l == "mean") f.welch.reduce = BandReduce::Mean;
        else if (l == "max") f.welch.reduce = BandReduce::Max;
        else bad_value(key, value, "expected mean or max");
    }
    else if (k == "selection.alpha") selection.alpha = to_double(key, value);
    else if (k == "selection.rule") {
        const auto l = lower(value);
        if (l == "union") selection.rule = CombineRule::Union;
        else if (l == "intersection") selection.rule = CombineRule::Intersection;
        else bad_value(key, value, "expected union or intersection");
    }
    else if (k == "selection.folds") selection.sfffs.criterion_folds = to_size(key, value);
    else if (k == "selection.seed") selection.sfffs.seed = to_u64(key, value);
    else if (k == "selection.max_sets") selection.sfffs.max_sets = to_size(key, value);
    else if (k == "knn.k") knn_k = to_size(key, value);
    else if (k == "split.per_class_test") per_class_test = to_size(key, value);
    else if (k == "split.seed") split_seed = to_u64(key, value);
    else if (k == "synth.preset") synth_preset = lower(value);
    else if (k == "synth.regions") synth_regions = to_size(key, value);
    else if (k == "synth.timepoints") synth_timepoints = to_size(key, value);
    else if (k == "synth.subjects_per_class") synth_subjects_per_class = to_size(key, value);
    else if (k == "synth.seed") synth_seed = to_u64(key, value);
    else {
        // synth.<class>.<field>
        for (std::size_t c = 0; c < 3; ++c) {
            const std::string prefix = "synth." + std::string(kClassKeys[c]) + ".";
            if (k.rfind(prefix, 0) != 0) continue;
            const auto field = k.substr(prefix.size());
            auto& o = synth_overrides[c];
            if (field == "kappa") o.kappa = to_double(key, value);
            else if (field == "amplitude") o.amplitude = to_double(key, value);
            else if (field == "noise") o.noise = to_double(key, value);
            else if (field == "pairs") o.pairs = to_pairs(key, value);
            else break;
            return;
        }
        throw ConfigError("config: unknown key '" + k + "'");
    }
}

void PipelineConfig::set_all_seeds(std::uint64_t seed) {
    features.tfp.seed = seed;
    selection.sfffs.seed = seed;
    split_seed = seed;
    synth_seed = seed;
}

FeatureConfig PipelineConfig::feature_config() const {
    FeatureConfig f = features;
    f.filter.fs = 1.0 / dt;
    f.welch.band_lo = f.filter.f_lo;
    f.welch.band_hi = f.filter.f_hi;
    return f;
}

SynthConfig PipelineConfig::synth_config() const {
    SynthConfig s = phasefeat::synth_preset(synth_preset, synth_regions);
    s.timepoints = synth_timepoints;
    s.dt = dt;
    s.subjects_per_class = {synth_subjects_per_class, synth_subjects_per_class,
                            synth_subjects_per_class};
    s.seed = synth_seed;
    for (std::size_t c = 0; c < 3; ++c) {
        const auto& o = synth_overrides[c];
        auto& p = s.classes[c];
        if (o.kappa) p.kappa = *o.kappa;
        if (o.amplitude) p.amplitude = *o.amplitude;
        if (o.noise) p.noise = *o.noise;
        if (o.pairs) p.coupled_pairs = *o.pairs;
    }
    return s;
}

void PipelineConfig::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("config: sampling.dt must be positive");
    const auto f = feature_config();
    f.filter.validate();
    f.tfp.validate();
    if (f.entropy.bins < 2) throw ConfigError("config: entropy.bins must be >= 2");
    if (!(f.entropy.log_base > 0.0) || f.entropy.log_base == 1.0)
        throw ConfigError("config: entropy.log_base must be positive and not 1");
    f.welch.validate();
    if (!(selection.alpha > 0.0 && selection.alpha < 1.0))
        throw ConfigError("config: selection.alpha must lie in (0, 1)");
    if (selection.sfffs.criterion_folds < 2) throw ConfigError("config: selection.folds must be >= 2");
    if (selection.sfffs.max_sets < 1) throw ConfigError("config: selection.max_sets must be >= 1");
    if (knn_k < 1) throw ConfigError("config: knn.k must be >= 1");
    if (synth_subjects_per_class < 1)
        throw ConfigError("config: synth.subjects_per_class must be >= 1");
    synth_config().validate();
}

std::vector<std::pair<std::string, std::string>> PipelineConfig::entries() const {
    const auto& f = features;
    std::vector<std::pair<std::string, std::string>> e = {
        {"sampling.dt", fmt(dt)},
        {"filter.f_lo", fmt(f.filter.f_lo)},
        {"filter.f_hi", fmt(f.filter.f_hi)},
        {"filter.order", fmt(static_cast<std::uint64_t>(f.filter.order))},
        {"tfp.ensembles", fmt(static_cast<std::uint64_t>(f.tfp.ensembles))},
        {"tfp.dither", fmt(f.tfp.dither)},
        {"tfp.seed", fmt(f.tfp.seed)},
        {"tfp.input_snr_db", f.tfp.input_dither_snr_db ? fmt(*f.tfp.input_dither_snr_db) : "off"},
        {"entropy.bins", fmt(static_cast<std::uint64_t>(f.entropy.bins))},
        {"entropy.log_base", fmt(f.entropy.log_base)},
        {"features.ip_form", f.ip_form == PhaseForm::Unwrapped ? "unwrapped" : "wrapped"},
        {"welch.segment", fmt(static_cast<std::uint64_t>(f.welch.segment_length))},
        {"welch.overlap", fmt(f.welch.overlap_fraction)},
        {"welch.window", f.welch.window == WindowKind::Hann ? "hann" : "rectangular"},
        {"welch.reduce", f.welch.reduce == BandReduce::Mean ? "mean" : "max"},
        {"selection.alpha", fmt(selection.alpha)},
        {"selection.rule", selection.rule == CombineRule::Union ? "union" : "intersection"},
        {"selection.folds", fmt(static_cast<std::uint64_t>(selection.sfffs.criterion_folds))},
        {"selection.seed", fmt(selection.sfffs.seed)},
        {"selection.max_sets", fmt(static_cast<std::uint64_t>(selection.sfffs.max_sets))},
        {"knn.k", fmt(static_cast<std::uint64_t>(knn_k))},
        {"split.per_class_test", fmt(static_cast<std::uint64_t>(per_class_test))},
        {"split.seed", fmt(split_seed)},
        {"synth.preset", synth_preset},
        {"synth.regions", fmt(static_cast<std::uint64_t>(synth_regions))},
        {"synth.timepoints", fmt(static_cast<std::uint64_t>(synth_timepoints))},
        {"synth.subjects_per_class", fmt(static_cast<std::uint64_t>(synth_subjects_per_class))},
        {"synth.seed", fmt(synth_seed)},
    };
    for (std::size_t c = 0; c < 3; ++c) {
        const auto& o = synth_overrides[c];
        const std::string prefix = "synth." + std::string(kClassKeys[c]) + ".";
        if (o.kappa) e.emplace_back(prefix + "kappa", fmt(*o.kappa));
        if (o.amplitude) e.emplace_back(prefix + "amplitude", fmt(*o.amplitude));
        if (o.noise) e.emplace_back(prefix + "noise", fmt(*o.noise));
        if (o.pairs) e.emplace_back(prefix + "pairs", fmt_pairs(*o.pairs));
    }
    return e;
}

PipelineConfig PipelineConfig::parse(std::string_view text, std::string_view origin) {
    PipelineConfig cfg;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view l = line;
        if (const auto hash = l.find('#'); hash != std::string_view::npos) l = l.substr(0, hash);
        l = trim(l);
        if (l.empty()) continue;
        const auto eq = l.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(std::string(origin) + ":" + std::to_string(line_no) +
                              ": expected 'key = value'");
        try {
            cfg.set(trim(l.substr(0, eq)), trim(l.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError(std::string(origin) + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return cfg;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path.string());
}

}  // namespace phasefeat
