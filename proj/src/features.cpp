#include "phasefeat/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "phasefeat/error.hpp"
#include "phasefeat/fft.hpp"
#include "phasefeat/rng.hpp"

namespace phasefeat {

namespace {

constexpr std::array<std::string_view, kFeatureSetCount> kSetNames = {"IPPow", "IEPow", "IPEnt",
                                                                      "IEEnt", "PLV",   "MSC"};

}  // namespace

std::string_view to_string(FeatureSetId id) { return kSetNames[static_cast<std::size_t>(id)]; }

std::optional<FeatureSetId> parse_feature_set(std::string_view name) {
    for (std::size_t i = 0; i < kFeatureSetCount; ++i)
        if (kSetNames[i] == name) return kAllFeatureSets[i];
    return std::nullopt;
}

double power_feature(std::span<const double> seq) {
    double sum = 0.0;
    for (double v : seq) sum += v * v;
    return sum;
}

double entropy_feature(std::span<const double> seq, const EntropyConfig& cfg) {
    if (cfg.bins < 2) throw ConfigError("entropy: bins must be >= 2");
    if (!(cfg.log_base > 0.0) || cfg.log_base == 1.0)
        throw ConfigError("entropy: log base must be positive and not 1");
    if (seq.empty()) return 0.0;
    const auto [lo_it, hi_it] = std::minmax_element(seq.begin(), seq.end());
    const double lo = *lo_it;
    const double range = *hi_it - lo;
    if (!(range > 0.0)) return 0.0;

    std::vector<std::size_t> counts(cfg.bins, 0);
    const double scale = static_cast<double>(cfg.bins) / range;
    for (double v : seq) {
        auto k = static_cast<std::size_t>((v - lo) * scale);
        ++counts[std::min(k, cfg.bins - 1)];  // last bin is right-closed
    }
    const double n = static_cast<double>(seq.size());
    const double log_b = std::log(cfg.log_base);
    double h = 0.0;
    for (std::size_t c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / n;
        h -= p * std::log(p) / log_b;
    }
    return h;
}

// ---------------------------------------------------------------------------

CoherencyMatrix plv_matrix(const Matrix& phases) {
    const std::size_t N = phases.rows();
    const std::size_t T = phases.cols();
    if (N < 2) throw DataError("plv_matrix: need at least 2 signals");
    if (T == 0) throw DataError("plv_matrix: empty phase sequences");

    Matrix c(N, T), s(N, T);
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t t = 0; t < T; ++t) {
            c(i, t) = std::cos(phases(i, t));
            s(i, t) = std::sin(phases(i, t));
        }

    CoherencyMatrix out{Matrix(N, N, 0.0), CoherencyKind::PLV};
    const double inv = 1.0 / static_cast<double>(T);
    for (std::size_t i = 0; i < N; ++i) {
        out.values(i, i) = 1.0;
        for (std::size_t j = i + 1; j < N; ++j) {
            // exp(i(phi_j - phi_i)) = (c_j c_i + s_j s_i) + i (s_j c_i - c_j s_i)
            double re = 0.0, im = 0.0;
            for (std::size_t t = 0; t < T; ++t) {
                re += c(j, t) * c(i, t) + s(j, t) * s(i, t);
                im += s(j, t) * c(i, t) - c(j, t) * s(i, t);
            }
            const double v = std::min(1.0, std::hypot(re * inv, im * inv));
            out.values(i, j) = v;
            out.values(j, i) = v;
        }
    }
    return out;
}

std::size_t WelchConfig::step() const {
    const auto overlap = static_cast<std::size_t>(std::floor(overlap_fraction * segment_length));
    return std::max<std::size_t>(1, segment_length - overlap);
}

std::size_t WelchConfig::segment_count(std::size_t length) const {
    if (length < segment_length) return 0;
    return 1 + (length - segment_length) / step();
}

void WelchConfig::validate() const {
    if (segment_length < 8) throw ConfigError("welch: segment length must be >= 8");
    if (!(overlap_fraction >= 0.0 && overlap_fraction < 1.0))
        throw ConfigError("welch: overlap must lie in [0, 1)");
    if (!(band_lo >= 0.0 && band_lo <= band_hi)) throw ConfigError("welch: invalid band");
}

CoherencyMatrix msc_matrix(const Matrix& envelopes, double fs, const WelchConfig& cfg) {
    cfg.validate();
    const std::size_t N = envelopes.rows();
    const std::size_t T = envelopes.cols();
    const std::size_t L = cfg.segment_length;
    const std::size_t K = cfg.segment_count(T);
    if (N < 2) throw DataError("msc_matrix: need at least 2 signals");
    if (K < 2)
        throw DataError("msc_matrix: " + std::to_string(K) + " Welch segment(s) of length " +
                        std::to_string(L) + " fit " + std::to_string(T) +
                        " samples; at least 2 are required");

    std::vector<std::size_t> bins;
    for (std::size_t k = 0; k <= L / 2; ++k) {
        const double f = static_cast<double>(k) * fs / static_cast<double>(L);
        if (f >= cfg.band_lo && f <= cfg.band_hi) bins.push_back(k);
    }
    if (bins.empty()) throw DataError("msc_matrix: no frequency bins inside the band");
    const std::size_t B = bins.size();

    std::vector<double> window(L, 1.0);
    if (cfg.window == WindowKind::Hann)
        for (std::size_t n = 0; n < L; ++n)
            window[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / static_cast<double>(L));

    // spectra[i][k * B + b]: in-band DFT bin b of segment k for signal i.
    std::vector<std::vector<Complex>> spectra(N, std::vector<Complex>(K * B));
    std::vector<Complex> buf(L);
    const std::size_t step = cfg.step();
    for (std::size_t i = 0; i < N; ++i) {
        const auto row = envelopes.row(i);
        for (std::size_t k = 0; k < K; ++k) {
            const auto seg = row.subspan(k * step, L);
            double mean = 0.0;
            for (double v : seg) mean += v;
            mean /= static_cast<double>(L);
            for (std::size_t n = 0; n < L; ++n) buf[n] = (seg[n] - mean) * window[n];
            fft::forward(buf);
            for (std::size_t b = 0; b < B; ++b) spectra[i][k * B + b] = buf[bins[b]];
        }
    }

    // Auto-spectra.
    std::vector<std::vector<double>> auto_spec(N, std::vector<double>(B, 0.0));
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t k = 0; k < K; ++k)
            for (std::size_t b = 0; b < B; ++b) auto_spec[i][b] += std::norm(spectra[i][k * B + b]);

    CoherencyMatrix out{Matrix(N, N, 0.0), CoherencyKind::MSC};
    for (std::size_t i = 0; i < N; ++i) {
        out.values(i, i) = 1.0;
        for (std::size_t j = i + 1; j < N; ++j) {
            double acc = 0.0;
            for (std::size_t b = 0; b < B; ++b) {
                Complex cross{0.0, 0.0};
                for (std::size_t k = 0; k < K; ++k)
                    cross += spectra[i][k * B + b] * std::conj(spectra[j][k * B + b]);
                const double denom = auto_spec[i][b] * auto_spec[j][b];
                const double coh = denom > 0.0 ? std::clamp(std::norm(cross) / denom, 0.0, 1.0) : 0.0;
                acc = cfg.reduce == BandReduce::Max ? std::max(acc, coh) : acc + coh;
            }
            const double v = cfg.reduce == BandReduce::Max ? acc : acc / static_cast<double>(B);
            out.values(i, j) = std::clamp(v, 0.0, 1.0);
            out.values(j, i) = out.values(i, j);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

FeatureLayout::FeatureLayout(std::size_t regions, std::vector<std::string> region_names)
    : regions_(regions) {
    if (region_names.empty())
        for (std::size_t r = 0; r < regions; ++r) region_names.push_back("R" + std::to_string(r));
    const std::size_t pairs = regions * (regions - 1) / 2;
    std::size_t pos = 0;
    for (std::size_t s = 0; s < kFeatureSetCount; ++s) {
        const std::size_t len = s < 4 ? regions : pairs;
        ranges_[s] = {pos, pos + len};
        pos += len;
    }
    labels_.reserve(pos);
    for (std::size_t s = 0; s < 4; ++s)
        for (std::size_t r = 0; r < regions; ++r)
            labels_.push_back(std::string(kSetNames[s]) + ":" + region_names[r]);
    for (std::size_t s = 4; s < kFeatureSetCount; ++s)
        for (std::size_t i = 0; i < regions; ++i)
            for (std::size_t j = i + 1; j < regions; ++j)
                labels_.push_back(std::string(kSetNames[s]) + ":" + region_names[i] + "~" +
                                  region_names[j]);
}

std::vector<std::size_t> FeatureLayout::columns(std::span<const FeatureSetId> sets) const {
    std::vector<std::size_t> out;
    for (auto id : sets) {
        const auto r = range(id);
        for (std::size_t i = r.begin; i < r.end; ++i) out.push_back(i);
    }
    return out;
}

std::uint64_t subject_seed(std::uint64_t global_seed, std::string_view subject_id) {
    return derive_seed(global_seed, hash_string(subject_id));
}

SubjectExtraction extract_subject(const RoiTimeSeries& ts, const FeatureConfig& cfg) {
    const std::size_t N = ts.regions();
    const std::size_t T = ts.timepoints();
    const std::string who = "subject " + ts.subject_id();

    FilterSpec filter = cfg.filter;
    filter.fs = 1.0 / ts.dt();
    TfpConfig tfp = cfg.tfp;
    tfp.seed = subject_seed(cfg.tfp.seed, ts.subject_id());

    std::vector<AnalyticDecomposition> dec;
    try {
        dec = tfp_estimate(ts.data(), filter, tfp);
    } catch (const std::exception& e) {
        throw DataError(who + ": phase/envelope estimation failed: " + e.what());
    }

    Matrix phases(N, T), envelopes(N, T);
    for (std::size_t r = 0; r < N; ++r) {
        const auto& d = dec[r];
        const auto& ip = cfg.ip_form == PhaseForm::Unwrapped ? d.unwrapped_phase : d.wrapped_phase;
        std::copy(ip.begin(), ip.end(), phases.row(r).begin());
        std::copy(d.envelope.begin(), d.envelope.end(), envelopes.row(r).begin());
    }

    SubjectExtraction out;
    out.features.layout = FeatureLayout(N, ts.region_names());
    const auto& layout = out.features.layout;
    auto& v = out.features.values;
    v.assign(layout.size(), 0.0);

    for (std::size_t r = 0; r < N; ++r) {
        v[layout.range(FeatureSetId::IPPow).begin + r] = power_feature(phases.row(r));
        v[layout.range(FeatureSetId::IEPow).begin + r] = power_feature(envelopes.row(r));
        v[layout.range(FeatureSetId::IPEnt).begin + r] = entropy_feature(phases.row(r), cfg.entropy);
        v[layout.range(FeatureSetId::IEEnt).begin + r] = entropy_feature(envelopes.row(r), cfg.entropy);
    }

    // PLV always uses the unwrapped phase; the exponential makes it identical
    // to the wrapped form up to rounding.
    Matrix unwrapped(N, T);
    for (std::size_t r = 0; r < N; ++r)
        std::copy(dec[r].unwrapped_phase.begin(), dec[r].unwrapped_phase.end(),
                  unwrapped.row(r).begin());
    out.plv = plv_matrix(unwrapped);
    try {
        out.msc = msc_matrix(envelopes, filter.fs, cfg.welch);
    } catch (const DataError& e) {
        throw DataError(who + ": " + e.what());
    }

    std::size_t pos_plv = layout.range(FeatureSetId::PLV).begin;
    std::size_t pos_msc = layout.range(FeatureSetId::MSC).begin;
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = i + 1; j < N; ++j) {
            v[pos_plv++] = out.plv.values(i, j);
            v[pos_msc++] = out.msc.values(i, j);
        }
    return out;
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    char buf[32];
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", m(r, c));
            out << (c ? "," : "") << buf;
        }
        out << '\n';
    }
}

}  // namespace phasefeat
