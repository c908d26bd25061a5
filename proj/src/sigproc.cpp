#include "phasefeat/sigproc.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "phasefeat/error.hpp"
#include "phasefeat/fft.hpp"
#include "phasefeat/rng.hpp"

namespace phasefeat {

namespace {

constexpr double kPi = std::numbers::pi;

// Steady-state section states for a unit step, cascaded (each section sees
// the previous section's DC gain).
std::vector<std::array<double, 2>> step_initial_state(const FilterCoefficients& coeffs) {
    std::vector<std::array<double, 2>> zi;
    zi.reserve(coeffs.sections.size());
    double scale = 1.0;
    for (const auto& s : coeffs.sections) {
        const double dc = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
        const double z2 = s.b2 - s.a2 * dc;
        const double z1 = dc - s.b0;
        zi.push_back({z1 * scale, z2 * scale});
        scale *= dc;
    }
    return zi;
}

void run_cascade(std::vector<double>& x, const FilterCoefficients& coeffs,
                 const std::vector<std::array<double, 2>>& zi_unit) {
    if (x.empty()) return;
    const double x0 = x.front();
    for (std::size_t k = 0; k < coeffs.sections.size(); ++k) {
        const auto& s = coeffs.sections[k];
        double z1 = zi_unit[k][0] * x0;
        double z2 = zi_unit[k][1] * x0;
        for (double& v : x) {
            const double in = v;
            const double out = s.b0 * in + z1;
            z1 = s.b1 * in - s.a1 * out + z2;
            z2 = s.b2 * in - s.a2 * out;
            v = out;
        }
    }
}

}  // namespace

// ---------------------------------------------------------------------------

void FilterSpec::validate() const {
    if (!(fs > 0.0) || !std::isfinite(fs)) throw ConfigError("filter: sampling rate must be positive");
    if (order < 1) throw ConfigError("filter: order must be >= 1");
    if (!(f_lo > 0.0)) throw ConfigError("filter: f_lo must be positive");
    if (!(f_lo < f_hi)) throw ConfigError("filter: f_lo must be below f_hi");
    if (!(f_hi < fs / 2.0))
        throw ConfigError("filter: f_hi must be below the Nyquist frequency " +
                          std::to_string(fs / 2.0) + " Hz");
}

Complex FilterCoefficients::response(double f) const {
    const Complex zinv = std::polar(1.0, -2.0 * kPi * f / fs);
    const Complex zinv2 = zinv * zinv;
    Complex h{1.0, 0.0};
    for (const auto& s : sections)
        h *= (s.b0 + s.b1 * zinv + s.b2 * zinv2) / (1.0 + s.a1 * zinv + s.a2 * zinv2);
    return h;
}

FilterCoefficients design_bandpass(const FilterSpec& spec) {
    spec.validate();
    const int n = spec.order;
    const double fs2 = 2.0 * spec.fs;

    // Prewarped analog edges.
    const double w1 = fs2 * std::tan(kPi * spec.f_lo / spec.fs);
    const double w2 = fs2 * std::tan(kPi * spec.f_hi / spec.fs);
    const double bw = w2 - w1;
    const double w0sq = w1 * w2;

    // Low-pass prototype poles -> band-pass poles -> bilinear map.
    std::vector<Complex> poles;
    poles.reserve(2 * n);
    for (int k = 0; k < n; ++k) {
        const Complex p = std::polar(1.0, kPi * (2.0 * k + n + 1.0) / (2.0 * n));
        const Complex pb = p * bw;
        const Complex disc = std::sqrt(pb * pb - 4.0 * w0sq);
        for (const Complex s : {(pb + disc) / 2.0, (pb - disc) / 2.0})
            poles.push_back((fs2 + s) / (fs2 - s));
    }

    // Pair into second-order sections: conjugate pairs, then leftover reals.
    std::vector<Complex> upper, reals;
    for (const auto& p : poles) {
        if (std::abs(p.imag()) > 1e-12 * std::abs(p)) {
            if (p.imag() > 0) upper.push_back(p);
        } else {
            reals.push_back({p.real(), 0.0});
        }
    }
    std::sort(reals.begin(), reals.end(), [](Complex a, Complex b) { return a.real() < b.real(); });
    // Poles farther from the unit circle first.
    std::sort(upper.begin(), upper.end(),
              [](Complex a, Complex b) { return std::abs(a) < std::abs(b); });

    FilterCoefficients out;
    out.fs = spec.fs;
    for (const auto& p : upper)
        out.sections.push_back({1.0, 0.0, -1.0, -2.0 * p.real(), std::norm(p)});
    for (std::size_t i = 0; i + 1 < reals.size(); i += 2) {
        const double r1 = reals[i].real();
        const double r2 = reals[i + 1].real();
        out.sections.push_back({1.0, 0.0, -1.0, -(r1 + r2), r1 * r2});
    }

    // Unit gain at the digital image of the analog center frequency.
    const double fc = spec.fs / kPi * std::atan(std::sqrt(w0sq) / fs2);
    const double g = std::abs(out.response(fc));
    const double per_section = std::pow(g, -1.0 / static_cast<double>(out.sections.size()));
    for (auto& s : out.sections) {
        s.b0 *= per_section;
        s.b1 *= per_section;
        s.b2 *= per_section;
    }
    return out;
}

std::vector<double> causal_filter(std::span<const double> x, const FilterCoefficients& coeffs) {
    std::vector<double> y(x.begin(), x.end());
    run_cascade(y, coeffs, step_initial_state(coeffs));
    return y;
}

std::vector<double> zero_phase_filter(std::span<const double> x, const FilterCoefficients& coeffs) {
    const std::size_t T = x.size();
    const std::size_t min_len = 3 * coeffs.state_length();
    if (T < min_len || T < 2)
        throw DataError("zero_phase_filter: signal of length " + std::to_string(T) +
                        " is shorter than the required " + std::to_string(min_len));
    const std::size_t pad = std::min(T - 1, min_len);

    std::vector<double> ext;
    ext.reserve(T + 2 * pad);
    for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
    ext.insert(ext.end(), x.begin(), x.end());
    for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[T - 1] - x[T - 1 - i]);

    // Forward-backward and backward-forward orderings differ only through
    // their edge transients; averaging them makes the result exactly
    // time-reversal equivariant.
    const auto zi = step_initial_state(coeffs);
    std::vector<double> fb = ext;
    run_cascade(fb, coeffs, zi);
    std::reverse(fb.begin(), fb.end());
    run_cascade(fb, coeffs, zi);
    std::reverse(fb.begin(), fb.end());

    std::vector<double> bf(ext.rbegin(), ext.rend());
    run_cascade(bf, coeffs, zi);
    std::reverse(bf.begin(), bf.end());
    run_cascade(bf, coeffs, zi);

    std::vector<double> y(T);
    for (std::size_t t = 0; t < T; ++t) y[t] = 0.5 * (fb[pad + t] + bf[pad + t]);
    return y;
}

// ---------------------------------------------------------------------------

std::vector<Complex> analytic_signal(std::span<const double> x) {
    const std::size_t T = x.size();
    if (T < 2) throw DataError("analytic_signal: need at least 2 samples");
    std::vector<Complex> spec(x.begin(), x.end());
    fft::forward(spec);
    const std::size_t half = T / 2;
    const std::size_t last_doubled = (T % 2 == 0) ? half - 1 : half;
    for (std::size_t k = 1; k <= last_doubled; ++k) spec[k] *= 2.0;
    for (std::size_t k = last_doubled + 1 + (T % 2 == 0 ? 1 : 0); k < T; ++k) spec[k] = 0.0;
    fft::inverse(spec);
    const double inv = 1.0 / static_cast<double>(T);
    for (auto& v : spec) v *= inv;
    return spec;
}

WrappedPhase instantaneous_phase(std::span<const Complex> z) {
    WrappedPhase out;
    out.phase.reserve(z.size());
    for (const auto& v : z) {
        if (v.real() == 0.0 && v.imag() == 0.0) {
            ++out.degenerate_samples;
            out.phase.push_back(0.0);
            continue;
        }
        // atan2 returns [-pi, pi]; fold -pi onto pi.
        double a = std::atan2(v.imag(), v.real());
        if (a <= -kPi) a = kPi;
        out.phase.push_back(a);
    }
    return out;
}

std::vector<double> instantaneous_envelope(std::span<const Complex> z) {
    std::vector<double> out;
    out.reserve(z.size());
    for (const auto& v : z) out.push_back(std::abs(v));
    return out;
}

double wrap_to_pi(double angle) {
    const double two_pi = 2.0 * kPi;
    double w = angle - two_pi * std::ceil((angle - kPi) / two_pi);
    if (w <= -kPi) w += two_pi;
    if (w > kPi) w -= two_pi;
    return w;
}

std::vector<double> unwrap_phase(std::span<const double> wrapped) {
    std::vector<double> out(wrapped.begin(), wrapped.end());
    const double two_pi = 2.0 * kPi;
    double correction = 0.0;
    for (std::size_t i = 1; i < wrapped.size(); ++i) {
        const double d = wrapped[i] - wrapped[i - 1];
        double steps = -std::ceil((d - kPi) / two_pi);
        // Guard the half-open boundary against rounding in the division.
        if (d + two_pi * steps <= -kPi) steps += 1.0;
        correction += two_pi * steps;
        out[i] = wrapped[i] + correction;
    }
    return out;
}

AnalyticDecomposition decompose(std::span<const double> x, const FilterCoefficients& coeffs) {
    const auto filtered = zero_phase_filter(x, coeffs);
    const auto z = analytic_signal(filtered);
    auto phase = instantaneous_phase(z);
    AnalyticDecomposition out;
    out.unwrapped_phase = unwrap_phase(phase.phase);
    out.wrapped_phase = std::move(phase.phase);
    out.envelope = instantaneous_envelope(z);
    out.degenerate_samples = phase.degenerate_samples;
    return out;
}

// ---------------------------------------------------------------------------

void TfpConfig::validate() const {
    if (ensembles < 1) throw ConfigError("tfp: ensembles must be >= 1");
    if (!(dither >= 0.0) || !(dither < 0.1)) throw ConfigError("tfp: dither must lie in [0, 0.1)");
}

namespace {

constexpr int kMaxRedraws = 100;

FilterSpec perturbed_spec(const FilterSpec& spec, double dither, Rng& rng) {
    std::uniform_real_distribution<double> u(-dither, dither);
    for (int attempt = 0; attempt <= kMaxRedraws; ++attempt) {
        FilterSpec s = spec;
        s.f_lo = spec.f_lo * (1.0 + u(rng));
        s.f_hi = spec.f_hi * (1.0 + u(rng));
        if (s.f_lo > 0.0 && s.f_lo < s.f_hi && s.f_hi < s.fs / 2.0) return s;
    }
    throw DataError("tfp: could not draw a valid perturbed band after 100 retries");
}

}  // namespace

std::vector<AnalyticDecomposition> tfp_estimate(const Matrix& signals, const FilterSpec& spec,
                                                const TfpConfig& cfg) {
    spec.validate();
    cfg.validate();
    const std::size_t N = signals.rows();
    const std::size_t T = signals.cols();

    // Without any randomness every member is identical; one pass is exact.
    const bool deterministic = cfg.dither == 0.0 && !cfg.input_dither_snr_db;
    const std::size_t members = deterministic ? 1 : cfg.ensembles;

    if (deterministic) {
        const auto coeffs = design_bandpass(spec);
        std::vector<AnalyticDecomposition> out;
        out.reserve(N);
        for (std::size_t r = 0; r < N; ++r) out.push_back(decompose(signals.row(r), coeffs));
        return out;
    }

    Matrix sum_cos(N, T), sum_sin(N, T), sum_env(N, T);
    std::vector<std::size_t> degenerate(N, 0);
    std::vector<double> noisy(T);
    for (std::size_t m = 0; m < members; ++m) {
        Rng filter_rng(derive_seed(cfg.seed, m));
        const FilterSpec s = cfg.dither > 0.0 ? perturbed_spec(spec, cfg.dither, filter_rng) : spec;
        const auto coeffs = design_bandpass(s);
        for (std::size_t r = 0; r < N; ++r) {
            std::span<const double> input = signals.row(r);
            if (cfg.input_dither_snr_db) {
                double power = 0.0;
                for (double v : input) power += v * v;
                power /= static_cast<double>(T);
                const double sigma = std::sqrt(power / std::pow(10.0, *cfg.input_dither_snr_db / 10.0));
                Rng noise_rng(derive_seed(derive_seed(cfg.seed ^ 0x5eedULL, m), r));
                std::normal_distribution<double> nd(0.0, 1.0);
                for (std::size_t t = 0; t < T; ++t) noisy[t] = input[t] + sigma * nd(noise_rng);
                input = noisy;
            }
            const auto z = analytic_signal(zero_phase_filter(input, coeffs));
            for (std::size_t t = 0; t < T; ++t) {
                const double mag = std::abs(z[t]);
                sum_env(r, t) += mag;
                if (mag > 0.0) {
                    sum_cos(r, t) += z[t].real() / mag;
                    sum_sin(r, t) += z[t].imag() / mag;
                }
            }
        }
    }

    std::vector<AnalyticDecomposition> out(N);
    const double inv = 1.0 / static_cast<double>(members);
    for (std::size_t r = 0; r < N; ++r) {
        std::vector<Complex> mean_phasor(T);
        auto& d = out[r];
        d.envelope.resize(T);
        for (std::size_t t = 0; t < T; ++t) {
            mean_phasor[t] = {sum_cos(r, t), sum_sin(r, t)};
            d.envelope[t] = sum_env(r, t) * inv;
        }
        auto phase = instantaneous_phase(mean_phasor);
        d.degenerate_samples = phase.degenerate_samples;
        d.unwrapped_phase = unwrap_phase(phase.phase);
        d.wrapped_phase = std::move(phase.phase);
    }
    return out;
}

AnalyticDecomposition tfp_estimate(std::span<const double> x, const FilterSpec& spec,
                                   const TfpConfig& cfg) {
    Matrix m(1, x.size());
    std::copy(x.begin(), x.end(), m.row(0).begin());
    return std::move(tfp_estimate(m, spec, cfg).front());
}

}  // namespace phasefeat
