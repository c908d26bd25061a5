#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "phasefeat/matrix.hpp"

namespace phasefeat {

using Complex = std::complex<double>;

// ---------------------------------------------------------------------------
// Band-pass design and zero-phase filtering
// ---------------------------------------------------------------------------

struct FilterSpec {
    double f_lo = 0.01;  // Hz
    double f_hi = 0.1;   // Hz
    int order = 4;       // Butterworth prototype order, per direction
    double fs = 1.0 / 3.0;

    /// Throws ConfigError unless 0 < f_lo < f_hi < fs/2 and order >= 1.
    void validate() const;
};

/// One second-order section, direct form II transposed, a0 == 1.
struct Biquad {
    double b0, b1, b2;
    double a1, a2;
};

struct FilterCoefficients {
    std::vector<Biquad> sections;
    double fs = 1.0;

    /// Complex frequency response at `f` Hz.
    Complex response(double f) const;
    /// Number of delay elements in the cascade.
    std::size_t state_length() const { return 2 * sections.size(); }
};

/// Butterworth band-pass with bilinear prewarping of both edges, so
/// |H(f_lo)| = |H(f_hi)| = 1/sqrt(2) and the peak gain is 1.
FilterCoefficients design_bandpass(const FilterSpec& spec);

/// Single forward pass with steady-state initial conditions scaled by x[0].
std::vector<double> causal_filter(std::span<const double> x, const FilterCoefficients& coeffs);

/// Zero-phase filtering with odd-reflection padding of
/// min(T-1, 3 * state_length) samples per side: the mean of the
/// forward-backward and backward-forward passes, so reversing the input
/// reverses the output exactly. Throws DataError when T < 3 * state_length.
std::vector<double> zero_phase_filter(std::span<const double> x, const FilterCoefficients& coeffs);

// ---------------------------------------------------------------------------
// Analytic signal and instantaneous parameters
// ---------------------------------------------------------------------------

/// DFT-domain analytic signal: negative frequencies zeroed, positive ones
/// doubled, DC and (even T) Nyquist kept. Requires T >= 2.
std::vector<Complex> analytic_signal(std::span<const double> x);

struct WrappedPhase {
    std::vector<double> phase;          // (-pi, pi]
    std::size_t degenerate_samples = 0;  // exact zeros, assigned phase 0
};

WrappedPhase instantaneous_phase(std::span<const Complex> z);

std::vector<double> instantaneous_envelope(std::span<const Complex> z);

/// Maps an angle into (-pi, pi].
double wrap_to_pi(double angle);

/// Adds to each sample the 2*pi multiple that brings every successive
/// difference into (-pi, pi]. Output[0] equals input[0].
std::vector<double> unwrap_phase(std::span<const double> wrapped);

struct AnalyticDecomposition {
    std::vector<double> wrapped_phase;
    std::vector<double> unwrapped_phase;
    std::vector<double> envelope;
    std::size_t degenerate_samples = 0;
};

/// filter -> analytic signal -> phase/envelope, no ensembles.
AnalyticDecomposition decompose(std::span<const double> x, const FilterCoefficients& coeffs);

// ---------------------------------------------------------------------------
// Dithered ensemble estimation
// ---------------------------------------------------------------------------

struct TfpConfig {
    std::size_t ensembles = 64;
    double dither = 0.01;  // relative band-edge perturbation
    std::uint64_t seed = 0;
    std::optional<double> input_dither_snr_db;  // additive white noise, off by default

    /// Throws ConfigError unless ensembles >= 1 and 0 <= dither < 0.1.
    void validate() const;
};

/// Ensemble estimate for one signal.
AnalyticDecomposition tfp_estimate(std::span<const double> x, const FilterSpec& spec,
                                   const TfpConfig& cfg);

/// Ensemble estimate for every row of `signals`. Each ensemble member uses
/// one perturbed filter for all rows; input dither (when enabled) is drawn
/// per row. Envelope: arithmetic mean. Phase: angle of the mean unit phasor,
/// then unwrapped.
std::vector<AnalyticDecomposition> tfp_estimate(const Matrix& signals, const FilterSpec& spec,
                                                const TfpConfig& cfg);

}  // namespace phasefeat
