#pragma once

#include <complex>
#include <vector>

namespace phasefeat::fft {

// Unnormalized in-place DFTs of any length (FFTW). Plans are cached per
// length and shared across threads.
void forward(std::vector<std::complex<double>>& data);
void inverse(std::vector<std::complex<double>>& data);

}  // namespace phasefeat::fft
