/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The swsopt Authors. All rights reserved.
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef SWS_FOURIER_HPP
#define SWS_FOURIER_HPP

#include <complex>
#include <span>
#include <vector>

// Thin real-FFT layer over FFTW. All functions are reentrant; plans are cached
// per length behind a mutex and executed with the new-array interface.
namespace sws::fourier {

using cplx = std::complex<double>;

/// Forward real DFT, X[k] = sum_n x[n] e^{-j 2 pi k n / N}; returns N/2 + 1 bins.
std::vector<cplx> rfft(std::span<const double> x);

/// Forward real DFT of x zero-padded to length n (n >= x.size()).
std::vector<cplx> rfft_padded(std::span<const double> x, int n);

/// Inverse of rfft including the 1/n factor.
std::vector<double> irfft(std::span<const cplx> spectrum, int n);

/// Bandlimited interpolation by an integer factor via DFT zero-padding.
///
/// The spectrum is inserted into a factor*N grid (Nyquist bin split evenly for
/// even N) and scaled by factor, so out[k * factor] == x[k] up to rounding.
std::vector<double> upsample(std::span<const double> x, int factor);

/// Linear (non-circular) cross-correlation r[tau] = sum_m a[m] b[m + tau]
/// for tau in [0, len) where len = a.size() = b.size(). Samples outside the
/// signals count as zero.
std::vector<double> xcorr_forward(std::span<const double> a, std::span<const double> b);

/// Same as xcorr_forward but for tau in (-len, len); index tau + len - 1.
std::vector<double> xcorr_full(std::span<const double> a, std::span<const double> b);

/// Spectra padded for correlation, so one signal's transform can be reused
/// against several partners. Length of the padded transform is 2 * len.
struct PaddedSpectrum {
  int len = 0;
  std::vector<cplx> bins;
};
PaddedSpectrum padded_spectrum(std::span<const double> x);
std::vector<double> xcorr_forward(const PaddedSpectrum& a, const PaddedSpectrum& b);

/// Unwraps a phase sequence in place (successive jumps folded into (-pi, pi]).
void unwrap(std::span<double> phase);

}  // namespace sws::fourier

#endif  // SWS_FOURIER_HPP
