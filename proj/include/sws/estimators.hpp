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

#ifndef SWS_ESTIMATORS_HPP
#define SWS_ESTIMATORS_HPP

#include <complex>
#include <span>
#include <utility>
#include <vector>

#include "sws/core.hpp"

// Shift estimation for signal groups under a Gaussian neighbourhood coupling.
//
// A signal group at (x, z) is u1 = u(x - dx), u0 = u(x), u2 = u(x + dx). The
// wave travels towards +x, so u0 lags u1 and u2 lags u0 by the same shift T
// (in samples at the upsampled rate L * fs). For every pixel the estimator
// minimizes the kernel-weighted loss
//
//   F(T) = sum_{k,i} mu(k, i) * J(x + k, z + i, T)
//
// over an integer range bounded by the pairwise delays of all groups in the
// l x a neighbourhood, where J is the time-domain NCC loss, the phase
// alignment loss, or gamma1 * J_td + gamma2 * J_pd.
namespace sws::estimators {

inline constexpr double kNccEps = 1e-12;

enum class LossMode { td, pd, combined };

struct OptimizationParams {
  int dx_px = 6;       ///< lateral group separation, columns of the (interpolated) volume
  int l = 5;           ///< kernel extent along x, odd
  int a = 5;           ///< kernel extent along z, odd
  double sigma_w = 1.0;
  int L = 10;          ///< temporal interpolation order
  double f_sig_hz = 1000.0;
  double gamma1 = 1.0;
  double gamma2 = 0.2;
  LossMode mode = LossMode::td;

  void check(double fs_hz) const;
  bool uses_td() const { return mode != LossMode::pd; }
  bool uses_pd() const { return mode != LossMode::td; }
};

struct SignalGroup {
  std::vector<double> u0;  ///< centre
  std::vector<double> u1;  ///< at -dx
  std::vector<double> u2;  ///< at +dx
};

/// Normalized coupling factors. Indexed (k + (l-1)/2, i + (a-1)/2), k lateral, i axial.
struct KernelWeights {
  Grid2<double> mu;
  Grid2<std::uint8_t> valid;

  int l() const { return mu.nx(); }
  int a() const { return mu.nz(); }
  double center() const { return mu(l() / 2, a() / 2); }
};

struct ShiftEstimate {
  bool valid = false;
  int t_opt = 0;
  int t_min = 0;
  int t_max = 0;
  std::vector<double> objective_curve;  ///< F(T) for T in [t_min, t_max]
};

/// sum(ab) / (sqrt(sum(a^2) sum(b^2)) + eps)
double ncc(std::span<const double> a, std::span<const double> b);

/// NCC{earlier(n - tau), later(n)} with the shifted signal zero-filled; direct O(len) sum.
double ncc_shifted(std::span<const double> earlier, std::span<const double> later, int tau);

/// NCC{earlier(n - tau), later(n)} for every tau in [0, len), via FFT.
std::vector<double> ncc_curve(std::span<const double> earlier, std::span<const double> later);

/// (T10, T02): argmax over tau in [0, N*L) of the NCC between the L-upsampled
/// earlier and later members. Ties resolve to the smallest tau.
std::pair<int, int> pairwise_delays_td(const SignalGroup& group, int L);

/// 2 - NCC{u1^L(n - T), u0^L(n)} - NCC{u0^L(n - T), u2^L(n)}
double loss_td(const SignalGroup& group, int T, int L);

/// Number of DFT bins k = 1..K used by the phase losses, K = floor(N f_sig / fs).
int significant_bins(int N, double f_sig_hz, double fs_hz);

/// Delay of ub relative to ua, in (fractional) samples at fs: slope of the
/// least-squares line through the unwrapped phase difference angle(Ua) -
/// angle(Ub) over bins 1..K, against omega_k = 2 pi k / N. The intercept is
/// discarded. Throws ParameterError when K < 2.
double phase_shift_regress(std::span<const double> ua, std::span<const double> ub, double f_sig_hz, double fs_hz);

/// Same regression from precomputed N-point spectra (bins 0..K at least).
double phase_slope(std::span<const std::complex<double>> Ua, std::span<const std::complex<double>> Ub, int K, int N);

/// Per-group quantities of the phase loss: the two regressed slopes and the
/// normalized group-average magnitude |U|_k for k = 1..K.
struct PhaseTerms {
  double m01 = 0.0;  ///< delay of u0 after u1
  double m20 = 0.0;  ///< delay of u2 after u0
  int N = 0;
  std::vector<double> weight;  ///< |U|_k, size K
};

/// (1/P) sum_k [(m01 w_k - (T/L) w_k) |U|_k]^2 + the same for m20, P = K.
double phase_loss(const PhaseTerms& terms, int T, int L);

PhaseTerms phase_terms(const SignalGroup& group, double f_sig_hz, double fs_hz);

double loss_pd(const SignalGroup& group, int T, int L, double f_sig_hz, double fs_hz);

KernelWeights gaussian_kernel(int l, int a, double sigma_w);

/// Zeroes weights where inside == 0 and rescales the rest to sum to 1.
/// Throws UsageError when the centre cell is outside.
KernelWeights edge_renormalize(const KernelWeights& w, const Grid2<std::uint8_t>& inside);

/// [max(1, min delay), max delay] clipped to t_cap; a single-point range is
/// widened to +-L.
std::pair<int, int> search_range(std::span<const std::pair<int, int>> pairwise, int L, int t_cap);

/// Direct (uncached, serial) evaluation of one pixel of a cleaned volume.
/// Cells whose group would leave the volume or is all-zero are dropped from the
/// kernel; an invalid centre gives valid = false.
ShiftEstimate estimate_pixel(const DisplacementVolume& vol_clean, int x, int z, const OptimizationParams& params);

/// C = dx / T * (L fs) / fsp * 1e-3, in m/s.
double sws_from_shift(int T, int dx_px, int L, double fs_hz, double fsp_px_per_mm);

/// Optimum shift for every pixel (0 where invalid). OpenMP-parallel over
/// columns; per-pair NCC curves and spectra are computed once and shared
/// between overlapping kernels through a rolling window of axial rows.
Grid2<int> estimate_shift_map(const DisplacementVolume& vol_clean, const OptimizationParams& params);

/// estimate_shift_map followed by sws_from_shift.
SwsMap estimate_map(const DisplacementVolume& vol_clean, const OptimizationParams& params);

SwsMap shifts_to_sws(const Grid2<int>& shifts, const DisplacementVolume& vol, const OptimizationParams& params);

}  // namespace sws::estimators

#endif  // SWS_ESTIMATORS_HPP
