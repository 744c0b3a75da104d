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

#ifndef SWS_BASELINES_HPP
#define SWS_BASELINES_HPP

#include <span>
#include <vector>

#include "sws/core.hpp"

// Reference estimators. All of them read the volume on whatever lateral grid
// they are given; fsp in the volume metadata sets the physical scale.
namespace sws::baselines {

struct BaselineParams {
  int fit_halfwidth_px = 8;  ///< TTP window is [x - h, x + h]
  int ttp_refine = 1000;     ///< TTP peak times are resolved to 1/ttp_refine sample
  double theta_lo = 0.5;     ///< FDSM speed grid, m/s
  double theta_hi = 10.0;
  double theta_step = 0.01;
  double f_sig_hz = 1000.0;  ///< FDSM temporal band limit
  double strip_mm = 8.0;     ///< FDSM lateral strip width
  int dx_px = 6;             ///< cross-correlation half baseline
  int L = 10;                ///< cross-correlation temporal upsampling

  void check() const;
};

/// Speed (m/s) from integer peak times (in samples at rate fs_hz) of
/// consecutive columns 1/fsp mm apart. Returns NaN for a negative or near-zero
/// slope.
double ttp_regression_speed(std::span<const int> peaks, double fs_hz, double fsp_px_per_mm);

/// Same, from the mean of consecutive peak differences with the lowest and
/// highest 20% trimmed.
double ttp_average_speed(std::span<const int> peaks, double fs_hz, double fsp_px_per_mm);

/// Peak times come from the bandlimited interpolant of each trace, searched on
/// a 1/ttp_refine-sample grid; the regression itself runs in integer arithmetic.
SwsMap estimate_ttp(const DisplacementVolume& vol, const BaselineParams& bp);
SwsMap estimate_ttp_avg(const DisplacementVolume& vol, const BaselineParams& bp);

/// Unnormalized correlation of u(x - dx) and u(x + dx) after L-fold upsampling;
/// the lag of the maximum is the travel time over 2 dx.
SwsMap estimate_xcorr(const DisplacementVolume& vol, const BaselineParams& bp);

struct FdsmResult {
  SwsMap map;
  Grid2<std::uint8_t> flat;            ///< objective had no peak (max/mean < 1.05)
  Grid2<std::uint8_t> low_confidence;  ///< argmax sat on a grid endpoint
  int strips = 0;
  int flat_strips = 0;
};

/// Phasor-alignment objective for one strip of columns [x0, x1) at row z over
/// the theta grid: sum_m |sum_x exp(j 2 pi f_m x / theta) U(x, f_m)|, with
/// U(x, f_m) the temporal DFT of column x and f_m the bins in (0, f_sig].
std::vector<double> fdsm_objective(const DisplacementVolume& vol, int z, int x0, int x1, const BaselineParams& bp);

/// Column ranges of the FDSM strips for a row of width X.
std::vector<std::pair<int, int>> fdsm_strips(int X, double fsp_px_per_mm, double strip_mm);

FdsmResult estimate_fdsm_detailed(const DisplacementVolume& vol, const BaselineParams& bp);
SwsMap estimate_fdsm(const DisplacementVolume& vol, const BaselineParams& bp);

}  // namespace sws::baselines

#endif  // SWS_BASELINES_HPP
