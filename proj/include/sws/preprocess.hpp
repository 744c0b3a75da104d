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

#ifndef SWS_PREPROCESS_HPP
#define SWS_PREPROCESS_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "sws/core.hpp"

namespace sws::preprocess {

/// Half-open lateral index range [lo, hi).
struct LateralRange {
  int lo = 0;
  int hi = 0;
  int width() const { return hi - lo; }
};

/// Range that skips `blind_mm` next to column 0 (ARF push on the left).
LateralRange roi_excluding_mm(int X, double fsp_px_per_mm, double blind_mm);

struct CleaningParams {
  double t_sh = 250.0;  ///< squared-residual threshold for TTP outliers, samples^2
  double q = 0.9;       ///< normalized amplitude above which samples support the line fit
  double rho = 1.0;     ///< mask spread, samples
  int r = 3;            ///< number of piecewise lines
  LateralRange roi_x;   ///< columns kept; blind zone excluded

  /// Throws ParameterError. `X` is the lateral size of the volume being cleaned.
  void check(int X) const;
};

/// One time-lateral slice D(x, n) at a fixed axial index. Indexed (x, n).
struct TlPlane {
  Grid2<double> d;
  int z_index = 0;

  int width() const { return d.nx(); }
  int frames() const { return d.nz(); }
};

/// n = slope * x + intercept, for columns x in [x_begin, x_end).
struct LineSegment {
  double slope = 0.0;      ///< samples per column
  double intercept = 0.0;  ///< samples
  int x_begin = 0;
  int x_end = 0;
};

struct PiecewiseLines {
  std::vector<LineSegment> lines;
};

/// Lateral DFT interpolation by M. Output has M*X - (M-1) columns (the
/// periodic wrap-around tail is dropped), original columns land on x*M and
/// fsp is multiplied by M.
DisplacementVolume lateral_interpolate(const DisplacementVolume& vol, int M);

/// Temporal DFT interpolation by L; sig[k] is preserved at index k*L.
std::vector<double> temporal_upsample(std::span<const double> sig, int L);

/// Copies the ROI columns without any normalization.
DisplacementVolume crop_lateral(const DisplacementVolume& vol, LateralRange roi);

/// Slices the ROI at z_index and normalizes every lateral row to unit peak
/// along time, clamping negatives so D_c is in [0, 1]. Rows whose peak is
/// below 1e-12 of the plane maximum are zeroed.
TlPlane extract_condition_plane(const DisplacementVolume& vol, int z_index, const CleaningParams& params);

/// Peak sample index per column; ties resolve to the smallest index.
std::vector<int> ttp_profile(const TlPlane& plane);

/// Least-squares line through (x, profile[x]); kept[x] = residual^2 <= t_sh.
std::vector<std::uint8_t> prune_outlier_peaks(std::span<const int> profile, double t_sh);

/// Fits r lines over contiguous column ranges to the support set
/// {(x, n) : D_c(x, n) >= q, kept[x]}, choosing breakpoints that minimize the
/// total squared residual (exact dynamic program). Every range spans at least
/// max(2, X' / (3 r)) columns and has support on at least two of them;
/// otherwise CleaningError.
PiecewiseLines piecewise_fit(const TlPlane& plane, std::span<const std::uint8_t> kept, double q, int r);

/// Phi(x, n) = sum_j exp(-(n - m_j x - lambda_j)^2 / (2 rho^2)) with line j
/// active only inside its own column range. Values are kept strictly positive
/// (floored at the smallest normal double). Indexed (x, n).
Grid2<double> build_mask(const PiecewiseLines& lines, double rho, int width, int frames);

struct CleanResult {
  DisplacementVolume volume;               ///< cleaned ROI, lateral extent = roi width
  std::vector<std::uint8_t> slice_fallback;  ///< 1 where the slice could not be cleaned
  std::vector<PiecewiseLines> lines;       ///< per axial slice (empty on fallback)
  LateralRange roi;
};

/// Cleans one conditioned plane in place; returns false when the line fit had
/// to be abandoned (plane left normalized but unmasked).
bool clean_plane(TlPlane& plane, const CleaningParams& params, PiecewiseLines* lines_out = nullptr,
                 Grid2<double>* mask_out = nullptr);

/// Per-slice: condition -> TTP -> prune -> piecewise fit (r, then r = 1) ->
/// mask (clamped to <= 1) -> overlay. Slices are independent and run in parallel.
CleanResult tl_clean(const DisplacementVolume& vol, const CleaningParams& params);

}  // namespace sws::preprocess

#endif  // SWS_PREPROCESS_HPP
