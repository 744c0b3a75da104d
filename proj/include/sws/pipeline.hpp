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

#ifndef SWS_PIPELINE_HPP
#define SWS_PIPELINE_HPP

#include <string>
#include <vector>

#include "sws/baselines.hpp"
#include "sws/core.hpp"
#include "sws/estimators.hpp"
#include "sws/preprocess.hpp"

// End-to-end reconstruction: lateral interpolation, ROI crop, optional TL
// cleaning, one estimator, then decimation back to the input grid and an
// optional median filter.
namespace sws::pipeline {

enum class Method { ttp, ttp_avg, xcorr, fdsm, td, pd, combined };

/// Throws UsageError for an unknown name.
Method parse_method(const std::string& name);
std::string method_name(Method m);
/// td, pd and combined.
bool is_constrained(Method m);

enum class CleanMode { automatic, always, never };

struct ReconstructParams {
  int M = 2;  ///< lateral interpolation factor
  /// roi_x is in columns of the input grid; an empty range selects everything
  /// except the first blind_mm next to the push.
  preprocess::CleaningParams cleaning;
  double blind_mm = 3.0;
  estimators::OptimizationParams opt;
  baselines::BaselineParams base;
  int median_w = 5;  ///< 1 disables the post-filter
  /// automatic cleans for the constrained estimators only.
  CleanMode clean = CleanMode::automatic;
  bool clean_before_interp = false;
};

struct Reconstruction {
  SwsMap map;                            ///< on the input grid; columns outside the ROI are invalid
  preprocess::LateralRange roi;          ///< input columns
  std::vector<std::uint8_t> slice_fallback;  ///< empty when cleaning was skipped
  bool cleaned = false;
};

/// ROI in input columns after resolving the default.
preprocess::LateralRange resolve_roi(const DisplacementVolume& vol, const ReconstructParams& p);

/// The volume an estimator sees: interpolated, cropped to the ROI and, if
/// requested, cleaned. Column j corresponds to input column roi.lo + j / M.
struct PreparedVolume {
  DisplacementVolume volume;
  preprocess::LateralRange roi;
  std::vector<std::uint8_t> slice_fallback;
  bool cleaned = false;
};
PreparedVolume prepare(const DisplacementVolume& vol, const ReconstructParams& p, bool clean);

/// Runs one method on a prepared volume (no decimation, no filter).
SwsMap estimate(const DisplacementVolume& prepared, Method m, const ReconstructParams& p);

/// Copies interpolated ROI columns (j = (x - roi.lo) * M) into an X x Z map.
SwsMap decimate(const SwsMap& fine, preprocess::LateralRange roi, int M, int X);

Reconstruction run_method(const DisplacementVolume& vol, Method m, const ReconstructParams& p);

/// Constrained reconstruction with the estimator selected by op.mode.
SwsMap reconstruct(const DisplacementVolume& vol, const preprocess::CleaningParams& cp,
                   const estimators::OptimizationParams& op, int M, int median_w = 5);

/// Sets the OpenMP thread count for its lifetime. n <= 0 leaves it unchanged.
class ScopedThreads {
 public:
  explicit ScopedThreads(int n);
  ~ScopedThreads();
  ScopedThreads(const ScopedThreads&) = delete;
  ScopedThreads& operator=(const ScopedThreads&) = delete;

 private:
  int previous_ = 0;
  bool active_ = false;
};

}  // namespace sws::pipeline

#endif  // SWS_PIPELINE_HPP
