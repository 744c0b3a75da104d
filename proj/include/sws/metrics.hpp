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

#ifndef SWS_METRICS_HPP
#define SWS_METRICS_HPP

#include "sws/core.hpp"

namespace sws::metrics {

struct RegionStats {
  double mean = 0.0;
  double std = 0.0;  ///< population standard deviation
  int count = 0;
};

/// Statistics over valid pixels selected by the mask. Throws UsageError when
/// nothing is selected or the shapes differ.
RegionStats region_stats(const SwsMap& map, const RegionMask& mask);

/// 20 log10(|mu_a - mu_b| / sqrt(sd_a^2 + sd_b^2)) in dB. Equal means give
/// -inf; a zero denominator with distinct means gives +inf.
double cnr(const RegionStats& inc, const RegionStats& bg);
double cnr(const SwsMap& map, const RegionMask& inc, const RegionMask& bg);

/// 10 log10(1 / mse) with map and label each divided by their own maximum and
/// mse averaged over the valid pixels of the map. +inf when mse is 0.
double psnr(const SwsMap& map, const SpeedMap& label);

/// Median over the valid pixels of the w x w neighbourhood (clipped at the
/// border). For even counts a valid centre is clamped to the two middle values
/// and an invalid one takes the lower. Invalid pixels are filled when at least
/// 3 valid neighbours exist.
SwsMap median_filter(const SwsMap& map, int w);

}  // namespace sws::metrics

#endif  // SWS_METRICS_HPP
