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

#include "sws/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace sws::metrics {

RegionStats region_stats(const SwsMap& map, const RegionMask& mask) {
  if (mask.mask.nx() != map.nx() || mask.mask.nz() != map.nz()) throw UsageError("mask and map differ in shape");
  double sum = 0.0;
  int count = 0;
  for (int x = 0; x < map.nx(); ++x) {
    for (int z = 0; z < map.nz(); ++z) {
      if (mask.mask(x, z) && map.is_valid(x, z)) {
        sum += map.speed(x, z);
        ++count;
      }
    }
  }
  if (count == 0) throw UsageError("region selects no valid pixel");
  const double mean = sum / count;
  double ss = 0.0;
  for (int x = 0; x < map.nx(); ++x) {
    for (int z = 0; z < map.nz(); ++z) {
      if (mask.mask(x, z) && map.is_valid(x, z)) ss += (map.speed(x, z) - mean) * (map.speed(x, z) - mean);
    }
  }
  return {mean, std::sqrt(ss / count), count};
}

double cnr(const RegionStats& inc, const RegionStats& bg) {
  const double num = std::abs(inc.mean - bg.mean);
  if (num == 0.0) return -std::numeric_limits<double>::infinity();
  const double den = std::sqrt(inc.std * inc.std + bg.std * bg.std);
  if (den == 0.0) return std::numeric_limits<double>::infinity();
  return 20.0 * std::log10(num / den);
}

double cnr(const SwsMap& map, const RegionMask& inc, const RegionMask& bg) {
  return cnr(region_stats(map, inc), region_stats(map, bg));
}

double psnr(const SwsMap& map, const SpeedMap& label) {
  if (label.c.nx() != map.nx() || label.c.nz() != map.nz()) throw UsageError("map and label differ in shape");
  double map_max = 0.0;
  for (int x = 0; x < map.nx(); ++x) {
    for (int z = 0; z < map.nz(); ++z) {
      if (map.is_valid(x, z)) map_max = std::max(map_max, map.speed(x, z));
    }
  }
  double label_max = 0.0;
  for (double v : label.c.values()) label_max = std::max(label_max, v);
  if (!(map_max > 0.0) || !(label_max > 0.0)) throw UsageError("psnr needs positive maxima");
  double ss = 0.0;
  int count = 0;
  for (int x = 0; x < map.nx(); ++x) {
    for (int z = 0; z < map.nz(); ++z) {
      if (!map.is_valid(x, z)) continue;
      const double d = map.speed(x, z) / map_max - label.c(x, z) / label_max;
      ss += d * d;
      ++count;
    }
  }
  if (count == 0) throw UsageError("psnr: map has no valid pixel");
  const double mse = ss / count;
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

SwsMap median_filter(const SwsMap& map, int w) {
  if (w < 1 || w % 2 == 0) throw ParameterError("median window must be odd and >= 1");
  const int h = w / 2;
  SwsMap out(map.nx(), map.nz());
#pragma omp parallel for schedule(static)
  for (int x = 0; x < map.nx(); ++x) {
    std::vector<double> buf;
    buf.reserve(static_cast<std::size_t>(w) * w);
    for (int z = 0; z < map.nz(); ++z) {
      buf.clear();
      for (int i = std::max(0, x - h); i <= std::min(map.nx() - 1, x + h); ++i) {
        for (int j = std::max(0, z - h); j <= std::min(map.nz() - 1, z + h); ++j) {
          if (map.is_valid(i, j)) buf.push_back(map.speed(i, j));
        }
      }
      if (buf.empty() || (!map.is_valid(x, z) && buf.size() < 3)) continue;
      std::sort(buf.begin(), buf.end());
      const double lo = buf[(buf.size() - 1) / 2];
      const double hi = buf[buf.size() / 2];
      // Any value in [lo, hi] is a median; keep the centre when it qualifies so
      // that ties at clipped borders do not erode a region, else take lo.
      out.set(x, z, map.is_valid(x, z) ? std::clamp(map.speed(x, z), lo, hi) : lo);
    }
  }
  return out;
}

}  // namespace sws::metrics
