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

#include "sws/core.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace sws {

void validate(const DisplacementVolume& vol) {
  if (vol.X < 3 || vol.Z < 1 || vol.N < 8) {
    std::ostringstream os;
    os << "volume shape " << vol.X << "x" << vol.Z << "x" << vol.N << " is below the minimum 3x1x8";
    throw ParameterError(os.str());
  }
  validate_storage(vol);
}

void validate_storage(const DisplacementVolume& vol) {
  if (vol.X < 1 || vol.Z < 1 || vol.N < 1) throw ParameterError("volume dimensions must be positive");
  if (!(vol.fs_hz > 0.0) || !(vol.fsp_px_per_mm > 0.0) || !(vol.axial_res_mm_per_px > 0.0)) {
    throw ParameterError("volume sampling metadata must be positive");
  }
  const std::size_t expected =
      static_cast<std::size_t>(vol.X) * static_cast<std::size_t>(vol.Z) * static_cast<std::size_t>(vol.N);
  if (vol.data.size() != expected) throw ParameterError("volume payload size does not match its shape");
  for (std::size_t i = 0; i < vol.data.size(); ++i) {
    if (!std::isfinite(vol.data[i])) {
      const std::size_t n = i % static_cast<std::size_t>(vol.N);
      const std::size_t z = (i / static_cast<std::size_t>(vol.N)) % static_cast<std::size_t>(vol.Z);
      const std::size_t x = i / (static_cast<std::size_t>(vol.N) * static_cast<std::size_t>(vol.Z));
      std::ostringstream os;
      os << "non-finite sample at (x=" << x << ", z=" << z << ", n=" << n << ")";
      throw DataError(os.str());
    }
  }
}

std::size_t SwsMap::valid_count() const {
  std::size_t count = 0;
  for (auto v : valid.values()) count += v != 0 ? 1U : 0U;
  return count;
}

double SwsMap::valid_mean() const {
  double sum = 0.0;
  std::size_t count = 0;
  const auto s = speed.values();
  const auto v = valid.values();
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (v[i] != 0) {
      sum += s[i];
      ++count;
    }
  }
  return count == 0 ? std::numeric_limits<double>::quiet_NaN() : sum / static_cast<double>(count);
}

void check_disjoint(const RegionMask& a, const RegionMask& b) {
  if (a.mask.nx() != b.mask.nx() || a.mask.nz() != b.mask.nz()) throw UsageError("region masks differ in shape");
  const auto va = a.mask.values();
  const auto vb = b.mask.values();
  for (std::size_t i = 0; i < va.size(); ++i) {
    if (va[i] != 0 && vb[i] != 0) throw UsageError("inclusion and background masks overlap");
  }
}

}  // namespace sws
