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

#include "sws/reference.hpp"

namespace sws::reference {

Grid2<int> estimate_shift_map_serial(const DisplacementVolume& vol, const estimators::OptimizationParams& params) {
  Grid2<int> shifts(vol.X, vol.Z, 0);
  for (int x = 0; x < vol.X; ++x) {
    for (int z = 0; z < vol.Z; ++z) {
      const auto est = estimators::estimate_pixel(vol, x, z, params);
      if (est.valid) shifts(x, z) = est.t_opt;
    }
  }
  return shifts;
}

}  // namespace sws::reference
