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

#ifndef SWS_REFERENCE_HPP
#define SWS_REFERENCE_HPP

#include "sws/core.hpp"
#include "sws/estimators.hpp"

// Serial, uncached evaluation kept as the baseline for the parallel kernels.
namespace sws::reference {

/// estimate_pixel at every position, one pixel at a time.
Grid2<int> estimate_shift_map_serial(const DisplacementVolume& vol_clean, const estimators::OptimizationParams& params);

}  // namespace sws::reference

#endif  // SWS_REFERENCE_HPP
