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

#ifndef SWS_PHANTOM_HPP
#define SWS_PHANTOM_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sws/core.hpp"

// Synthetic displacement volumes with a known speed field.
//
// A Gaussian pulse leaves the source column at t = 0 and travels laterally
// along each axial row; the arrival time at a column is the sum of per-pixel
// travel times from the source. Amplitude decays by alpha_per_mm per mm.
namespace sws::phantom {

inline constexpr double kMinSpeed = 0.25;
inline constexpr double kMaxSpeed = 10.0;

struct PulseParams {
  double width_ms = 0.5;  ///< temporal standard deviation
  double amp0 = 1.0;
  double alpha_per_mm = 1.0;  ///< amplitude retained per mm travelled, in (0, 1]
  int source_x_px = 0;
};

struct NoiseParams {
  double jitter_std = 0.0;   ///< additive white noise, amplitude units
  double reflect_gain = 0.0; ///< in [0, 1)
  std::optional<int> reflect_x_px;
  std::uint64_t seed = 1;
};

/// Young's modulus (kPa) to shear wave speed (m/s), c = sqrt(E / 3000).
double speed_from_kpa(double kpa);

/// Throws ParameterError if any speed is outside [kMinSpeed, kMaxSpeed].
void validate(const SpeedMap& speed);

/// Arrival time in ms at every (x, z). Each lateral step away from the source
/// costs (1 / fsp) / c(x', z), where x' is the column being stepped into.
Grid2<double> arrival_time_field(const SpeedMap& speed, int source_x_px);

/// Renders the traveling-pulse model (plus optional jitter and one reflected
/// copy). axial_res_mm_per_px defaults to 1 / fsp (square pixels).
DisplacementVolume synth_volume(const SpeedMap& speed, const PulseParams& pulse, const NoiseParams& noise,
                                double fs_hz, int n_frames, double axial_res_mm_per_px = 0.0);

struct Inclusion {
  double center_x_px = 0.0;
  double center_z_px = 0.0;
  double radius_mm = 0.0;
};

/// Circular inclusion at speed_from_kpa(inc_kpa) in a speed_from_kpa(bg_kpa) background.
SpeedMap make_inclusion_speed_map(int X, int Z, double fsp_px_per_mm, double bg_kpa, double inc_kpa,
                                  const Inclusion& inc, double axial_res_mm_per_px = 0.0);

SpeedMap make_uniform_speed_map(int X, int Z, double fsp_px_per_mm, double kpa);

/// Distance (mm) of pixel (x, z) from the inclusion centre.
double distance_mm(const Inclusion& inc, int x, int z, double fsp_px_per_mm, double axial_res_mm_per_px);

/// Inclusion / background masks with a guard band of `margin_mm` on each side
/// of the boundary excluded from both.
std::pair<RegionMask, RegionMask> inclusion_masks(int X, int Z, double fsp_px_per_mm, double axial_res_mm_per_px,
                                                  const Inclusion& inc, double margin_mm);

/// A named desk-scale scenario.
struct Preset {
  std::string name;
  SpeedMap speed;
  PulseParams pulse;
  NoiseParams noise;
  double fs_hz = 10000.0;
  int n_frames = 128;
  double axial_res_mm_per_px = 0.17;
  std::optional<Inclusion> inclusion;
  double blind_zone_mm = 3.0;  ///< lateral extent next to the source excluded from the ROI
};

/// homog15, homog30, inc45-d<D>, inc80-d<D> for D in {10.4, 6.49, 4.05, 2.53}.
/// Noise-free unless configured afterwards.
Preset make_preset(const std::string& name);
std::vector<std::string> preset_names();

DisplacementVolume render(const Preset& p);

}  // namespace sws::phantom

#endif  // SWS_PHANTOM_HPP
