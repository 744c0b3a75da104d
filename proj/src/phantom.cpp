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

#include "sws/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace sws::phantom {

double speed_from_kpa(double kpa) { return std::sqrt(kpa * 1000.0 / 3000.0); }

void validate(const SpeedMap& speed) {
  if (!(speed.fsp_px_per_mm > 0.0)) throw ParameterError("speed map needs a positive fsp");
  for (double c : speed.c.values()) {
    if (!(c >= kMinSpeed && c <= kMaxSpeed)) {
      std::ostringstream os;
      os << "speed " << c << " m/s outside [" << kMinSpeed << ", " << kMaxSpeed << "]";
      throw ParameterError(os.str());
    }
  }
}

Grid2<double> arrival_time_field(const SpeedMap& speed, int source_x_px) {
  validate(speed);
  const int nx = speed.c.nx();
  const int nz = speed.c.nz();
  if (source_x_px < 0 || source_x_px >= nx) throw ParameterError("source column outside the grid");
  const double step_mm = 1.0 / speed.fsp_px_per_mm;
  Grid2<double> t(nx, nz, 0.0);
  for (int z = 0; z < nz; ++z) {
    // mm / (m/s) = ms
    for (int x = source_x_px + 1; x < nx; ++x) t(x, z) = t(x - 1, z) + step_mm / speed.c(x, z);
    for (int x = source_x_px - 1; x >= 0; --x) t(x, z) = t(x + 1, z) + step_mm / speed.c(x, z);
  }
  return t;
}

DisplacementVolume synth_volume(const SpeedMap& speed, const PulseParams& pulse, const NoiseParams& noise,
                                double fs_hz, int n_frames, double axial_res_mm_per_px) {
  if (!(fs_hz > 0.0)) throw ParameterError("fs_hz must be positive");
  if (!(pulse.width_ms > 0.0) || pulse.width_ms * fs_hz / 1000.0 < 2.0) {
    throw ParameterError("pulse width must span at least 2 samples");
  }
  if (!(pulse.amp0 > 0.0)) throw ParameterError("pulse amplitude must be positive");
  if (!(pulse.alpha_per_mm > 0.0 && pulse.alpha_per_mm <= 1.0)) throw ParameterError("alpha_per_mm must be in (0, 1]");
  if (!(noise.jitter_std >= 0.0)) throw ParameterError("jitter_std must be >= 0");
  if (!(noise.reflect_gain >= 0.0 && noise.reflect_gain < 1.0)) throw ParameterError("reflect_gain must be in [0, 1)");

  const int nx = speed.c.nx();
  const int nz = speed.c.nz();
  const auto t = arrival_time_field(speed, pulse.source_x_px);
  double t_max = 0.0;
  for (double v : t.values()) t_max = std::max(t_max, v);
  const double horizon_ms = n_frames * 1000.0 / fs_hz;
  if (!(horizon_ms > t_max + 4.0 * pulse.width_ms)) {
    std::ostringstream os;
    os << "horizon " << horizon_ms << " ms too short for max arrival " << t_max << " ms + 4 pulse widths";
    throw ParameterError(os.str());
  }
  const int src = pulse.source_x_px;
  const bool reflect = noise.reflect_x_px.has_value() && noise.reflect_gain > 0.0;
  int refl = 0;
  if (reflect) {
    refl = *noise.reflect_x_px;
    if (refl < 0 || refl >= nx) throw ParameterError("reflector column outside the grid");
  }

  const double axial = axial_res_mm_per_px > 0.0 ? axial_res_mm_per_px : 1.0 / speed.fsp_px_per_mm;
  DisplacementVolume vol(nx, nz, n_frames, fs_hz, speed.fsp_px_per_mm, axial);
  const double inv_two_w2 = 1.0 / (2.0 * pulse.width_ms * pulse.width_ms);
  const double ms_per_sample = 1000.0 / fs_hz;

#pragma omp parallel for schedule(static)
  for (int x = 0; x < nx; ++x) {
    const double d_mm = std::abs(x - src) / speed.fsp_px_per_mm;
    const double amp = pulse.amp0 * std::pow(pulse.alpha_per_mm, d_mm);
    // Reflected copy only between the source and the reflector.
    const bool has_echo = reflect && ((refl >= src && x >= src && x <= refl) || (refl < src && x <= src && x >= refl));
    for (int z = 0; z < nz; ++z) {
      auto trace = vol.trace(x, z);
      const double t0 = t(x, z);
      double echo_amp = 0.0;
      double echo_t = 0.0;
      if (has_echo) {
        const double d_refl = std::abs(refl - src) / speed.fsp_px_per_mm;
        const double d_back = std::abs(refl - x) / speed.fsp_px_per_mm;
        echo_amp = noise.reflect_gain * pulse.amp0 * std::pow(pulse.alpha_per_mm, d_refl + d_back);
        echo_t = 2.0 * t(refl, z) - t0;
      }
      for (int n = 0; n < n_frames; ++n) {
        const double tn = n * ms_per_sample;
        double v = amp * std::exp(-(tn - t0) * (tn - t0) * inv_two_w2);
        if (echo_amp > 0.0) v += echo_amp * std::exp(-(tn - echo_t) * (tn - echo_t) * inv_two_w2);
        trace[n] = v;
      }
      if (noise.jitter_std > 0.0) {
        // One stream per (x, z): output does not depend on the schedule.
        std::seed_seq seq{static_cast<std::uint32_t>(noise.seed & 0xFFFFFFFFU),
                          static_cast<std::uint32_t>(noise.seed >> 32), static_cast<std::uint32_t>(x),
                          static_cast<std::uint32_t>(z)};
        std::mt19937_64 rng(seq);
        std::normal_distribution<double> gauss(0.0, noise.jitter_std);
        for (int n = 0; n < n_frames; ++n) trace[n] += gauss(rng);
      }
    }
  }
  return vol;
}

double distance_mm(const Inclusion& inc, int x, int z, double fsp_px_per_mm, double axial_res_mm_per_px) {
  const double dx = (x - inc.center_x_px) / fsp_px_per_mm;
  const double dz = (z - inc.center_z_px) * axial_res_mm_per_px;
  return std::hypot(dx, dz);
}

SpeedMap make_uniform_speed_map(int X, int Z, double fsp_px_per_mm, double kpa) {
  SpeedMap m{Grid2<double>(X, Z, speed_from_kpa(kpa)), fsp_px_per_mm};
  validate(m);
  return m;
}

SpeedMap make_inclusion_speed_map(int X, int Z, double fsp_px_per_mm, double bg_kpa, double inc_kpa,
                                  const Inclusion& inc, double axial_res_mm_per_px) {
  const double axial = axial_res_mm_per_px > 0.0 ? axial_res_mm_per_px : 1.0 / fsp_px_per_mm;
  const double rx = inc.radius_mm * fsp_px_per_mm;
  const double rz = inc.radius_mm / axial;
  if (inc.center_x_px - rx < 0.0 || inc.center_x_px + rx > X - 1 || inc.center_z_px - rz < 0.0 ||
      inc.center_z_px + rz > Z - 1) {
    throw ParameterError("inclusion does not fit inside the grid");
  }
  SpeedMap m{Grid2<double>(X, Z, speed_from_kpa(bg_kpa)), fsp_px_per_mm};
  const double c_inc = speed_from_kpa(inc_kpa);
  for (int x = 0; x < X; ++x) {
    for (int z = 0; z < Z; ++z) {
      if (distance_mm(inc, x, z, fsp_px_per_mm, axial) <= inc.radius_mm) m.c(x, z) = c_inc;
    }
  }
  validate(m);
  return m;
}

std::pair<RegionMask, RegionMask> inclusion_masks(int X, int Z, double fsp_px_per_mm, double axial_res_mm_per_px,
                                                  const Inclusion& inc, double margin_mm) {
  RegionMask in{Grid2<std::uint8_t>(X, Z, 0), RegionLabel::inclusion};
  RegionMask bg{Grid2<std::uint8_t>(X, Z, 0), RegionLabel::background};
  for (int x = 0; x < X; ++x) {
    for (int z = 0; z < Z; ++z) {
      const double d = distance_mm(inc, x, z, fsp_px_per_mm, axial_res_mm_per_px);
      if (d <= inc.radius_mm - margin_mm) in.mask(x, z) = 1;
      if (d > inc.radius_mm + margin_mm) bg.mask(x, z) = 1;
    }
  }
  return {in, bg};
}

namespace {

constexpr double kFsp = 1.0 / 0.17;  // px/mm, 0.17 mm pixels
constexpr double kAxial = 0.17;
constexpr double kDiameters[] = {10.40, 6.49, 4.05, 2.53};

std::string diameter_tag(double d) {
  std::ostringstream os;
  os << d;
  return os.str();
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> names{"homog15", "homog30"};
  for (int inc : {45, 80}) {
    for (double d : kDiameters) names.push_back("inc" + std::to_string(inc) + "-d" + diameter_tag(d));
  }
  return names;
}

Preset make_preset(const std::string& name) {
  Preset p;
  p.name = name;
  p.fs_hz = 10000.0;
  p.n_frames = 128;
  p.axial_res_mm_per_px = kAxial;
  p.pulse = PulseParams{0.5, 1.0, 0.98, 0};
  if (name == "homog15" || name == "homog30") {
    p.speed = make_uniform_speed_map(96, 64, kFsp, name == "homog15" ? 15.0 : 30.0);
    return p;
  }
  for (int inc_kpa : {45, 80}) {
    for (double d : kDiameters) {
      if (name != "inc" + std::to_string(inc_kpa) + "-d" + diameter_tag(d)) continue;
      Inclusion inc{64.0, 40.0, d / 2.0};
      p.speed = make_inclusion_speed_map(128, 80, kFsp, 25.0, inc_kpa, inc, kAxial);
      p.inclusion = inc;
      return p;
    }
  }
  throw ParameterError("unknown preset '" + name + "'");
}

DisplacementVolume render(const Preset& p) {
  return synth_volume(p.speed, p.pulse, p.noise, p.fs_hz, p.n_frames, p.axial_res_mm_per_px);
}

}  // namespace sws::phantom
