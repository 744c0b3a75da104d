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

#include "sws/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>

#include "sws/fourier.hpp"

namespace sws::baselines {

void BaselineParams::check() const {
  if (fit_halfwidth_px < 1) throw ParameterError("fit_halfwidth_px must be >= 1");
  if (!(theta_lo > 0.0)) throw ParameterError("theta grid lower bound must be > 0");
  if (!(theta_step > 0.0)) throw ParameterError("theta grid step must be > 0");
  if (!(theta_hi >= theta_lo)) throw ParameterError("theta grid upper bound below lower bound");
  if (!(f_sig_hz > 0.0)) throw ParameterError("f_sig must be > 0");
  if (!(strip_mm > 0.0)) throw ParameterError("strip width must be > 0");
  if (dx_px < 1) throw ParameterError("dx_px must be >= 1");
  if (ttp_refine < 1) throw ParameterError("ttp_refine must be >= 1");
  if (L < 1) throw ParameterError("L must be >= 1");
}

namespace {

constexpr double kMinSlope = 1e-6;  // ms/mm

double speed_from_slope(double samples_per_px, double fs_hz, double fsp_px_per_mm) {
  const double ms_per_mm = samples_per_px * (1000.0 / fs_hz) * fsp_px_per_mm;
  if (!(ms_per_mm >= kMinSlope)) return std::numeric_limits<double>::quiet_NaN();
  return 1.0 / ms_per_mm;
}

// -1 for an all-zero trace.
int peak_index(std::span<const double> s) {
  int best = 0;
  bool any = s[0] != 0.0;
  for (int n = 1; n < static_cast<int>(s.size()); ++n) {
    any = any || s[n] != 0.0;
    if (s[n] > s[best]) best = n;
  }
  return any ? best : -1;
}

// Bandlimited interpolant of a trace from its real DFT, at fractional sample t.
double interpolant(std::span<const std::complex<double>> X, int N, double t) {
  const int half = (N - 1) / 2;
  const auto w = std::polar(1.0, 2.0 * std::numbers::pi * t / N);
  std::complex<double> r = w;
  double v = X[0].real();
  for (int k = 1; k <= half; ++k) {
    v += 2.0 * (X[k] * r).real();
    r *= w;
  }
  if (N % 2 == 0) v += X[N / 2].real() * std::cos(std::numbers::pi * t);
  return v / N;
}

// Peak time in units of 1/R samples: integer argmax, then argmax of the
// interpolant on a 1/10-sample grid over +-1 sample and on the 1/R grid
// around that. -1 (never a valid refined index here) flags an all-zero trace.
long fine_peak(std::span<const double> s, int R) {
  const int p0 = peak_index(s);
  if (p0 < 0) return -1;
  if (R == 1) return p0;
  const int N = static_cast<int>(s.size());
  const auto X = fourier::rfft(s);
  const long base = static_cast<long>(p0) * R;
  const int coarse = std::max(1, R / 10);
  long best = base;
  double best_v = -std::numeric_limits<double>::infinity();
  for (long j = base - R; j <= base + R; j += coarse) {
    const double v = interpolant(X, N, static_cast<double>(j) / R);
    if (v > best_v) {
      best_v = v;
      best = j;
    }
  }
  const long centre = best;
  for (long j = centre - coarse; j <= centre + coarse; ++j) {
    const double v = interpolant(X, N, static_cast<double>(j) / R);
    if (v > best_v || (v == best_v && j < best)) {
      best_v = v;
      best = j;
    }
  }
  return best;
}

template <typename SpeedFn>
SwsMap windowed_ttp(const DisplacementVolume& vol, const BaselineParams& bp, SpeedFn fn) {
  bp.check();
  const int R = bp.ttp_refine;
  Grid2<int> peaks(vol.X, vol.Z, 0);
  Grid2<std::uint8_t> alive(vol.X, vol.Z, 0);
#pragma omp parallel for schedule(static)
  for (int x = 0; x < vol.X; ++x) {
    for (int z = 0; z < vol.Z; ++z) {
      if (peak_index(vol.trace(x, z)) < 0) continue;
      peaks(x, z) = static_cast<int>(fine_peak(vol.trace(x, z), R));
      alive(x, z) = 1;
    }
  }
  const int h = bp.fit_halfwidth_px;
  SwsMap map(vol.X, vol.Z);
  std::vector<int> win(static_cast<std::size_t>(2 * h + 1));
  for (int z = 0; z < vol.Z; ++z) {
    for (int x = h; x + h < vol.X; ++x) {
      bool ok = true;
      for (int k = -h; k <= h; ++k) {
        win[k + h] = peaks(x + k, z);
        ok = ok && alive(x + k, z);
      }
      if (!ok) continue;
      const double c = fn(win, vol.fs_hz * R, vol.fsp_px_per_mm);
      if (std::isfinite(c)) map.set(x, z, c);
    }
  }
  return map;
}

}  // namespace

double ttp_regression_speed(std::span<const int> peaks, double fs_hz, double fsp_px_per_mm) {
  const int len = static_cast<int>(peaks.size());
  if (len < 2) throw ParameterError("TTP regression needs at least 2 points");
  // Centred abscissae doubled to stay integral: w_i = 2 i - (len - 1).
  std::int64_t num = 0;
  std::int64_t den = 0;
  for (int i = 0; i < len; ++i) {
    const std::int64_t w = 2 * i - (len - 1);
    num += w * peaks[i];
    den += w * w;
  }
  return speed_from_slope(2.0 * static_cast<double>(num) / static_cast<double>(den), fs_hz, fsp_px_per_mm);
}

double ttp_average_speed(std::span<const int> peaks, double fs_hz, double fsp_px_per_mm) {
  const int len = static_cast<int>(peaks.size());
  if (len < 2) throw ParameterError("TTP averaging needs at least 2 points");
  std::vector<int> d(static_cast<std::size_t>(len - 1));
  for (int i = 0; i + 1 < len; ++i) d[i] = peaks[i + 1] - peaks[i];
  std::sort(d.begin(), d.end());
  const int trim = static_cast<int>(std::floor(0.2 * static_cast<double>(d.size())));
  const auto first = d.begin() + trim;
  const auto last = d.end() - trim;
  const std::int64_t sum = std::accumulate(first, last, std::int64_t{0});
  return speed_from_slope(static_cast<double>(sum) / static_cast<double>(last - first), fs_hz, fsp_px_per_mm);
}

SwsMap estimate_ttp(const DisplacementVolume& vol, const BaselineParams& bp) {
  return windowed_ttp(vol, bp, ttp_regression_speed);
}

SwsMap estimate_ttp_avg(const DisplacementVolume& vol, const BaselineParams& bp) {
  return windowed_ttp(vol, bp, ttp_average_speed);
}

SwsMap estimate_xcorr(const DisplacementVolume& vol, const BaselineParams& bp) {
  bp.check();
  const int dx = bp.dx_px;
  const int len = vol.N * bp.L;
  SwsMap map(vol.X, vol.Z);
  for (int z = 0; z < vol.Z; ++z) {
    std::vector<std::vector<double>> up(static_cast<std::size_t>(vol.X));
#pragma omp parallel for schedule(static)
    for (int x = 0; x < vol.X; ++x) {
      if (peak_index(vol.trace(x, z)) >= 0) up[x] = fourier::upsample(vol.trace(x, z), bp.L);
    }
#pragma omp parallel for schedule(static)
    for (int x = dx; x < vol.X - dx; ++x) {
      if (up[x - dx].empty() || up[x + dx].empty()) continue;
      const auto r = fourier::xcorr_full(up[x - dx], up[x + dx]);
      const int best = static_cast<int>(std::max_element(r.begin(), r.end()) - r.begin());
      const int tau = best - (len - 1);
      if (tau <= 0) continue;
      map.set(x, z, 2.0 * dx / tau * (bp.L * vol.fs_hz) / vol.fsp_px_per_mm * 1e-3);
    }
  }
  return map;
}

std::vector<std::pair<int, int>> fdsm_strips(int X, double fsp_px_per_mm, double strip_mm) {
  const int S = std::max(2, static_cast<int>(std::lround(strip_mm * fsp_px_per_mm)));
  const int n = X / S;
  std::vector<std::pair<int, int>> strips;
  if (n == 0) {
    strips.emplace_back(0, X);
    return strips;
  }
  for (int i = 0; i < n; ++i) strips.emplace_back(i * S, (i + 1) * S);
  const int rem = X - n * S;
  if (2 * rem >= S) {
    strips.emplace_back(n * S, X);
  } else {
    strips.back().second = X;
  }
  return strips;
}

namespace {

int theta_count(const BaselineParams& bp) {
  return static_cast<int>(std::floor((bp.theta_hi - bp.theta_lo) / bp.theta_step + 1e-9)) + 1;
}

}  // namespace

std::vector<double> fdsm_objective(const DisplacementVolume& vol, int z, int x0, int x1, const BaselineParams& bp) {
  bp.check();
  const int W = x1 - x0;
  if (x0 < 0 || x1 > vol.X || W < 2) throw ParameterError("FDSM strip outside the volume");
  const int N = vol.N;
  const int p = std::min(N / 2, static_cast<int>(std::floor(N * bp.f_sig_hz / vol.fs_hz)));
  if (p < 1) throw ParameterError("FDSM needs at least one frequency bin below f_sig");

  // Temporal spectra of the strip columns, bins 1..p. Column x is delayed by
  // x / c, so U(x, f_m) carries the phase exp(-j 2 pi f_m x / c).
  std::vector<std::complex<double>> U(static_cast<std::size_t>(p) * W);
  for (int x = 0; x < W; ++x) {
    const auto spec = fourier::rfft(vol.trace(x0 + x, z));
    for (int m = 1; m <= p; ++m) U[static_cast<std::size_t>(m - 1) * W + x] = spec[m];
  }
  const double mm_per_col = 1.0 / vol.fsp_px_per_mm;
  const int count = theta_count(bp);
  std::vector<double> obj(static_cast<std::size_t>(count), 0.0);
  for (int t = 0; t < count; ++t) {
    const double theta = bp.theta_lo + t * bp.theta_step;  // mm/ms
    double s = 0.0;
    for (int m = 1; m <= p; ++m) {
      const double f_khz = m * vol.fs_hz / N * 1e-3;
      const auto step = std::polar(1.0, 2.0 * std::numbers::pi * f_khz * mm_per_col / theta);
      std::complex<double> acc = 0.0;
      const auto* u = &U[static_cast<std::size_t>(m - 1) * W];
      for (int x = W - 1; x >= 0; --x) acc = acc * step + u[x];
      s += std::abs(acc);
    }
    obj[t] = s;
  }
  return obj;
}

FdsmResult estimate_fdsm_detailed(const DisplacementVolume& vol, const BaselineParams& bp) {
  bp.check();
  const auto strips = fdsm_strips(vol.X, vol.fsp_px_per_mm, bp.strip_mm);
  FdsmResult res{SwsMap(vol.X, vol.Z), Grid2<std::uint8_t>(vol.X, vol.Z, 0), Grid2<std::uint8_t>(vol.X, vol.Z, 0),
                 static_cast<int>(strips.size()) * vol.Z, 0};
  std::vector<std::uint8_t> flat_flags(static_cast<std::size_t>(vol.Z) * strips.size(), 0);
#pragma omp parallel for schedule(dynamic)
  for (int z = 0; z < vol.Z; ++z) {
    for (std::size_t s = 0; s < strips.size(); ++s) {
      const auto [x0, x1] = strips[s];
      const auto obj = fdsm_objective(vol, z, x0, x1, bp);
      const int best = static_cast<int>(std::max_element(obj.begin(), obj.end()) - obj.begin());
      const double mean = std::accumulate(obj.begin(), obj.end(), 0.0) / static_cast<double>(obj.size());
      const bool flat = !(obj[best] >= 1.05 * mean) || !(obj[best] > 0.0);
      const bool edge = best == 0 || best + 1 == static_cast<int>(obj.size());
      for (int x = x0; x < x1; ++x) {
        if (flat) {
          res.flat(x, z) = 1;
        } else {
          res.map.set(x, z, bp.theta_lo + best * bp.theta_step);
          if (edge) res.low_confidence(x, z) = 1;
        }
      }
      flat_flags[static_cast<std::size_t>(z) * strips.size() + s] = flat ? 1 : 0;
    }
  }
  for (auto f : flat_flags) res.flat_strips += f;
  return res;
}

SwsMap estimate_fdsm(const DisplacementVolume& vol, const BaselineParams& bp) {
  return estimate_fdsm_detailed(vol, bp).map;
}

}  // namespace sws::baselines
