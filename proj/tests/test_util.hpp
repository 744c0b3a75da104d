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

#ifndef SWS_TEST_UTIL_HPP
#define SWS_TEST_UTIL_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "sws/core.hpp"
#include "sws/phantom.hpp"

// Independent oracles for the tests: nothing here calls into the FFT layer.
namespace sws::testing {

using cplx = std::complex<double>;

/// O(N^2) forward DFT, all N bins.
inline std::vector<cplx> direct_dft(const std::vector<double>& x) {
  const int n = static_cast<int>(x.size());
  std::vector<cplx> out(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    cplx acc{0.0, 0.0};
    for (int m = 0; m < n; ++m) {
      const double ph = -2.0 * std::numbers::pi * static_cast<double>(k) * m / n;
      acc += x[m] * cplx(std::cos(ph), std::sin(ph));
    }
    out[k] = acc;
  }
  return out;
}

/// Circular bandlimited delay by d samples (d may be fractional), evaluated with
/// a direct inverse DFT. The Nyquist bin is dropped so the result stays real.
inline std::vector<double> fractional_delay(const std::vector<double>& x, double d) {
  const int n = static_cast<int>(x.size());
  const auto X = direct_dft(x);
  std::vector<double> y(static_cast<std::size_t>(n), 0.0);
  for (int m = 0; m < n; ++m) {
    double acc = X[0].real();
    for (int k = 1; 2 * k < n; ++k) {
      const double ph = 2.0 * std::numbers::pi * k * (m - d) / n;
      acc += 2.0 * (X[k] * cplx(std::cos(ph), std::sin(ph))).real();
    }
    y[m] = acc / n;
  }
  return y;
}

/// exp(-(n - centre)^2 / (2 width^2)), n = 0..len-1.
inline std::vector<double> gaussian_pulse(int len, double centre, double width) {
  std::vector<double> v(static_cast<std::size_t>(len));
  for (int n = 0; n < len; ++n) v[n] = std::exp(-(n - centre) * (n - centre) / (2.0 * width * width));
  return v;
}

/// Unique scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("swsopt_test_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Same volume with every trace delayed by `shift` frames (zeros shifted in).
inline DisplacementVolume delay_frames(const DisplacementVolume& vol, int shift) {
  DisplacementVolume out = vol;
  for (int x = 0; x < vol.X; ++x) {
    for (int z = 0; z < vol.Z; ++z) {
      for (int n = 0; n < vol.N; ++n) out.at(x, z, n) = n >= shift ? vol.at(x, z, n - shift) : 0.0;
    }
  }
  return out;
}

inline DisplacementVolume scaled(const DisplacementVolume& vol, double s) {
  DisplacementVolume out = vol;
  for (double& v : out.data) v *= s;
  return out;
}

/// Adds a residual oscillation behind the main pulse of every trace: a
/// sinusoid of per-trace random frequency in [400, 900] Hz and phase under the
/// envelope (s / 2tau)^2 exp(2 - s / tau), s = time since arrival, tau = 1 ms,
/// scaled by `gain` times the local pulse amplitude.
inline void add_tail_oscillation(DisplacementVolume& vol, const phantom::Preset& p, double gain, std::uint64_t seed) {
  const auto t = phantom::arrival_time_field(p.speed, p.pulse.source_x_px);
  constexpr double tau_ms = 1.0;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> freq(400.0, 900.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  for (int x = 0; x < vol.X; ++x) {
    const double d_mm = std::abs(x - p.pulse.source_x_px) / p.speed.fsp_px_per_mm;
    const double amp = gain * p.pulse.amp0 * std::pow(p.pulse.alpha_per_mm, d_mm);
    for (int z = 0; z < vol.Z; ++z) {
      const double f = freq(rng);
      const double ph = phase(rng);
      auto trace = vol.trace(x, z);
      for (int n = 0; n < vol.N; ++n) {
        const double s = n * 1000.0 / vol.fs_hz - t(x, z);
        if (s <= 0.0) continue;
        const double env = (s / (2.0 * tau_ms)) * (s / (2.0 * tau_ms)) * std::exp(2.0 - s / tau_ms);
        trace[n] += amp * env * std::sin(2.0 * std::numbers::pi * f * s * 1e-3 + ph);
      }
    }
  }
}

}  // namespace sws::testing

#endif  // SWS_TEST_UTIL_HPP
