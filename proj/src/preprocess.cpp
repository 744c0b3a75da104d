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

#include "sws/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "sws/fourier.hpp"

namespace sws::preprocess {

LateralRange roi_excluding_mm(int X, double fsp_px_per_mm, double blind_mm) {
  const int lo = static_cast<int>(std::lround(blind_mm * fsp_px_per_mm));
  return {std::clamp(lo, 0, X), X};
}

void CleaningParams::check(int X) const {
  if (!(t_sh > 0.0)) throw ParameterError("t_sh must be > 0");
  if (!(q > 0.0 && q < 1.0)) throw ParameterError("q must be in (0, 1)");
  if (!(rho > 0.0)) throw ParameterError("rho must be > 0");
  if (r < 1) throw ParameterError("r must be >= 1");
  if (roi_x.lo < 0 || roi_x.hi > X || roi_x.width() <= 0) throw ParameterError("empty or out-of-range lateral ROI");
  if (roi_x.width() < 2 * r) throw ParameterError("lateral ROI narrower than 2 columns per line");
}

DisplacementVolume lateral_interpolate(const DisplacementVolume& vol, int M) {
  if (M < 1) throw ParameterError("lateral interpolation order must be >= 1");
  if (M == 1) return vol;
  const int nx = M * vol.X - (M - 1);
  DisplacementVolume out(nx, vol.Z, vol.N, vol.fs_hz, vol.fsp_px_per_mm * M, vol.axial_res_mm_per_px);

#pragma omp parallel for schedule(static)
  for (int z = 0; z < vol.Z; ++z) {
    std::vector<double> row(static_cast<std::size_t>(vol.X));
    for (int n = 0; n < vol.N; ++n) {
      for (int x = 0; x < vol.X; ++x) row[x] = vol.at(x, z, n);
      const auto up = fourier::upsample(row, M);
      for (int x = 0; x < nx; ++x) out.at(x, z, n) = up[x];
      // Knots are exact by construction; pin them to the input bits.
      for (int x = 0; x < vol.X; ++x) out.at(x * M, z, n) = row[x];
    }
  }
  return out;
}

std::vector<double> temporal_upsample(std::span<const double> sig, int L) { return fourier::upsample(sig, L); }

DisplacementVolume crop_lateral(const DisplacementVolume& vol, LateralRange roi) {
  if (roi.lo < 0 || roi.hi > vol.X || roi.width() <= 0) throw ParameterError("empty or out-of-range lateral ROI");
  DisplacementVolume out(roi.width(), vol.Z, vol.N, vol.fs_hz, vol.fsp_px_per_mm, vol.axial_res_mm_per_px);
  for (int x = 0; x < roi.width(); ++x) {
    for (int z = 0; z < vol.Z; ++z) {
      const auto src = vol.trace(roi.lo + x, z);
      std::copy(src.begin(), src.end(), out.trace(x, z).begin());
    }
  }
  return out;
}

TlPlane extract_condition_plane(const DisplacementVolume& vol, int z_index, const CleaningParams& params) {
  if (z_index < 0 || z_index >= vol.Z) throw ParameterError("axial index out of range");
  const auto roi = params.roi_x;
  if (roi.lo < 0 || roi.hi > vol.X || roi.width() <= 0) throw ParameterError("empty or out-of-range lateral ROI");

  TlPlane plane{Grid2<double>(roi.width(), vol.N, 0.0), z_index};
  double plane_max = 0.0;
  std::vector<double> row_peak(static_cast<std::size_t>(roi.width()), 0.0);
  for (int x = 0; x < roi.width(); ++x) {
    const auto tr = vol.trace(roi.lo + x, z_index);
    double peak = tr[0];
    for (int n = 0; n < vol.N; ++n) {
      plane.d(x, n) = tr[n];
      peak = std::max(peak, tr[n]);
    }
    row_peak[x] = peak;
    plane_max = std::max(plane_max, peak);
  }
  for (int x = 0; x < roi.width(); ++x) {
    const double peak = row_peak[x];
    const bool dead = !(plane_max > 0.0) || peak < 1e-12 * plane_max;
    for (int n = 0; n < vol.N; ++n) {
      plane.d(x, n) = dead ? 0.0 : std::max(0.0, plane.d(x, n) / peak);
    }
  }
  return plane;
}

std::vector<int> ttp_profile(const TlPlane& plane) {
  std::vector<int> profile(static_cast<std::size_t>(plane.width()), 0);
  for (int x = 0; x < plane.width(); ++x) {
    int best = 0;
    for (int n = 1; n < plane.frames(); ++n) {
      if (plane.d(x, n) > plane.d(x, best)) best = n;
    }
    profile[x] = best;
  }
  return profile;
}

std::vector<std::uint8_t> prune_outlier_peaks(std::span<const int> profile, double t_sh) {
  const std::size_t n = profile.size();
  if (n < 2) throw ParameterError("outlier pruning needs at least 2 lateral points");
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += static_cast<double>(i);
    my += profile[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = static_cast<double>(i) - mx;
    sxy += dx * (profile[i] - my);
    sxx += dx * dx;
  }
  const double slope = sxy / sxx;
  std::vector<std::uint8_t> kept(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const double res = profile[i] - (my + slope * (static_cast<double>(i) - mx));
    kept[i] = res * res <= t_sh ? 1 : 0;
  }
  return kept;
}

namespace {

// Running moments of the support set, prefix-summed over columns.
struct Moments {
  double cnt = 0, sx = 0, sn = 0, sxx = 0, sxn = 0, snn = 0;
  int cols = 0;  // columns with at least one support point

  Moments operator-(const Moments& o) const {
    return {cnt - o.cnt, sx - o.sx, sn - o.sn, sxx - o.sxx, sxn - o.sxn, snn - o.snn, cols - o.cols};
  }
  double centered_xx() const { return sxx - sx * sx / cnt; }
  double centered_xn() const { return sxn - sx * sn / cnt; }
  double centered_nn() const { return snn - sn * sn / cnt; }
  double sse() const {
    const double cxx = centered_xx();
    const double cxn = centered_xn();
    return std::max(0.0, centered_nn() - cxn * cxn / cxx);
  }
};

}  // namespace

PiecewiseLines piecewise_fit(const TlPlane& plane, std::span<const std::uint8_t> kept, double q, int r) {
  const int w = plane.width();
  if (static_cast<int>(kept.size()) != w) throw ParameterError("kept mask does not match plane width");
  if (r < 1) throw ParameterError("r must be >= 1");

  std::vector<Moments> prefix(static_cast<std::size_t>(w + 1));
  for (int x = 0; x < w; ++x) {
    Moments m = prefix[x];
    bool any = false;
    if (kept[x] != 0) {
      for (int n = 0; n < plane.frames(); ++n) {
        if (plane.d(x, n) < q) continue;
        m.cnt += 1;
        m.sx += x;
        m.sn += n;
        m.sxx += static_cast<double>(x) * x;
        m.sxn += static_cast<double>(x) * n;
        m.snn += static_cast<double>(n) * n;
        any = true;
      }
    }
    m.cols += any ? 1 : 0;
    prefix[x + 1] = m;
  }

  // Narrow ranges only fit the integer quantization of the peak track.
  const int min_width = std::max(2, w / (3 * r));
  auto feasible = [&](int a, int b) { return b - a >= min_width && (prefix[b] - prefix[a]).cols >= 2; };
  auto cost = [&](int a, int b) { return (prefix[b] - prefix[a]).sse(); };

  constexpr double inf = std::numeric_limits<double>::infinity();
  // best[j][b]: minimal SSE covering columns [0, b) with j segments.
  std::vector<std::vector<double>> best(static_cast<std::size_t>(r + 1), std::vector<double>(w + 1, inf));
  std::vector<std::vector<int>> arg(static_cast<std::size_t>(r + 1), std::vector<int>(w + 1, -1));
  best[0][0] = 0.0;
  for (int j = 1; j <= r; ++j) {
    for (int b = 1; b <= w; ++b) {
      for (int a = j - 1; a < b; ++a) {
        if (best[j - 1][a] == inf || !feasible(a, b)) continue;
        const double v = best[j - 1][a] + cost(a, b);
        if (v < best[j][b]) {
          best[j][b] = v;
          arg[j][b] = a;
        }
      }
    }
  }
  if (best[r][w] == inf) {
    std::ostringstream os;
    os << "not enough line support for " << r << " segment(s) in slice " << plane.z_index;
    throw CleaningError(os.str());
  }

  PiecewiseLines out;
  out.lines.resize(static_cast<std::size_t>(r));
  int b = w;
  for (int j = r; j >= 1; --j) {
    const int a = arg[j][b];
    const Moments m = prefix[b] - prefix[a];
    const double slope = m.centered_xn() / m.centered_xx();
    out.lines[j - 1] = LineSegment{slope, m.sn / m.cnt - slope * m.sx / m.cnt, a, b};
    b = a;
  }
  return out;
}

Grid2<double> build_mask(const PiecewiseLines& lines, double rho, int width, int frames) {
  if (!(rho > 0.0)) throw ParameterError("rho must be > 0");
  constexpr double floor = std::numeric_limits<double>::min();
  Grid2<double> phi(width, frames, 0.0);
  const double inv = 1.0 / (2.0 * rho * rho);
  for (const auto& seg : lines.lines) {
    const int lo = std::max(seg.x_begin, 0);
    const int hi = std::min(seg.x_end, width);
    for (int x = lo; x < hi; ++x) {
      const double center = seg.slope * x + seg.intercept;
      for (int n = 0; n < frames; ++n) {
        const double th = n - center;
        phi(x, n) += std::exp(-th * th * inv);
      }
    }
  }
  for (double& v : phi.values()) v = std::max(v, floor);
  return phi;
}

bool clean_plane(TlPlane& plane, const CleaningParams& params, PiecewiseLines* lines_out, Grid2<double>* mask_out) {
  const auto profile = ttp_profile(plane);
  const auto kept = prune_outlier_peaks(profile, params.t_sh);
  PiecewiseLines lines;
  try {
    lines = piecewise_fit(plane, kept, params.q, params.r);
  } catch (const CleaningError&) {
    if (params.r == 1) return false;
    try {
      lines = piecewise_fit(plane, kept, params.q, 1);
    } catch (const CleaningError&) {
      return false;
    }
  }
  auto phi = build_mask(lines, params.rho, plane.width(), plane.frames());
  // Attenuate only: overlapping segments never amplify.
  for (double& v : phi.values()) v = std::min(v, 1.0);
  auto d = plane.d.values();
  const auto m = phi.values();
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double v = d[i] * m[i];
    // Far tails underflow to denormals otherwise, which stall the FFTs downstream.
    d[i] = std::abs(v) < 1e-200 ? 0.0 : v;
  }
  if (lines_out != nullptr) *lines_out = std::move(lines);
  if (mask_out != nullptr) *mask_out = std::move(phi);
  return true;
}

CleanResult tl_clean(const DisplacementVolume& vol, const CleaningParams& params) {
  params.check(vol.X);
  const auto roi = params.roi_x;
  CleanResult res;
  res.roi = roi;
  res.volume = DisplacementVolume(roi.width(), vol.Z, vol.N, vol.fs_hz, vol.fsp_px_per_mm, vol.axial_res_mm_per_px);
  res.slice_fallback.assign(static_cast<std::size_t>(vol.Z), 0);
  res.lines.resize(static_cast<std::size_t>(vol.Z));

#pragma omp parallel for schedule(dynamic)
  for (int z = 0; z < vol.Z; ++z) {
    TlPlane plane = extract_condition_plane(vol, z, params);
    PiecewiseLines lines;
    if (!clean_plane(plane, params, &lines)) {
      res.slice_fallback[z] = 1;
    } else {
      res.lines[z] = std::move(lines);
    }
    for (int x = 0; x < plane.width(); ++x) {
      auto tr = res.volume.trace(x, z);
      for (int n = 0; n < vol.N; ++n) tr[n] = plane.d(x, n);
    }
  }
  return res;
}

}  // namespace sws::preprocess
