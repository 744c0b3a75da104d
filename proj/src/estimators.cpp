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

#include "sws/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include "sws/fourier.hpp"

namespace sws::estimators {

void OptimizationParams::check(double fs_hz) const {
  if (dx_px < 1) throw ParameterError("dx_px must be >= 1");
  if (l < 1 || a < 1 || l % 2 == 0 || a % 2 == 0) throw ParameterError("kernel extents l and a must be odd");
  if (!(sigma_w > 0.0)) throw ParameterError("sigma_w must be > 0");
  if (L < 1) throw ParameterError("temporal interpolation order L must be >= 1");
  if (!(f_sig_hz > 0.0 && f_sig_hz < fs_hz / 2.0)) throw ParameterError("f_sig must lie in (0, fs/2)");
  if (!(gamma1 >= 0.0) || !(gamma2 >= 0.0)) throw ParameterError("gamma1 and gamma2 must be >= 0");
  if (mode == LossMode::combined && !(gamma1 + gamma2 > 0.0)) {
    throw ParameterError("combined mode needs gamma1 + gamma2 > 0");
  }
}

double ncc(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ParameterError("ncc: length mismatch");
  double ab = 0.0;
  double aa = 0.0;
  double bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return ab / (std::sqrt(aa * bb) + kNccEps);
}

double ncc_shifted(std::span<const double> earlier, std::span<const double> later, int tau) {
  if (earlier.size() != later.size()) throw ParameterError("ncc: length mismatch");
  const int len = static_cast<int>(earlier.size());
  if (tau < 0 || tau >= len) return 0.0;
  double ab = 0.0;
  double aa = 0.0;
  double bb = 0.0;
  for (int m = 0; m + tau < len; ++m) {
    ab += earlier[m] * later[m + tau];
    aa += earlier[m] * earlier[m];
  }
  for (int n = 0; n < len; ++n) bb += later[n] * later[n];
  return ab / (std::sqrt(aa * bb) + kNccEps);
}

std::vector<double> ncc_curve(std::span<const double> earlier, std::span<const double> later) {
  if (earlier.size() != later.size()) throw ParameterError("ncc: length mismatch");
  const int len = static_cast<int>(earlier.size());
  auto r = fourier::xcorr_forward(earlier, later);
  std::vector<double> prefix(static_cast<std::size_t>(len + 1), 0.0);
  for (int m = 0; m < len; ++m) prefix[m + 1] = prefix[m] + earlier[m] * earlier[m];
  double bb = 0.0;
  for (double v : later) bb += v * v;
  for (int tau = 0; tau < len; ++tau) r[tau] /= std::sqrt(prefix[len - tau] * bb) + kNccEps;
  return r;
}

namespace {

int argmax_first(std::span<const double> v) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(v.size()); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

double energy(std::span<const double> v) {
  double e = 0.0;
  for (double s : v) e += s * s;
  return e;
}

}  // namespace

std::pair<int, int> pairwise_delays_td(const SignalGroup& group, int L) {
  const auto u0 = fourier::upsample(group.u0, L);
  const auto u1 = fourier::upsample(group.u1, L);
  const auto u2 = fourier::upsample(group.u2, L);
  return {argmax_first(ncc_curve(u1, u0)), argmax_first(ncc_curve(u0, u2))};
}

double loss_td(const SignalGroup& group, int T, int L) {
  const auto u0 = fourier::upsample(group.u0, L);
  const auto u1 = fourier::upsample(group.u1, L);
  const auto u2 = fourier::upsample(group.u2, L);
  return 2.0 - ncc_shifted(u1, u0, T) - ncc_shifted(u0, u2, T);
}

int significant_bins(int N, double f_sig_hz, double fs_hz) {
  return static_cast<int>(std::floor(N * f_sig_hz / fs_hz));
}

double phase_slope(std::span<const std::complex<double>> Ua, std::span<const std::complex<double>> Ub, int K, int N) {
  if (K < 2) throw ParameterError("phase regression needs at least 2 frequency bins below f_sig");
  if (static_cast<int>(Ua.size()) <= K || static_cast<int>(Ub.size()) <= K) {
    throw ParameterError("phase regression: spectrum shorter than K");
  }
  std::vector<double> diff(static_cast<std::size_t>(K));
  for (int k = 1; k <= K; ++k) diff[k - 1] = std::arg(Ua[k] * std::conj(Ub[k]));
  fourier::unwrap(diff);
  const double step = 2.0 * std::numbers::pi / N;
  double mw = 0.0;
  double mp = 0.0;
  for (int k = 1; k <= K; ++k) {
    mw += k * step;
    mp += diff[k - 1];
  }
  mw /= K;
  mp /= K;
  double swp = 0.0;
  double sww = 0.0;
  for (int k = 1; k <= K; ++k) {
    const double dw = k * step - mw;
    swp += dw * (diff[k - 1] - mp);
    sww += dw * dw;
  }
  return swp / sww;
}

double phase_shift_regress(std::span<const double> ua, std::span<const double> ub, double f_sig_hz, double fs_hz) {
  if (ua.size() != ub.size()) throw ParameterError("phase regression: length mismatch");
  const int N = static_cast<int>(ua.size());
  const int K = significant_bins(N, f_sig_hz, fs_hz);
  if (K < 2) throw ParameterError("phase regression needs at least 2 frequency bins below f_sig");
  return phase_slope(fourier::rfft(ua), fourier::rfft(ub), K, N);
}

double phase_loss(const PhaseTerms& terms, int T, int L) {
  const int K = static_cast<int>(terms.weight.size());
  const double step = 2.0 * std::numbers::pi / terms.N;
  const double slope = static_cast<double>(T) / L;
  double s01 = 0.0;
  double s20 = 0.0;
  for (int k = 1; k <= K; ++k) {
    const double w = k * step;
    const double e01 = (terms.m01 * w - slope * w) * terms.weight[k - 1];
    const double e20 = (terms.m20 * w - slope * w) * terms.weight[k - 1];
    s01 += e01 * e01;
    s20 += e20 * e20;
  }
  return s01 / K + s20 / K;
}

namespace {

PhaseTerms phase_terms_from_spectra(std::span<const std::complex<double>> U0, std::span<const std::complex<double>> U1,
                                    std::span<const std::complex<double>> U2, int K, int N) {
  PhaseTerms t;
  t.N = N;
  t.m01 = phase_slope(U1, U0, K, N);
  t.m20 = phase_slope(U0, U2, K, N);
  t.weight.resize(static_cast<std::size_t>(K));
  double peak = 0.0;
  for (int k = 1; k <= K; ++k) {
    t.weight[k - 1] = (std::abs(U0[k]) + std::abs(U1[k]) + std::abs(U2[k])) / 3.0;
    peak = std::max(peak, t.weight[k - 1]);
  }
  for (double& w : t.weight) w /= peak + kNccEps;
  return t;
}

}  // namespace

PhaseTerms phase_terms(const SignalGroup& group, double f_sig_hz, double fs_hz) {
  const int N = static_cast<int>(group.u0.size());
  if (group.u1.size() != group.u0.size() || group.u2.size() != group.u0.size()) {
    throw ParameterError("signal group members differ in length");
  }
  const int K = significant_bins(N, f_sig_hz, fs_hz);
  if (K < 2) throw ParameterError("phase regression needs at least 2 frequency bins below f_sig");
  return phase_terms_from_spectra(fourier::rfft(group.u0), fourier::rfft(group.u1), fourier::rfft(group.u2), K, N);
}

double loss_pd(const SignalGroup& group, int T, int L, double f_sig_hz, double fs_hz) {
  return phase_loss(phase_terms(group, f_sig_hz, fs_hz), T, L);
}

KernelWeights gaussian_kernel(int l, int a, double sigma_w) {
  if (l < 1 || a < 1 || l % 2 == 0 || a % 2 == 0) throw ParameterError("kernel extents must be odd");
  if (!(sigma_w > 0.0)) throw ParameterError("sigma_w must be > 0");
  KernelWeights w{Grid2<double>(l, a, 0.0), Grid2<std::uint8_t>(l, a, 1)};
  const int hl = l / 2;
  const int ha = a / 2;
  const double s2 = sigma_w * sigma_w;
  double sum = 0.0;
  for (int k = -hl; k <= hl; ++k) {
    for (int i = -ha; i <= ha; ++i) {
      const double v = std::exp(-(k * k + i * i) / (2.0 * s2)) / (2.0 * std::numbers::pi * s2);
      w.mu(k + hl, i + ha) = v;
      sum += v;
    }
  }
  for (double& v : w.mu.values()) v /= sum;
  return w;
}

KernelWeights edge_renormalize(const KernelWeights& w, const Grid2<std::uint8_t>& inside) {
  if (inside.nx() != w.l() || inside.nz() != w.a()) throw UsageError("edge mask does not match kernel shape");
  if (inside(w.l() / 2, w.a() / 2) == 0) throw UsageError("kernel centre lies outside the data");
  KernelWeights out = w;
  double sum = 0.0;
  for (int k = 0; k < w.l(); ++k) {
    for (int i = 0; i < w.a(); ++i) {
      const bool in = inside(k, i) != 0 && w.valid(k, i) != 0;
      out.valid(k, i) = in ? 1 : 0;
      out.mu(k, i) = in ? w.mu(k, i) : 0.0;
      sum += out.mu(k, i);
    }
  }
  for (double& v : out.mu.values()) v /= sum;
  return out;
}

std::pair<int, int> search_range(std::span<const std::pair<int, int>> pairwise, int L, int t_cap) {
  if (pairwise.empty()) throw UsageError("search range needs at least one delay pair");
  if (t_cap < 1) throw ParameterError("search range cap must be >= 1");
  int lo = std::numeric_limits<int>::max();
  int hi = std::numeric_limits<int>::min();
  for (const auto& [a, b] : pairwise) {
    lo = std::min({lo, a, b});
    hi = std::max({hi, a, b});
  }
  hi = std::clamp(hi, 1, t_cap);
  lo = std::clamp(lo, 1, hi);
  if (lo == hi) {
    lo = std::max(1, lo - L);
    hi = std::min(t_cap, hi + L);
  }
  return {lo, hi};
}

double sws_from_shift(int T, int dx_px, int L, double fs_hz, double fsp_px_per_mm) {
  if (T < 1) throw ParameterError("shift must be >= 1");
  return static_cast<double>(dx_px) / T * (L * fs_hz) / fsp_px_per_mm * 1e-3;
}

ShiftEstimate estimate_pixel(const DisplacementVolume& vol, int x, int z, const OptimizationParams& params) {
  params.check(vol.fs_hz);
  const int hl = params.l / 2;
  const int ha = params.a / 2;
  const int dx = params.dx_px;
  const int NL = vol.N * params.L;

  struct Cell {
    int k, i;
    std::vector<double> u0, u1, u2;  // upsampled (td)
    std::optional<PhaseTerms> phase;
  };
  std::vector<Cell> cells;
  Grid2<std::uint8_t> inside(params.l, params.a, 0);
  for (int k = -hl; k <= hl; ++k) {
    for (int i = -ha; i <= ha; ++i) {
      const int cx = x + k;
      const int cz = z + i;
      if (cz < 0 || cz >= vol.Z || cx - dx < 0 || cx + dx >= vol.X) continue;
      const auto t0 = vol.trace(cx, cz);
      const auto t1 = vol.trace(cx - dx, cz);
      const auto t2 = vol.trace(cx + dx, cz);
      if (energy(t0) <= 0.0 || energy(t1) <= 0.0 || energy(t2) <= 0.0) continue;
      inside(k + hl, i + ha) = 1;
      Cell c{k, i, {}, {}, {}, std::nullopt};
      if (params.uses_td()) {
        c.u0 = fourier::upsample(t0, params.L);
        c.u1 = fourier::upsample(t1, params.L);
        c.u2 = fourier::upsample(t2, params.L);
      }
      if (params.uses_pd()) {
        SignalGroup g{{t0.begin(), t0.end()}, {t1.begin(), t1.end()}, {t2.begin(), t2.end()}};
        c.phase = phase_terms(g, params.f_sig_hz, vol.fs_hz);
      }
      cells.push_back(std::move(c));
    }
  }
  ShiftEstimate est;
  if (inside(hl, ha) == 0) return est;
  const auto w = edge_renormalize(gaussian_kernel(params.l, params.a, params.sigma_w), inside);

  std::vector<std::pair<int, int>> delays;
  for (const auto& c : cells) {
    if (params.uses_td()) {
      int best10 = 0;
      int best02 = 0;
      double v10 = -std::numeric_limits<double>::infinity();
      double v02 = v10;
      for (int tau = 0; tau < NL; ++tau) {
        const double a = ncc_shifted(c.u1, c.u0, tau);
        const double b = ncc_shifted(c.u0, c.u2, tau);
        if (a > v10) {
          v10 = a;
          best10 = tau;
        }
        if (b > v02) {
          v02 = b;
          best02 = tau;
        }
      }
      delays.emplace_back(best10, best02);
    }
    if (params.uses_pd()) {
      delays.emplace_back(static_cast<int>(std::lround(c.phase->m01 * params.L)),
                          static_cast<int>(std::lround(c.phase->m20 * params.L)));
    }
  }
  const auto [t_min, t_max] = search_range(delays, params.L, NL - 1);
  est.t_min = t_min;
  est.t_max = t_max;
  double best = std::numeric_limits<double>::infinity();
  for (int T = t_min; T <= t_max; ++T) {
    double f = 0.0;
    for (const auto& c : cells) {
      const double mu = w.mu(c.k + hl, c.i + ha);
      double j = 0.0;
      if (params.uses_td()) {
        const double td = 2.0 - ncc_shifted(c.u1, c.u0, T) - ncc_shifted(c.u0, c.u2, T);
        j += (params.mode == LossMode::combined ? params.gamma1 : 1.0) * td;
      }
      if (params.uses_pd()) {
        const double pd = phase_loss(*c.phase, T, params.L);
        j += (params.mode == LossMode::combined ? params.gamma2 : 1.0) * pd;
      }
      f += mu * j;
    }
    est.objective_curve.push_back(f);
    if (f < best) {
      best = f;
      est.t_opt = T;
    }
  }
  est.valid = true;
  return est;
}

namespace {

// Per-row data shared by every kernel that touches the row.
struct RowCache {
  std::vector<std::uint8_t> cell_ok;        // group at x is usable
  std::vector<std::vector<double>> fwd;     // NCC{u_x(n - tau), u_{x+dx}(n)}
  std::vector<int> fwd_argmax;
  std::vector<PhaseTerms> phase;            // per cell
};

void fill_row(const DisplacementVolume& vol, int z, const OptimizationParams& p, int K, RowCache& row) {
  const int W = vol.X;
  const int dx = p.dx_px;
  std::vector<std::uint8_t> alive(static_cast<std::size_t>(W));
  for (int x = 0; x < W; ++x) alive[x] = energy(vol.trace(x, z)) > 0.0 ? 1 : 0;
  row.cell_ok.assign(static_cast<std::size_t>(W), 0);
  for (int x = dx; x + dx < W; ++x) row.cell_ok[x] = alive[x - dx] && alive[x] && alive[x + dx];
  row.fwd.assign(static_cast<std::size_t>(W), {});
  row.fwd_argmax.assign(static_cast<std::size_t>(W), 0);
  row.phase.assign(static_cast<std::size_t>(W), {});

  std::vector<std::vector<double>> up(static_cast<std::size_t>(W));
  std::vector<std::vector<std::complex<double>>> spec(static_cast<std::size_t>(W));
#pragma omp parallel for schedule(static)
  for (int x = 0; x < W; ++x) {
    if (!alive[x]) continue;
    if (p.uses_td()) up[x] = fourier::upsample(vol.trace(x, z), p.L);
    if (p.uses_pd()) spec[x] = fourier::rfft(vol.trace(x, z));
  }
#pragma omp parallel for schedule(static)
  for (int x = 0; x < W - dx; ++x) {
    if (!alive[x] || !alive[x + dx]) continue;
    if (p.uses_td()) {
      row.fwd[x] = ncc_curve(up[x], up[x + dx]);
      row.fwd_argmax[x] = argmax_first(row.fwd[x]);
    }
  }
  if (p.uses_pd()) {
#pragma omp parallel for schedule(static)
    for (int x = 0; x < W; ++x) {
      if (row.cell_ok[x]) row.phase[x] = phase_terms_from_spectra(spec[x], spec[x - dx], spec[x + dx], K, vol.N);
    }
  }
}

}  // namespace

Grid2<int> estimate_shift_map(const DisplacementVolume& vol, const OptimizationParams& params) {
  params.check(vol.fs_hz);
  const int W = vol.X;
  const int Zn = vol.Z;
  const int hl = params.l / 2;
  const int ha = params.a / 2;
  const int dx = params.dx_px;
  const int NL = vol.N * params.L;
  const int K = significant_bins(vol.N, params.f_sig_hz, vol.fs_hz);
  if (params.uses_pd() && K < 2) throw ParameterError("phase regression needs at least 2 frequency bins below f_sig");
  const double g1 = params.mode == LossMode::combined ? params.gamma1 : 1.0;
  const double g2 = params.mode == LossMode::combined ? params.gamma2 : 1.0;
  const auto base = gaussian_kernel(params.l, params.a, params.sigma_w);

  Grid2<int> shifts(W, Zn, 0);
  // Ring of `a` rows; slot (z mod a) holds row z.
  std::vector<RowCache> ring(static_cast<std::size_t>(params.a));
  std::vector<int> ring_row(static_cast<std::size_t>(params.a), -1);
  auto row_at = [&](int z) -> const RowCache* {
    if (z < 0 || z >= Zn) return nullptr;
    const int slot = z % params.a;
    if (ring_row[slot] != z) {
      fill_row(vol, z, params, K, ring[slot]);
      ring_row[slot] = z;
    }
    return &ring[slot];
  };

  for (int z = 0; z < Zn; ++z) {
    std::vector<const RowCache*> rows(static_cast<std::size_t>(params.a));
    for (int i = -ha; i <= ha; ++i) rows[i + ha] = row_at(z + i);

#pragma omp parallel for schedule(dynamic, 4)
    for (int x = 0; x < W; ++x) {
      if (!rows[ha]->cell_ok[x]) continue;
      Grid2<std::uint8_t> inside(params.l, params.a, 0);
      std::vector<std::pair<int, int>> delays;
      for (int k = -hl; k <= hl; ++k) {
        const int cx = x + k;
        if (cx < 0 || cx >= W) continue;
        for (int i = -ha; i <= ha; ++i) {
          const RowCache* r = rows[i + ha];
          if (r == nullptr || !r->cell_ok[cx]) continue;
          inside(k + hl, i + ha) = 1;
          if (params.uses_td()) delays.emplace_back(r->fwd_argmax[cx - dx], r->fwd_argmax[cx]);
          if (params.uses_pd()) {
            delays.emplace_back(static_cast<int>(std::lround(r->phase[cx].m01 * params.L)),
                                static_cast<int>(std::lround(r->phase[cx].m20 * params.L)));
          }
        }
      }
      const auto w = edge_renormalize(base, inside);
      const auto [t_min, t_max] = search_range(delays, params.L, NL - 1);
      double best = std::numeric_limits<double>::infinity();
      int t_opt = 0;
      for (int T = t_min; T <= t_max; ++T) {
        double f = 0.0;
        for (int k = -hl; k <= hl; ++k) {
          for (int i = -ha; i <= ha; ++i) {
            if (!inside(k + hl, i + ha)) continue;
            const RowCache& r = *rows[i + ha];
            const int cx = x + k;
            double j = 0.0;
            if (params.uses_td()) j += g1 * (2.0 - r.fwd[cx - dx][T] - r.fwd[cx][T]);
            if (params.uses_pd()) j += g2 * phase_loss(r.phase[cx], T, params.L);
            f += w.mu(k + hl, i + ha) * j;
          }
        }
        if (f < best) {
          best = f;
          t_opt = T;
        }
      }
      shifts(x, z) = t_opt;
    }
  }
  return shifts;
}

SwsMap shifts_to_sws(const Grid2<int>& shifts, const DisplacementVolume& vol, const OptimizationParams& params) {
  SwsMap map(shifts.nx(), shifts.nz());
  for (int x = 0; x < shifts.nx(); ++x) {
    for (int z = 0; z < shifts.nz(); ++z) {
      if (shifts(x, z) >= 1) {
        map.set(x, z, sws_from_shift(shifts(x, z), params.dx_px, params.L, vol.fs_hz, vol.fsp_px_per_mm));
      }
    }
  }
  return map;
}

SwsMap estimate_map(const DisplacementVolume& vol_clean, const OptimizationParams& params) {
  return shifts_to_sws(estimate_shift_map(vol_clean, params), vol_clean, params);
}

}  // namespace sws::estimators
