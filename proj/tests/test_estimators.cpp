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

#include <gtest/gtest.h>
#include <omp.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "sws/estimators.hpp"
#include "sws/phantom.hpp"
#include "sws/preprocess.hpp"
#include "sws/reference.hpp"
#include "test_util.hpp"

namespace {

namespace est = sws::estimators;
namespace ph = sws::phantom;
using sws::DisplacementVolume;
using sws::testing::fractional_delay;
using sws::testing::gaussian_pulse;

std::vector<double> vec(std::span<const double> s) { return {s.begin(), s.end()}; }

est::SignalGroup group_at(const DisplacementVolume& v, int x, int z, int dx) {
  return {vec(v.trace(x, z)), vec(v.trace(x - dx, z)), vec(v.trace(x + dx, z))};
}

/// Group of bandlimited copies: u1 = p, u0 = p delayed by s, u2 = p delayed by 2 s.
est::SignalGroup shifted_group(double s, int N = 128, double a0 = 1.0, double a2 = 1.0) {
  const auto p = gaussian_pulse(N, 30.0, 4.0);
  est::SignalGroup g;
  g.u1 = p;
  g.u0 = fractional_delay(p, s);
  g.u2 = fractional_delay(p, 2.0 * s);
  for (double& v : g.u0) v *= a0;
  for (double& v : g.u2) v *= a2;
  return g;
}

DisplacementVolume small_volume(double jitter, std::uint64_t seed, int X = 40, int Z = 8) {
  auto p = ph::make_preset("inc45-d10.4");
  p.noise.jitter_std = jitter;
  p.noise.seed = seed;
  const auto full = ph::render(p);
  DisplacementVolume v(X, Z, full.N, full.fs_hz, full.fsp_px_per_mm, full.axial_res_mm_per_px);
  for (int x = 0; x < X; ++x) {
    for (int z = 0; z < Z; ++z) {
      const auto src = full.trace(x + 44, z + 36);
      std::copy(src.begin(), src.end(), v.trace(x, z).begin());
    }
  }
  return v;
}

TEST(Ncc, Examples) {
  const std::vector<double> s{0.3, -1.2, 2.0, 0.7};
  std::vector<double> s3 = s;
  for (double& v : s3) v *= 3.0;
  EXPECT_NEAR(est::ncc(s, s), 1.0, 1e-12);
  EXPECT_NEAR(est::ncc(s, s3), 1.0, 1e-12);
  EXPECT_EQ(est::ncc(std::vector<double>{1, 0}, std::vector<double>{0, 1}), 0.0);
  const std::vector<double> z(4, 0.0);
  EXPECT_EQ(est::ncc(z, z), 0.0);
}

TEST(Ncc, CurveMatchesDirectShiftedSum) {
  std::mt19937 rng(8);
  std::normal_distribution<double> g;
  std::vector<double> a(50);
  std::vector<double> b(50);
  for (double& v : a) v = g(rng);
  for (double& v : b) v = g(rng);
  const auto curve = est::ncc_curve(a, b);
  for (int tau = 0; tau < 50; ++tau) {
    double ab = 0.0;
    double aa = 0.0;
    double bb = 0.0;
    for (int m = 0; m + tau < 50; ++m) {
      ab += a[m] * b[m + tau];
      aa += a[m] * a[m];
    }
    for (double v : b) bb += v * v;
    const double expect = ab / (std::sqrt(aa * bb) + est::kNccEps);
    EXPECT_NEAR(curve[tau], expect, 1e-12);
    EXPECT_NEAR(est::ncc_shifted(a, b, tau), expect, 1e-12);
  }
}

TEST(PairwiseDelays, OnGridShiftIsExact) {
  const auto p = gaussian_pulse(96, 20.0, 3.0);
  for (int k : {1, 4, 9}) {
    est::SignalGroup g{fractional_delay(p, k), p, fractional_delay(p, 2 * k)};
    const auto [t10, t02] = est::pairwise_delays_td(g, 10);
    EXPECT_EQ(t10, 10 * k);
    EXPECT_EQ(t02, 10 * k);
  }
}

TEST(PairwiseDelays, ZeroEarlierSignalGivesZero) {
  const auto p = gaussian_pulse(64, 20.0, 3.0);
  est::SignalGroup g{p, std::vector<double>(64, 0.0), p};
  EXPECT_EQ(est::pairwise_delays_td(g, 10).first, 0);
}

TEST(PairwiseDelays, FractionalDelay) {
  const auto g = shifted_group(2.3);
  const auto [t10, t02] = est::pairwise_delays_td(g, 10);
  EXPECT_NEAR(t10, 23, 1);
  EXPECT_NEAR(t02, 23, 1);
}

TEST(LossTd, VanishesAtTrueShift) {
  const auto p = gaussian_pulse(96, 20.0, 3.0);
  est::SignalGroup g{fractional_delay(p, 3.0), p, fractional_delay(p, 6.0)};
  for (double& v : g.u0) v *= 0.6;
  for (double& v : g.u2) v *= 0.3;
  EXPECT_LT(est::loss_td(g, 30, 10), 1e-6);
}

TEST(LossTd, BoundedAndFiniteOverRange) {
  auto g = shifted_group(3.7);
  std::mt19937 rng(2);
  std::normal_distribution<double> n(0.0, 0.2);
  for (double& v : g.u2) v += n(rng);
  for (int T = 1; T < 128 * 4; T += 7) {
    const double l = est::loss_td(g, T, 4);
    EXPECT_TRUE(std::isfinite(l));
    EXPECT_GE(l, 0.0);
    EXPECT_LE(l, 4.0);
  }
}

TEST(LossTd, NoisyArgminNearTruth) {
  std::mt19937 rng(17);
  std::normal_distribution<double> n(0.0, 0.05);
  int ok = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const double s = 2.0 + 0.27 * trial;
    auto g = shifted_group(s);
    for (auto* u : {&g.u0, &g.u1, &g.u2}) {
      for (double& v : *u) v += n(rng);
    }
    int best = 1;
    double bl = est::loss_td(g, 1, 10);
    for (int T = 2; T < 200; ++T) {
      const double l = est::loss_td(g, T, 10);
      if (l < bl) {
        bl = l;
        best = T;
      }
    }
    if (std::abs(best - s * 10.0) <= 10.0) ++ok;
  }
  EXPECT_EQ(ok, 20);
}

TEST(LossTd, ArgminAgreesWithPairwiseDelays) {
  for (double s : {1.4, 2.9, 5.55}) {
    const auto g = shifted_group(s);
    const auto [t10, t02] = est::pairwise_delays_td(g, 10);
    int best = 1;
    double bl = est::loss_td(g, 1, 10);
    for (int T = 2; T < 128 * 10; ++T) {
      const double l = est::loss_td(g, T, 10);
      if (l < bl) {
        bl = l;
        best = T;
      }
    }
    EXPECT_LE(std::abs(best - t10), 1);
    EXPECT_LE(std::abs(best - t02), 1);
  }
}

TEST(PhaseRegress, IdenticalSignalsGiveZero) {
  const auto p = gaussian_pulse(128, 40.0, 4.0);
  EXPECT_NEAR(est::phase_shift_regress(p, p, 1000.0, 10000.0), 0.0, 1e-12);
}

TEST(PhaseRegress, FractionalDelay) {
  const auto p = gaussian_pulse(128, 40.0, 4.0);
  const auto q = fractional_delay(p, 3.4);
  EXPECT_NEAR(est::phase_shift_regress(p, q, 1000.0, 10000.0), 3.4, 0.05);
}

TEST(PhaseRegress, Antisymmetric) {
  std::mt19937 rng(4);
  std::normal_distribution<double> n(0.0, 0.1);
  auto p = gaussian_pulse(128, 40.0, 4.0);
  auto q = fractional_delay(p, 5.1);
  for (double& v : q) v += n(rng);
  EXPECT_NEAR(est::phase_shift_regress(p, q, 1000.0, 10000.0), -est::phase_shift_regress(q, p, 1000.0, 10000.0),
              1e-9);
}

TEST(PhaseRegress, TooFewBins) {
  const auto p = gaussian_pulse(16, 5.0, 2.0);
  EXPECT_THROW(est::phase_shift_regress(p, p, 1000.0, 10000.0), sws::ParameterError);
}

TEST(LossPd, ArgminIsRoundedShift) {
  for (double s : {1.26, 2.37, 4.81}) {
    const auto g = shifted_group(s);
    int best = 1;
    double bl = est::loss_pd(g, 1, 10, 1000.0, 10000.0);
    for (int T = 2; T < 200; ++T) {
      const double l = est::loss_pd(g, T, 10, 1000.0, 10000.0);
      EXPECT_GE(l, 0.0);
      if (l < bl) {
        bl = l;
        best = T;
      }
    }
    EXPECT_EQ(best, static_cast<int>(std::lround(s * 10.0)));
  }
}

TEST(LossPd, AmplitudeScalingInvariant) {
  const auto a = shifted_group(2.6);
  const auto b = shifted_group(2.6, 128, 0.37, 4.2);
  for (int T : {5, 26, 40}) {
    EXPECT_NEAR(est::loss_pd(a, T, 10, 1000.0, 10000.0), est::loss_pd(b, T, 10, 1000.0, 10000.0), 1e-9);
  }
}

TEST(LossPd, MatchesClosedForm) {
  const auto g = shifted_group(1.9);
  const auto t = est::phase_terms(g, 1000.0, 10000.0);
  const int K = est::significant_bins(128, 1000.0, 10000.0);
  ASSERT_EQ(K, 12);
  ASSERT_EQ(static_cast<int>(t.weight.size()), K);
  // Recompute |U| from the direct DFT.
  const auto U0 = sws::testing::direct_dft(g.u0);
  const auto U1 = sws::testing::direct_dft(g.u1);
  const auto U2 = sws::testing::direct_dft(g.u2);
  std::vector<double> w(K);
  double peak = 0.0;
  for (int k = 1; k <= K; ++k) {
    w[k - 1] = (std::abs(U0[k]) + std::abs(U1[k]) + std::abs(U2[k])) / 3.0;
    peak = std::max(peak, w[k - 1]);
  }
  const int T = 23;
  const int L = 10;
  double s = 0.0;
  for (int k = 1; k <= K; ++k) {
    const double om = 2.0 * std::numbers::pi * k / 128.0;
    const double wk = w[k - 1] / (peak + 1e-12);
    const double e1 = (t.m01 - static_cast<double>(T) / L) * om * wk;
    const double e2 = (t.m20 - static_cast<double>(T) / L) * om * wk;
    s += (e1 * e1 + e2 * e2) / K;
  }
  EXPECT_NEAR(est::loss_pd(g, T, L, 1000.0, 10000.0), s, 1e-12);
  EXPECT_NEAR(t.m01, 1.9, 0.05);
  EXPECT_NEAR(t.m20, 1.9, 0.05);
}

TEST(Kernel, Examples) {
  const auto one = est::gaussian_kernel(1, 1, 1.0);
  EXPECT_EQ(one.mu(0, 0), 1.0);
  const auto k5 = est::gaussian_kernel(5, 5, 1.0);
  double sum = 0.0;
  for (double v : k5.mu.values()) sum += v;
  EXPECT_NEAR(sum, 1.0, 1e-12);
  const auto sharp = est::gaussian_kernel(5, 5, 0.5);
  for (int k = 0; k < 5; ++k) {
    for (int i = 0; i < 5; ++i) {
      if (k != 2 || i != 2) {
        EXPECT_GT(sharp.center(), sharp.mu(k, i));
      }
    }
  }
  EXPECT_THROW(est::gaussian_kernel(4, 5, 1.0), sws::ParameterError);
}

TEST(Kernel, MatchesGaussianFormula) {
  const auto w = est::gaussian_kernel(5, 3, 1.3);
  double norm = 0.0;
  for (int k = -2; k <= 2; ++k) {
    for (int i = -1; i <= 1; ++i) norm += std::exp(-(k * k + i * i) / (2.0 * 1.3 * 1.3));
  }
  for (int k = -2; k <= 2; ++k) {
    for (int i = -1; i <= 1; ++i) {
      EXPECT_NEAR(w.mu(k + 2, i + 1), std::exp(-(k * k + i * i) / (2.0 * 1.3 * 1.3)) / norm, 1e-15);
    }
  }
}

TEST(Kernel, EdgeRenormalizeExamples) {
  const auto w = est::gaussian_kernel(3, 3, 0.5);
  sws::Grid2<std::uint8_t> all(3, 3, 1);
  const auto same = est::edge_renormalize(w, all);
  for (int k = 0; k < 3; ++k) {
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(same.mu(k, i), w.mu(k, i), 1e-15);
  }
  auto inside = all;
  for (int i = 0; i < 3; ++i) inside(2, i) = 0;
  const auto cut = est::edge_renormalize(w, inside);
  double sum = 0.0;
  int valid = 0;
  for (int k = 0; k < 3; ++k) {
    for (int i = 0; i < 3; ++i) {
      sum += cut.mu(k, i);
      valid += cut.valid(k, i);
    }
  }
  EXPECT_EQ(valid, 6);
  EXPECT_NEAR(sum, 1.0, 1e-12);
  EXPECT_GT(cut.center(), w.center());
  inside(1, 1) = 0;
  EXPECT_THROW(est::edge_renormalize(w, inside), sws::UsageError);
}

TEST(Kernel, NormalizationPropertyUnderRandomEdges) {
  std::mt19937 rng(12);
  std::bernoulli_distribution keep(0.6);
  for (int trial = 0; trial < 200; ++trial) {
    const int l = 1 + 2 * (trial % 4);
    const int a = 1 + 2 * ((trial / 4) % 4);
    const auto w = est::gaussian_kernel(l, a, 0.3 + 0.1 * (trial % 13));
    sws::Grid2<std::uint8_t> inside(l, a, 0);
    for (auto& v : inside.values()) v = keep(rng) ? 1 : 0;
    inside(l / 2, a / 2) = 1;
    const auto r = est::edge_renormalize(w, inside);
    double sum = 0.0;
    for (double v : r.mu.values()) {
      EXPECT_GE(v, 0.0);
      sum += v;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(SearchRange, Examples) {
  const std::vector<std::pair<int, int>> eq{{25, 25}, {25, 25}};
  EXPECT_EQ(est::search_range(eq, 10, 1000), std::make_pair(15, 35));
  const std::vector<std::pair<int, int>> low{{4, 4}};
  EXPECT_EQ(est::search_range(low, 10, 1000), std::make_pair(1, 14));
  const std::vector<std::pair<int, int>> two{{10, 30}};
  EXPECT_EQ(est::search_range(two, 10, 1000), std::make_pair(10, 30));
  const std::vector<std::pair<int, int>> zero{{0, 12}, {7, 3}};
  EXPECT_EQ(est::search_range(zero, 10, 1000), std::make_pair(1, 12));
}

TEST(SwsFromShift, Examples) {
  EXPECT_NEAR(est::sws_from_shift(100, 5, 10, 10000.0, 5.0), 1.0, 1e-12);
  EXPECT_NEAR(est::sws_from_shift(30, 3, 10, 10000.0, 5.882), 1.700, 5e-4);
  EXPECT_NEAR(est::sws_from_shift(60, 3, 10, 10000.0, 5.882), 0.5 * est::sws_from_shift(30, 3, 10, 10000.0, 5.882),
              1e-15);
  EXPECT_THROW(est::sws_from_shift(0, 3, 10, 10000.0, 5.882), sws::ParameterError);
}

TEST(Params, Validation) {
  est::OptimizationParams p;
  EXPECT_NO_THROW(p.check(10000.0));
  p.f_sig_hz = 6000.0;
  EXPECT_THROW(p.check(10000.0), sws::ParameterError);
  p = {};
  p.mode = est::LossMode::combined;
  p.gamma1 = 0.0;
  p.gamma2 = 0.0;
  EXPECT_THROW(p.check(10000.0), sws::ParameterError);
  p = {};
  p.l = 4;
  EXPECT_THROW(p.check(10000.0), sws::ParameterError);
}

class HomogeneousOracle : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    vol_ = new DisplacementVolume(ph::render(ph::make_preset("homog15")));
    const auto p = ph::make_preset("homog15");
    t_ = new sws::Grid2<double>(ph::arrival_time_field(p.speed, 0));
  }
  static void TearDownTestSuite() {
    delete vol_;
    delete t_;
  }
  static double true_shift(int x, int z, int dx, int L) {
    return ((*t_)(x, z) - (*t_)(x - dx, z)) * 1e-3 * vol_->fs_hz * L;
  }
  static DisplacementVolume* vol_;
  static sws::Grid2<double>* t_;
};
DisplacementVolume* HomogeneousOracle::vol_ = nullptr;
sws::Grid2<double>* HomogeneousOracle::t_ = nullptr;

TEST_F(HomogeneousOracle, TdWithinOneOfTruth) {
  est::OptimizationParams p;
  for (int x : {30, 50, 70}) {
    for (int z : {0, 2, 31, 63}) {
      const auto e = est::estimate_pixel(*vol_, x, z, p);
      ASSERT_TRUE(e.valid);
      EXPECT_LE(std::abs(e.t_opt - true_shift(x, z, p.dx_px, p.L)), 1.0) << x << "," << z;
      EXPECT_LE(e.t_min, e.t_opt);
      EXPECT_GE(e.t_max, e.t_opt);
      EXPECT_GE(e.t_opt, 1);
    }
  }
}

TEST_F(HomogeneousOracle, PdAndTdAgree) {
  est::OptimizationParams td;
  est::OptimizationParams pd;
  pd.mode = est::LossMode::pd;
  for (int x : {25, 60}) {
    for (int z : {5, 40}) {
      EXPECT_LE(std::abs(est::estimate_pixel(*vol_, x, z, td).t_opt - est::estimate_pixel(*vol_, x, z, pd).t_opt),
                td.L);
    }
  }
}

TEST_F(HomogeneousOracle, TrueShiftInsideSearchRange) {
  est::OptimizationParams p;
  p.mode = est::LossMode::combined;
  for (int x = p.dx_px; x + p.dx_px < vol_->X; x += 5) {
    for (int z = 0; z < vol_->Z; z += 7) {
      const auto e = est::estimate_pixel(*vol_, x, z, p);
      const double s = true_shift(x, z, p.dx_px, p.L);
      EXPECT_LE(e.t_min, s) << x << "," << z;
      EXPECT_GE(e.t_max, s) << x << "," << z;
    }
  }
}

TEST_F(HomogeneousOracle, ObjectiveEqualsWeightedLossSum) {
  est::OptimizationParams p;
  p.mode = est::LossMode::combined;
  const int x = 48;
  const int z = 20;
  const auto e = est::estimate_pixel(*vol_, x, z, p);
  const auto w = est::gaussian_kernel(p.l, p.a, p.sigma_w);
  for (int T = e.t_min; T <= e.t_max; T += 3) {
    double f = 0.0;
    for (int k = -2; k <= 2; ++k) {
      for (int i = -2; i <= 2; ++i) {
        const auto g = group_at(*vol_, x + k, z + i, p.dx_px);
        f += w.mu(k + 2, i + 2) *
             (p.gamma1 * est::loss_td(g, T, p.L) + p.gamma2 * est::loss_pd(g, T, p.L, p.f_sig_hz, vol_->fs_hz));
      }
    }
    EXPECT_NEAR(e.objective_curve[T - e.t_min], f, 1e-9);
  }
}

TEST_F(HomogeneousOracle, BorderPixelsWithoutNeighboursInvalid) {
  est::OptimizationParams p;
  EXPECT_FALSE(est::estimate_pixel(*vol_, 2, 10, p).valid);
  EXPECT_FALSE(est::estimate_pixel(*vol_, vol_->X - 3, 10, p).valid);
  EXPECT_TRUE(est::estimate_pixel(*vol_, p.dx_px, 0, p).valid);
}

TEST(ShiftMap, ParallelMatchesSerialReference) {
  const auto v = small_volume(0.1, 3);
  for (auto mode : {est::LossMode::td, est::LossMode::pd, est::LossMode::combined}) {
    est::OptimizationParams p;
    p.mode = mode;
    p.dx_px = 4;
    const auto fast = est::estimate_shift_map(v, p);
    const auto slow = sws::reference::estimate_shift_map_serial(v, p);
    EXPECT_EQ(fast, slow) << static_cast<int>(mode);
  }
}

TEST(ShiftMap, ThreadCountDoesNotMatter) {
  const auto v = small_volume(0.2, 9);
  est::OptimizationParams p;
  p.mode = est::LossMode::combined;
  p.dx_px = 4;
  omp_set_num_threads(1);
  const auto a = est::estimate_shift_map(v, p);
  for (int n : {2, 8}) {
    omp_set_num_threads(n);
    EXPECT_EQ(est::estimate_shift_map(v, p), a) << n << " threads";
  }
  omp_set_num_threads(1);
}

TEST(ShiftMap, ZeroGroupsAreInvalid) {
  auto v = small_volume(0.0, 1, 20, 4);
  for (int z = 0; z < v.Z; ++z) {
    for (double& s : v.trace(10, z)) s = 0.0;
  }
  est::OptimizationParams p;
  p.dx_px = 3;
  const auto shifts = est::estimate_shift_map(v, p);
  for (int z = 0; z < v.Z; ++z) {
    EXPECT_EQ(shifts(7, z), 0);
    EXPECT_EQ(shifts(10, z), 0);
    EXPECT_EQ(shifts(13, z), 0);
    EXPECT_GT(shifts(5, z), 0);
  }
  const auto map = est::shifts_to_sws(shifts, v, p);
  EXPECT_FALSE(map.is_valid(10, 0));
  EXPECT_TRUE(map.is_valid(5, 0));
}

}  // namespace
