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

#include <cmath>
#include <limits>
#include <random>

#include "sws/metrics.hpp"

namespace {

namespace mt = sws::metrics;
using sws::Grid2;
using sws::RegionLabel;
using sws::RegionMask;
using sws::SwsMap;

struct TwoRegions {
  SwsMap map{4, 1};
  RegionMask inc{Grid2<std::uint8_t>(4, 1, 0), RegionLabel::inclusion};
  RegionMask bg{Grid2<std::uint8_t>(4, 1, 0), RegionLabel::background};
};

TwoRegions regions(double i0, double i1, double b0, double b1) {
  TwoRegions r;
  r.map.set(0, 0, i0);
  r.map.set(1, 0, i1);
  r.map.set(2, 0, b0);
  r.map.set(3, 0, b1);
  r.inc.mask(0, 0) = r.inc.mask(1, 0) = 1;
  r.bg.mask(2, 0) = r.bg.mask(3, 0) = 1;
  return r;
}

TEST(RegionStats, Examples) {
  SwsMap m(3, 2);
  RegionMask all{Grid2<std::uint8_t>(3, 2, 1), RegionLabel::inclusion};
  for (int x = 0; x < 3; ++x) {
    for (int z = 0; z < 2; ++z) m.set(x, z, 2.0);
  }
  const auto c = mt::region_stats(m, all);
  EXPECT_EQ(c.mean, 2.0);
  EXPECT_EQ(c.std, 0.0);
  EXPECT_EQ(c.count, 6);
  const auto r = regions(1.0, 3.0, 5.0, 5.0);
  const auto s = mt::region_stats(r.map, r.inc);
  EXPECT_NEAR(s.mean, 2.0, 1e-15);
  EXPECT_NEAR(s.std, 1.0, 1e-15);
}

TEST(RegionStats, SkipsInvalidAndRejectsEmpty) {
  auto r = regions(1.0, 3.0, 5.0, 7.0);
  r.map.clear(1, 0);
  EXPECT_EQ(mt::region_stats(r.map, r.inc).count, 1);
  r.map.clear(0, 0);
  EXPECT_THROW(mt::region_stats(r.map, r.inc), sws::UsageError);
  RegionMask wrong{Grid2<std::uint8_t>(2, 2, 1), RegionLabel::inclusion};
  EXPECT_THROW(mt::region_stats(r.map, wrong), sws::UsageError);
}

TEST(Cnr, HandExample) {
  // Inclusion mean 4, std 0.3; background mean 2, std 0.4.
  const auto r = regions(3.7, 4.3, 1.6, 2.4);
  EXPECT_NEAR(mt::cnr(r.map, r.inc, r.bg), 20.0 * std::log10(2.0 / 0.5), 1e-9);
  EXPECT_NEAR(mt::cnr(r.map, r.inc, r.bg), 12.041199826559248, 1e-9);
  EXPECT_NEAR(mt::cnr({4.0, 0.3, 2}, {2.0, 0.4, 2}), 12.041199826559248, 1e-9);
}

TEST(Cnr, SymmetricAndSentinels) {
  const auto r = regions(3.7, 4.3, 1.6, 2.4);
  EXPECT_EQ(mt::cnr(r.map, r.inc, r.bg), mt::cnr(r.map, r.bg, r.inc));
  const auto same = regions(2.0, 3.0, 2.0, 3.0);
  EXPECT_EQ(mt::cnr(same.map, same.inc, same.bg), -std::numeric_limits<double>::infinity());
  const auto flat = regions(3.0, 3.0, 2.0, 2.0);
  EXPECT_EQ(mt::cnr(flat.map, flat.inc, flat.bg), std::numeric_limits<double>::infinity());
}

TEST(Psnr, IdenticalIsInfinite) {
  SwsMap m(2, 2);
  sws::SpeedMap label{Grid2<double>(2, 2, 0.0), 5.0};
  const double vals[4] = {1.0, 2.0, 3.0, 4.0};
  for (int i = 0; i < 4; ++i) {
    m.set(i / 2, i % 2, vals[i]);
    label.c(i / 2, i % 2) = vals[i];
  }
  EXPECT_EQ(mt::psnr(m, label), std::numeric_limits<double>::infinity());
}

TEST(Psnr, HandExampleTwentyDb) {
  // Normalized label {1.0, 0.9}, normalized map {0.9, 1.0}: |difference| 0.1 everywhere.
  SwsMap m(2, 1);
  m.set(0, 0, 0.9 * 2.5);
  m.set(1, 0, 1.0 * 2.5);
  sws::SpeedMap label{Grid2<double>(2, 1, 0.0), 5.0};
  label.c(0, 0) = 1.0 * 3.0;
  label.c(1, 0) = 0.9 * 3.0;
  EXPECT_NEAR(mt::psnr(m, label), 20.0, 1e-9);
}

TEST(Psnr, HandExampleWithInvalidPixel) {
  // Valid pixels: normalized map {1, 0.5}, label {1, 0.25} -> mse = 0.03125.
  SwsMap m(3, 1);
  m.set(0, 0, 4.0);
  m.set(1, 0, 2.0);
  sws::SpeedMap label{Grid2<double>(3, 1, 0.0), 5.0};
  label.c(0, 0) = 8.0;
  label.c(1, 0) = 2.0;
  label.c(2, 0) = 1.0;
  EXPECT_NEAR(mt::psnr(m, label), 10.0 * std::log10(1.0 / 0.03125), 1e-9);
}

TEST(Metrics, InvariantUnderPositiveRescaling) {
  std::mt19937 rng(21);
  std::uniform_real_distribution<double> u(1.0, 4.0);
  SwsMap m(6, 5);
  sws::SpeedMap label{Grid2<double>(6, 5, 0.0), 5.0};
  RegionMask inc{Grid2<std::uint8_t>(6, 5, 0), RegionLabel::inclusion};
  RegionMask bg{Grid2<std::uint8_t>(6, 5, 0), RegionLabel::background};
  for (int x = 0; x < 6; ++x) {
    for (int z = 0; z < 5; ++z) {
      m.set(x, z, u(rng));
      label.c(x, z) = u(rng);
      (x < 3 ? inc : bg).mask(x, z) = 1;
    }
  }
  for (double s : {0.5, 3.0, 17.25}) {
    SwsMap ms = m;
    sws::SpeedMap ls = label;
    for (double& v : ms.speed.values()) v *= s;
    for (double& v : ls.c.values()) v *= s;
    EXPECT_NEAR(mt::psnr(ms, ls), mt::psnr(m, label), 1e-9);
    EXPECT_NEAR(mt::cnr(ms, inc, bg), mt::cnr(m, inc, bg), 1e-9);
  }
}

SwsMap filled(int nx, int nz, double v) {
  SwsMap m(nx, nz);
  for (int x = 0; x < nx; ++x) {
    for (int z = 0; z < nz; ++z) m.set(x, z, v);
  }
  return m;
}

TEST(Median, ConstantUnchanged) {
  const auto m = filled(7, 6, 2.5);
  EXPECT_EQ(mt::median_filter(m, 5), m);
}

TEST(Median, SpikeRemoved) {
  auto m = filled(9, 9, 1.0);
  m.set(4, 4, 50.0);
  EXPECT_EQ(mt::median_filter(m, 5), filled(9, 9, 1.0));
}

TEST(Median, OutputWithinInputRange) {
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(-3.0, 8.0);
  SwsMap m(12, 10);
  for (int x = 0; x < 12; ++x) {
    for (int z = 0; z < 10; ++z) {
      if ((x + z) % 7 != 0) m.set(x, z, u(rng));
    }
  }
  double lo = 1e300;
  double hi = -1e300;
  for (int x = 0; x < 12; ++x) {
    for (int z = 0; z < 10; ++z) {
      if (m.is_valid(x, z)) {
        lo = std::min(lo, m.speed(x, z));
        hi = std::max(hi, m.speed(x, z));
      }
    }
  }
  const auto f = mt::median_filter(m, 5);
  for (int x = 0; x < 12; ++x) {
    for (int z = 0; z < 10; ++z) {
      if (!f.is_valid(x, z)) continue;
      EXPECT_GE(f.speed(x, z), lo);
      EXPECT_LE(f.speed(x, z), hi);
    }
  }
}

TEST(Median, FillsInvalidOnlyWithThreeNeighbours) {
  SwsMap m(5, 5);
  m.set(0, 0, 1.0);
  m.set(0, 1, 2.0);
  m.set(4, 4, 3.0);
  const auto f = mt::median_filter(m, 3);
  EXPECT_TRUE(f.is_valid(1, 1) == false);  // two valid neighbours
  m.set(1, 0, 4.0);
  const auto g = mt::median_filter(m, 3);
  ASSERT_TRUE(g.is_valid(1, 1));
  EXPECT_EQ(g.speed(1, 1), 2.0);
  EXPECT_FALSE(g.is_valid(3, 3));
}

TEST(Median, EvenWindowRejected) { EXPECT_THROW(mt::median_filter(filled(3, 3, 1.0), 4), sws::ParameterError); }

TEST(Median, IdempotentOnStepMaps) {
  for (int step = 1; step < 11; ++step) {
    for (bool lateral : {true, false}) {
      SwsMap m(12, 11);
      for (int x = 0; x < 12; ++x) {
        for (int z = 0; z < 11; ++z) m.set(x, z, ((lateral ? x : z) < step) ? 2.0 : 3.5);
      }
      const auto once = mt::median_filter(m, 5);
      EXPECT_EQ(mt::median_filter(once, 5), once) << step << " " << lateral;
    }
  }
}

}  // namespace
