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

#include <benchmark/benchmark.h>

#include "sws/estimators.hpp"
#include "sws/phantom.hpp"
#include "sws/pipeline.hpp"
#include "sws/reference.hpp"

namespace {

const sws::DisplacementVolume& volume() {
  static const sws::DisplacementVolume v = [] {
    auto p = sws::phantom::make_preset("inc45-d10.4");
    p.noise.jitter_std = 0.1;
    sws::pipeline::ReconstructParams rp;
    return sws::pipeline::prepare(sws::phantom::render(p), rp, true).volume;
  }();
  return v;
}

sws::DisplacementVolume rows(int Z) {
  const auto& v = volume();
  sws::DisplacementVolume out(v.X, Z, v.N, v.fs_hz, v.fsp_px_per_mm, v.axial_res_mm_per_px);
  for (int x = 0; x < v.X; ++x) {
    for (int z = 0; z < Z; ++z) {
      const auto src = v.trace(x, z + 30);
      std::copy(src.begin(), src.end(), out.trace(x, z).begin());
    }
  }
  return out;
}

sws::estimators::OptimizationParams params(std::int64_t mode) {
  sws::estimators::OptimizationParams p;
  p.mode = static_cast<sws::estimators::LossMode>(mode);
  return p;
}

void BM_SerialReference(benchmark::State& state) {
  const auto v = rows(4);
  const auto p = params(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sws::reference::estimate_shift_map_serial(v, p));
  state.SetItemsProcessed(state.iterations() * v.X * v.Z);
}

void BM_CachedParallel(benchmark::State& state) {
  const auto v = rows(4);
  const auto p = params(state.range(0));
  sws::pipeline::ScopedThreads t(static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(sws::estimators::estimate_shift_map(v, p));
  state.SetItemsProcessed(state.iterations() * v.X * v.Z);
}

}  // namespace

// range(0): 0 = td, 1 = pd, 2 = combined; range(1): threads.
BENCHMARK(BM_SerialReference)->Arg(0)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CachedParallel)
    ->ArgsProduct({{0, 1, 2}, {1, 2, 4}})
    ->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
