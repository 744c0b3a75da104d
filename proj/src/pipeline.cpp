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

#include "sws/pipeline.hpp"

#include <omp.h>

#include "sws/metrics.hpp"

namespace sws::pipeline {

namespace {

struct MethodName {
  Method m;
  const char* name;
};
constexpr MethodName kNames[] = {{Method::ttp, "ttp"}, {Method::ttp_avg, "ttp-avg"}, {Method::xcorr, "xcorr"},
                                  {Method::fdsm, "fdsm"}, {Method::td, "td"},           {Method::pd, "pd"},
                                  {Method::combined, "combined"}};

}  // namespace

Method parse_method(const std::string& name) {
  for (const auto& e : kNames) {
    if (name == e.name) return e.m;
  }
  throw UsageError("unknown method '" + name + "' (expected ttp, ttp-avg, xcorr, fdsm, td, pd or combined)");
}

std::string method_name(Method m) {
  for (const auto& e : kNames) {
    if (m == e.m) return e.name;
  }
  return "?";
}

bool is_constrained(Method m) { return m == Method::td || m == Method::pd || m == Method::combined; }

preprocess::LateralRange resolve_roi(const DisplacementVolume& vol, const ReconstructParams& p) {
  auto roi = p.cleaning.roi_x;
  if (roi.width() == 0) roi = preprocess::roi_excluding_mm(vol.X, vol.fsp_px_per_mm, p.blind_mm);
  if (roi.lo < 0 || roi.hi > vol.X || roi.width() < 2) throw ParameterError("ROI outside the volume or too narrow");
  return roi;
}

PreparedVolume prepare(const DisplacementVolume& vol, const ReconstructParams& p, bool clean) {
  validate(vol);
  if (p.M < 1) throw ParameterError("interpolation factor M must be >= 1");
  PreparedVolume out;
  out.roi = resolve_roi(vol, p);
  out.cleaned = clean;
  auto cp = p.cleaning;
  if (clean && p.clean_before_interp) {
    cp.roi_x = out.roi;
    auto res = preprocess::tl_clean(vol, cp);
    out.slice_fallback = std::move(res.slice_fallback);
    out.volume = preprocess::lateral_interpolate(res.volume, p.M);
    return out;
  }
  const preprocess::LateralRange fine{out.roi.lo * p.M, (out.roi.hi - 1) * p.M + 1};
  auto interp = preprocess::lateral_interpolate(vol, p.M);
  if (clean) {
    cp.roi_x = fine;
    auto res = preprocess::tl_clean(interp, cp);
    out.slice_fallback = std::move(res.slice_fallback);
    out.volume = std::move(res.volume);
  } else {
    out.volume = preprocess::crop_lateral(interp, fine);
  }
  return out;
}

SwsMap estimate(const DisplacementVolume& prepared, Method m, const ReconstructParams& p) {
  switch (m) {
    case Method::ttp:
      return baselines::estimate_ttp(prepared, p.base);
    case Method::ttp_avg:
      return baselines::estimate_ttp_avg(prepared, p.base);
    case Method::xcorr:
      return baselines::estimate_xcorr(prepared, p.base);
    case Method::fdsm:
      return baselines::estimate_fdsm(prepared, p.base);
    case Method::td:
    case Method::pd:
    case Method::combined: {
      auto op = p.opt;
      op.mode = m == Method::td ? estimators::LossMode::td
                : m == Method::pd ? estimators::LossMode::pd
                                  : estimators::LossMode::combined;
      return estimators::estimate_map(prepared, op);
    }
  }
  throw UsageError("unhandled method");
}

SwsMap decimate(const SwsMap& fine, preprocess::LateralRange roi, int M, int X) {
  SwsMap out(X, fine.nz());
  for (int x = roi.lo; x < roi.hi; ++x) {
    const int j = (x - roi.lo) * M;
    if (j >= fine.nx()) break;
    for (int z = 0; z < fine.nz(); ++z) {
      if (fine.is_valid(j, z)) out.set(x, z, fine.speed(j, z));
    }
  }
  return out;
}

Reconstruction run_method(const DisplacementVolume& vol, Method m, const ReconstructParams& p) {
  const bool clean = p.clean == CleanMode::always || (p.clean == CleanMode::automatic && is_constrained(m));
  if (is_constrained(m)) {
    auto op = p.opt;
    op.mode = m == Method::td ? estimators::LossMode::td
              : m == Method::pd ? estimators::LossMode::pd
                                : estimators::LossMode::combined;
    op.check(vol.fs_hz);
  } else {
    p.base.check();
  }
  auto prep = prepare(vol, p, clean);
  Reconstruction r;
  r.roi = prep.roi;
  r.cleaned = prep.cleaned;
  r.slice_fallback = std::move(prep.slice_fallback);
  r.map = decimate(estimate(prep.volume, m, p), prep.roi, p.M, vol.X);
  if (p.median_w > 1) r.map = metrics::median_filter(r.map, p.median_w);
  return r;
}

SwsMap reconstruct(const DisplacementVolume& vol, const preprocess::CleaningParams& cp,
                   const estimators::OptimizationParams& op, int M, int median_w) {
  ReconstructParams p;
  p.cleaning = cp;
  p.opt = op;
  p.M = M;
  p.median_w = median_w;
  const Method m = op.mode == estimators::LossMode::td   ? Method::td
                   : op.mode == estimators::LossMode::pd ? Method::pd
                                                         : Method::combined;
  return run_method(vol, m, p).map;
}

ScopedThreads::ScopedThreads(int n) {
  if (n > 0) {
    previous_ = omp_get_max_threads();
    omp_set_num_threads(n);
    active_ = true;
  }
}

ScopedThreads::~ScopedThreads() {
  if (active_) omp_set_num_threads(previous_);
}

}  // namespace sws::pipeline
