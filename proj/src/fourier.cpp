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

#include "sws/fourier.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <utility>

#include "sws/core.hpp"

namespace sws::fourier {
namespace {

enum class Kind { r2c, c2r };

// FFTW's planner is not thread-safe, execution is. Plans live for the process.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(Kind kind, int n) {
    std::lock_guard<std::mutex> lock(mu_);
    auto key = std::make_pair(kind, n);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;

    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    double* real = fftw_alloc_real(static_cast<std::size_t>(n));
    fftw_complex* spec = fftw_alloc_complex(static_cast<std::size_t>(n / 2 + 1));
    fftw_plan p = kind == Kind::r2c ? fftw_plan_dft_r2c_1d(n, real, spec, flags)
                                    : fftw_plan_dft_c2r_1d(n, spec, real, flags);
    fftw_free(real);
    fftw_free(spec);
    if (p == nullptr) throw Error("fftw: planning failed for length " + std::to_string(n));
    plans_.emplace(key, p);
    return p;
  }

 private:
  PlanCache() = default;
  std::mutex mu_;
  std::map<std::pair<Kind, int>, fftw_plan> plans_;
};

}  // namespace

std::vector<cplx> rfft_padded(std::span<const double> x, int n) {
  if (n < static_cast<int>(x.size()) || n < 1) throw ParameterError("rfft_padded: bad length");
  std::vector<double> in(static_cast<std::size_t>(n), 0.0);
  std::copy(x.begin(), x.end(), in.begin());
  std::vector<cplx> out(static_cast<std::size_t>(n / 2 + 1));
  fftw_execute_dft_r2c(PlanCache::instance().get(Kind::r2c, n), in.data(),
                       reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

std::vector<cplx> rfft(std::span<const double> x) { return rfft_padded(x, static_cast<int>(x.size())); }

std::vector<double> irfft(std::span<const cplx> spectrum, int n) {
  if (static_cast<int>(spectrum.size()) != n / 2 + 1) throw ParameterError("irfft: spectrum size mismatch");
  // c2r overwrites its input.
  std::vector<cplx> scratch(spectrum.begin(), spectrum.end());
  std::vector<double> out(static_cast<std::size_t>(n));
  fftw_execute_dft_c2r(PlanCache::instance().get(Kind::c2r, n), reinterpret_cast<fftw_complex*>(scratch.data()),
                       out.data());
  const double scale = 1.0 / n;
  for (double& v : out) v *= scale;
  return out;
}

std::vector<double> upsample(std::span<const double> x, int factor) {
  if (factor < 1) throw ParameterError("upsample: factor must be >= 1");
  if (factor == 1 || x.empty()) return {x.begin(), x.end()};

  const int n = static_cast<int>(x.size());
  const int out_len = n * factor;
  const auto spec = rfft(x);
  std::vector<cplx> padded(static_cast<std::size_t>(out_len / 2 + 1), cplx{});
  const int half = n / 2;
  const int pass = (n % 2 == 0) ? half : half + 1;  // bins strictly below Nyquist
  for (int k = 0; k < pass; ++k) padded[k] = spec[k] * static_cast<double>(factor);
  if (n % 2 == 0) {
    // Split the Nyquist bin between +N/2 and -N/2; the c2r transform supplies
    // the Hermitian partner.
    padded[half] = spec[half] * (0.5 * factor);
  }
  return irfft(padded, out_len);
}

PaddedSpectrum padded_spectrum(std::span<const double> x) {
  const int len = static_cast<int>(x.size());
  return {len, rfft_padded(x, 2 * len)};
}

std::vector<double> xcorr_forward(const PaddedSpectrum& a, const PaddedSpectrum& b) {
  if (a.len != b.len) throw ParameterError("xcorr: length mismatch");
  std::vector<cplx> prod(a.bins.size());
  for (std::size_t k = 0; k < prod.size(); ++k) prod[k] = std::conj(a.bins[k]) * b.bins[k];
  auto full = irfft(prod, 2 * a.len);
  full.resize(static_cast<std::size_t>(a.len));
  return full;
}

std::vector<double> xcorr_forward(std::span<const double> a, std::span<const double> b) {
  return xcorr_forward(padded_spectrum(a), padded_spectrum(b));
}

std::vector<double> xcorr_full(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ParameterError("xcorr: length mismatch");
  const int len = static_cast<int>(a.size());
  const auto sa = padded_spectrum(a);
  const auto sb = padded_spectrum(b);
  std::vector<cplx> prod(sa.bins.size());
  for (std::size_t k = 0; k < prod.size(); ++k) prod[k] = std::conj(sa.bins[k]) * sb.bins[k];
  const auto circ = irfft(prod, 2 * len);
  std::vector<double> out(static_cast<std::size_t>(2 * len - 1));
  for (int tau = -(len - 1); tau < len; ++tau) {
    const int src = tau >= 0 ? tau : 2 * len + tau;
    out[static_cast<std::size_t>(tau + len - 1)] = circ[static_cast<std::size_t>(src)];
  }
  return out;
}

void unwrap(std::span<double> phase) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  if (phase.empty()) return;
  double prev_raw = phase[0];
  for (std::size_t i = 1; i < phase.size(); ++i) {
    const double raw = phase[i];
    phase[i] = phase[i - 1] + std::remainder(raw - prev_raw, two_pi);
    prev_raw = raw;
  }
}

}  // namespace sws::fourier
