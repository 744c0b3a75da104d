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

#ifndef SWS_CORE_HPP
#define SWS_CORE_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sws {

// Error hierarchy. Every failure the library reports derives from sws::Error.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or truncated file contents.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Numerically invalid data (NaN/Inf where finite values are required).
class DataError : public Error {
 public:
  using Error::Error;
};

/// A parameter violates its documented range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// A time-lateral plane could not be cleaned (not enough support for the line fit).
class CleaningError : public Error {
 public:
  using Error::Error;
};

/// API misuse, e.g. an empty region selection.
class UsageError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Dense 2-D field indexed (x, z), z fastest.
template <typename T>
class Grid2 {
 public:
  Grid2() = default;
  Grid2(int nx, int nz, T fill = T{})
      : nx_(nx), nz_(nz), v_(static_cast<std::size_t>(nx) * static_cast<std::size_t>(nz), fill) {}

  int nx() const { return nx_; }
  int nz() const { return nz_; }
  std::size_t size() const { return v_.size(); }

  T& operator()(int x, int z) { return v_[index(x, z)]; }
  const T& operator()(int x, int z) const { return v_[index(x, z)]; }

  std::span<T> values() { return v_; }
  std::span<const T> values() const { return v_; }

  bool operator==(const Grid2&) const = default;

 private:
  std::size_t index(int x, int z) const {
    return static_cast<std::size_t>(x) * static_cast<std::size_t>(nz_) + static_cast<std::size_t>(z);
  }

  int nx_ = 0;
  int nz_ = 0;
  std::vector<T> v_;
};

/// Displacement samples u(x, z, n) with sampling metadata.
///
/// Storage order is n fastest, then z, then x: offset = ((x * Z) + z) * N + n.
/// This is also the on-disk order, see volume_io.hpp.
struct DisplacementVolume {
  int X = 0;
  int Z = 0;
  int N = 0;
  double fs_hz = 0.0;                ///< temporal sampling frequency
  double fsp_px_per_mm = 0.0;        ///< lateral spatial sampling frequency
  double axial_res_mm_per_px = 0.0;
  std::vector<double> data;

  DisplacementVolume() = default;
  DisplacementVolume(int x, int z, int n, double fs, double fsp, double axial_res)
      : X(x), Z(z), N(n), fs_hz(fs), fsp_px_per_mm(fsp), axial_res_mm_per_px(axial_res),
        data(static_cast<std::size_t>(x) * static_cast<std::size_t>(z) * static_cast<std::size_t>(n), 0.0) {}

  std::size_t offset(int x, int z, int n) const {
    return (static_cast<std::size_t>(x) * static_cast<std::size_t>(Z) + static_cast<std::size_t>(z)) *
               static_cast<std::size_t>(N) +
           static_cast<std::size_t>(n);
  }
  double& at(int x, int z, int n) { return data[offset(x, z, n)]; }
  double at(int x, int z, int n) const { return data[offset(x, z, n)]; }

  /// The time signal at one (x, z) position.
  std::span<double> trace(int x, int z) { return {data.data() + offset(x, z, 0), static_cast<std::size_t>(N)}; }
  std::span<const double> trace(int x, int z) const {
    return {data.data() + offset(x, z, 0), static_cast<std::size_t>(N)};
  }

  bool operator==(const DisplacementVolume&) const = default;
};

/// Throws ParameterError on bad shape/metadata and DataError on the first non-finite sample.
/// The minimum shape 3 x 1 x 8 is what the estimators need.
void validate(const DisplacementVolume& vol);

/// validate() without the minimum-shape rule; used by file I/O.
void validate_storage(const DisplacementVolume& vol);

/// Estimated shear-wave-speed map in m/s. Entries with valid == 0 carry no estimate.
struct SwsMap {
  Grid2<double> speed;
  Grid2<std::uint8_t> valid;

  SwsMap() = default;
  SwsMap(int nx, int nz) : speed(nx, nz, 0.0), valid(nx, nz, 0) {}

  int nx() const { return speed.nx(); }
  int nz() const { return speed.nz(); }
  void set(int x, int z, double v) {
    speed(x, z) = v;
    valid(x, z) = 1;
  }
  void clear(int x, int z) {
    speed(x, z) = 0.0;
    valid(x, z) = 0;
  }
  bool is_valid(int x, int z) const { return valid(x, z) != 0; }
  std::size_t valid_count() const;
  /// Mean over valid entries, NaN when there are none.
  double valid_mean() const;

  bool operator==(const SwsMap&) const = default;
};

/// Ground-truth speed field (m/s) used by the phantom generator and for PSNR labels.
struct SpeedMap {
  Grid2<double> c;
  double fsp_px_per_mm = 0.0;
};

enum class RegionLabel { inclusion, background };

struct RegionMask {
  Grid2<std::uint8_t> mask;
  RegionLabel label = RegionLabel::inclusion;
};

/// Throws UsageError if the two masks overlap or differ in shape.
void check_disjoint(const RegionMask& a, const RegionMask& b);

}  // namespace sws

#endif  // SWS_CORE_HPP
