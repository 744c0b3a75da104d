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

#ifndef SWS_VOLUME_IO_HPP
#define SWS_VOLUME_IO_HPP

#include <filesystem>
#include <map>
#include <string>

#include "sws/core.hpp"

// On-disk formats
// ---------------
// Volume: raw payload of little-endian float32, offset ((x*Z)+z)*N+n, plus a
//   sidecar "<payload>.meta" of "key = value" lines:
//     kind, X, Z, N, fs_hz, fsp_px_per_mm, axial_res_mm_per_px, dtype, order
// SWS map raw: same convention without the time axis (offset x*Z+z), invalid
//   cells stored as NaN; sidecar carries kind = sws_map, X, Z.
// SWS map CSV: one line per z, X comma-separated cells, "%#.6g", invalid cells empty.
// SWS map PGM: binary P5, width X, height Z, maxval 255, min-max scaled over
//   valid cells; invalid cells and zero-range maps are written as 0.
// Region mask: P5 PGM with 0/255 cells and a "# label=<inclusion|background>" comment.
namespace sws::io {

enum class MapFormat { csv, pgm, raw };

std::filesystem::path sidecar_path(const std::filesystem::path& payload);

DisplacementVolume load_volume(const std::filesystem::path& path);
void save_volume(const DisplacementVolume& vol, const std::filesystem::path& path);

void save_sws_map(const SwsMap& map, const std::filesystem::path& path, MapFormat format);
/// Picks the format from the extension (.csv, .pgm, anything else is raw).
void save_sws_map(const SwsMap& map, const std::filesystem::path& path);
MapFormat format_from_extension(const std::filesystem::path& path);

/// Reads raw (with sidecar) or CSV maps. PGM is write-only (lossy).
SwsMap load_sws_map(const std::filesystem::path& path);

void save_mask(const RegionMask& mask, const std::filesystem::path& path);
RegionMask load_mask(const std::filesystem::path& path);

/// Parses "key = value" lines; '#' starts a comment.
std::map<std::string, std::string> parse_sidecar(const std::filesystem::path& path);

}  // namespace sws::io

#endif  // SWS_VOLUME_IO_HPP
