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

#include "sws/volume_io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace sws::io {
namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Shortest representation that parses back to the same double.
std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return {buf, res.ptr};
}

double parse_double(const std::map<std::string, std::string>& kv, const std::string& key) {
  auto it = kv.find(key);
  if (it == kv.end()) throw FormatError("sidecar is missing key '" + key + "'");
  double v = 0.0;
  const auto& s = it->second;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw FormatError("sidecar key '" + key + "' is not a number: " + s);
  }
  return v;
}

int parse_int(const std::map<std::string, std::string>& kv, const std::string& key) {
  auto it = kv.find(key);
  if (it == kv.end()) throw FormatError("sidecar is missing key '" + key + "'");
  int v = 0;
  const auto& s = it->second;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || v <= 0) {
    throw FormatError("sidecar key '" + key + "' is not a positive integer: " + s);
  }
  return v;
}

std::uint32_t to_le(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  return ((v & 0xFFU) << 24) | ((v & 0xFF00U) << 8) | ((v >> 8) & 0xFF00U) | (v >> 24);
}

void write_floats(const fs::path& path, const std::vector<float>& values) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  std::vector<std::uint32_t> words(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) words[i] = to_le(std::bit_cast<std::uint32_t>(values[i]));
  out.write(reinterpret_cast<const char*>(words.data()), static_cast<std::streamsize>(words.size() * 4));
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<float> read_floats(const fs::path& path, std::size_t count) {
  std::error_code ec;
  const auto actual = fs::file_size(path, ec);
  if (ec) throw FormatError("payload missing: " + path.string());
  const std::uintmax_t expected = count * 4U;
  if (actual != expected) {
    std::ostringstream os;
    os << "payload " << path.string() << " has " << actual << " bytes, expected " << expected;
    throw FormatError(os.str());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  std::vector<std::uint32_t> words(count);
  in.read(reinterpret_cast<char*>(words.data()), static_cast<std::streamsize>(expected));
  if (!in) throw FormatError("short read on " + path.string());
  std::vector<float> values(count);
  for (std::size_t i = 0; i < count; ++i) values[i] = std::bit_cast<float>(to_le(words[i]));
  return values;
}

void write_text(const fs::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << body;
  if (!out) throw IoError("write failed: " + path.string());
}

void check_map_finite(const SwsMap& map) {
  for (int x = 0; x < map.nx(); ++x) {
    for (int z = 0; z < map.nz(); ++z) {
      if (map.is_valid(x, z) && !std::isfinite(map.speed(x, z))) {
        std::ostringstream os;
        os << "non-finite map value at valid cell (x=" << x << ", z=" << z << ")";
        throw DataError(os.str());
      }
    }
  }
}

std::string pgm_header(int w, int h, const std::string& comment) {
  std::ostringstream os;
  os << "P5\n";
  if (!comment.empty()) os << "# " << comment << "\n";
  os << w << " " << h << "\n255\n";
  return os.str();
}

}  // namespace

fs::path sidecar_path(const fs::path& payload) {
  fs::path p = payload;
  p += ".meta";
  return p;
}

std::map<std::string, std::string> parse_sidecar(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("sidecar missing: " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

DisplacementVolume load_volume(const fs::path& path) {
  const auto kv = parse_sidecar(sidecar_path(path));
  if (auto it = kv.find("kind"); it != kv.end() && it->second != "volume") {
    throw FormatError("sidecar kind is '" + it->second + "', expected 'volume'");
  }
  if (auto it = kv.find("dtype"); it != kv.end() && it->second != "float32le") {
    throw FormatError("unsupported dtype '" + it->second + "'");
  }
  DisplacementVolume vol(parse_int(kv, "X"), parse_int(kv, "Z"), parse_int(kv, "N"), parse_double(kv, "fs_hz"),
                         parse_double(kv, "fsp_px_per_mm"), parse_double(kv, "axial_res_mm_per_px"));
  const auto values = read_floats(path, vol.data.size());
  std::copy(values.begin(), values.end(), vol.data.begin());
  validate_storage(vol);
  return vol;
}

void save_volume(const DisplacementVolume& vol, const fs::path& path) {
  validate_storage(vol);
  std::vector<float> values(vol.data.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = static_cast<float>(vol.data[i]);
    if (!std::isfinite(values[i])) throw DataError("sample overflows float32 at payload index " + std::to_string(i));
  }
  std::ostringstream meta;
  meta << "# swsopt displacement volume\n"
       << "kind = volume\n"
       << "X = " << vol.X << "\n"
       << "Z = " << vol.Z << "\n"
       << "N = " << vol.N << "\n"
       << "fs_hz = " << format_double(vol.fs_hz) << "\n"
       << "fsp_px_per_mm = " << format_double(vol.fsp_px_per_mm) << "\n"
       << "axial_res_mm_per_px = " << format_double(vol.axial_res_mm_per_px) << "\n"
       << "dtype = float32le\n"
       << "order = x,z,n\n";
  write_floats(path, values);
  write_text(sidecar_path(path), meta.str());
}

MapFormat format_from_extension(const fs::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".csv") return MapFormat::csv;
  if (ext == ".pgm") return MapFormat::pgm;
  return MapFormat::raw;
}

void save_sws_map(const SwsMap& map, const fs::path& path) { save_sws_map(map, path, format_from_extension(path)); }

void save_sws_map(const SwsMap& map, const fs::path& path, MapFormat format) {
  check_map_finite(map);
  const int nx = map.nx();
  const int nz = map.nz();
  switch (format) {
    case MapFormat::csv: {
      std::string body;
      char buf[64];
      for (int z = 0; z < nz; ++z) {
        for (int x = 0; x < nx; ++x) {
          if (x > 0) body += ',';
          if (map.is_valid(x, z)) {
            std::snprintf(buf, sizeof(buf), "%#.6g", map.speed(x, z));
            body += buf;
          }
        }
        body += '\n';
      }
      write_text(path, body);
      break;
    }
    case MapFormat::pgm: {
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (int x = 0; x < nx; ++x) {
        for (int z = 0; z < nz; ++z) {
          if (!map.is_valid(x, z)) continue;
          lo = std::min(lo, map.speed(x, z));
          hi = std::max(hi, map.speed(x, z));
        }
      }
      const double range = hi - lo;
      std::string body = pgm_header(nx, nz, "");
      for (int z = 0; z < nz; ++z) {
        for (int x = 0; x < nx; ++x) {
          unsigned char px = 0;
          if (map.is_valid(x, z) && range > 0.0) {
            px = static_cast<unsigned char>(std::lround(255.0 * (map.speed(x, z) - lo) / range));
          }
          body += static_cast<char>(px);
        }
      }
      write_text(path, body);
      break;
    }
    case MapFormat::raw: {
      std::vector<float> values(static_cast<std::size_t>(nx) * static_cast<std::size_t>(nz));
      for (int x = 0; x < nx; ++x) {
        for (int z = 0; z < nz; ++z) {
          values[static_cast<std::size_t>(x) * nz + z] = map.is_valid(x, z)
                                                             ? static_cast<float>(map.speed(x, z))
                                                             : std::numeric_limits<float>::quiet_NaN();
        }
      }
      std::ostringstream meta;
      meta << "# swsopt shear wave speed map (m/s), NaN = invalid\n"
           << "kind = sws_map\n"
           << "X = " << nx << "\n"
           << "Z = " << nz << "\n"
           << "dtype = float32le\n"
           << "order = x,z\n";
      write_floats(path, values);
      write_text(sidecar_path(path), meta.str());
      break;
    }
  }
}

SwsMap load_sws_map(const fs::path& path) {
  const auto format = format_from_extension(path);
  if (format == MapFormat::pgm) throw FormatError("PGM maps are write-only");
  if (format == MapFormat::raw) {
    const auto kv = parse_sidecar(sidecar_path(path));
    if (auto it = kv.find("kind"); it == kv.end() || it->second != "sws_map") {
      throw FormatError("sidecar does not describe an sws_map");
    }
    const int nx = parse_int(kv, "X");
    const int nz = parse_int(kv, "Z");
    const auto values = read_floats(path, static_cast<std::size_t>(nx) * static_cast<std::size_t>(nz));
    SwsMap map(nx, nz);
    for (int x = 0; x < nx; ++x) {
      for (int z = 0; z < nz; ++z) {
        const float v = values[static_cast<std::size_t>(x) * nz + z];
        if (std::isnan(v)) continue;
        if (!std::isfinite(v)) throw DataError("infinite map value in " + path.string());
        map.set(x, z, v);
      }
    }
    return map;
  }

  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      cells.push_back(trim(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    rows.push_back(std::move(cells));
  }
  if (rows.empty()) throw FormatError("empty CSV map: " + path.string());
  const int nz = static_cast<int>(rows.size());
  const int nx = static_cast<int>(rows.front().size());
  SwsMap map(nx, nz);
  for (int z = 0; z < nz; ++z) {
    if (static_cast<int>(rows[z].size()) != nx) throw FormatError("ragged CSV row " + std::to_string(z));
    for (int x = 0; x < nx; ++x) {
      const auto& cell = rows[z][x];
      if (cell.empty()) continue;
      double v = 0.0;
      auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size()) {
        throw FormatError("bad CSV cell '" + cell + "'");
      }
      map.set(x, z, v);
    }
  }
  return map;
}

void save_mask(const RegionMask& mask, const fs::path& path) {
  const int nx = mask.mask.nx();
  const int nz = mask.mask.nz();
  std::string body =
      pgm_header(nx, nz, std::string("label=") + (mask.label == RegionLabel::inclusion ? "inclusion" : "background"));
  for (int z = 0; z < nz; ++z) {
    for (int x = 0; x < nx; ++x) body += static_cast<char>(mask.mask(x, z) != 0 ? 255 : 0);
  }
  write_text(path, body);
}

RegionMask load_mask(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  std::string magic;
  in >> magic;
  if (magic != "P5") throw FormatError("mask is not a binary PGM: " + path.string());
  RegionMask mask;
  // Header tokens, skipping comments; the label lives in a comment.
  std::vector<int> dims;
  while (dims.size() < 3) {
    in >> std::ws;
    if (in.peek() == '#') {
      std::string comment;
      std::getline(in, comment);
      if (comment.find("label=background") != std::string::npos) mask.label = RegionLabel::background;
      continue;
    }
    int v = 0;
    if (!(in >> v)) throw FormatError("bad PGM header: " + path.string());
    dims.push_back(v);
  }
  if (dims[2] != 255 || dims[0] <= 0 || dims[1] <= 0) throw FormatError("unsupported PGM header: " + path.string());
  in.get();  // single whitespace after maxval
  const int nx = dims[0];
  const int nz = dims[1];
  std::vector<char> px(static_cast<std::size_t>(nx) * static_cast<std::size_t>(nz));
  in.read(px.data(), static_cast<std::streamsize>(px.size()));
  if (!in) throw FormatError("short PGM payload: " + path.string());
  mask.mask = Grid2<std::uint8_t>(nx, nz, 0);
  for (int z = 0; z < nz; ++z) {
    for (int x = 0; x < nx; ++x) {
      mask.mask(x, z) = px[static_cast<std::size_t>(z) * nx + x] != 0 ? 1 : 0;
    }
  }
  return mask;
}

}  // namespace sws::io
