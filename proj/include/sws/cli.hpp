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

#ifndef SWS_CLI_HPP
#define SWS_CLI_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "sws/pipeline.hpp"

namespace sws::cli {

enum class Subcommand { synth, clean, reconstruct, evaluate };

struct RunConfig {
  Subcommand subcommand = Subcommand::reconstruct;
  std::filesystem::path in;
  std::filesystem::path out;
  std::filesystem::path label;     ///< evaluate: truth map
  std::filesystem::path inc_mask;  ///< evaluate
  std::filesystem::path bg_mask;   ///< evaluate
  std::string preset;              ///< synth
  pipeline::Method method = pipeline::Method::td;
  pipeline::ReconstructParams params;
  double dx_mm = 0.5;              ///< converted to interpolated columns at run time
  int threads = 0;                 ///< 0: OpenMP default
  std::uint64_t seed = 1;
  std::optional<double> jitter_std;  ///< synth; fraction-free amplitude units
  std::optional<double> reflect_gain;
  std::optional<int> reflect_x_px;
  double mask_margin_mm = 1.0;     ///< synth: guard band between inclusion and background masks
};

/// Parses a full command line (argv[0] is the program name). Returns the exit
/// status to use when parsing ends the run (help, errors), otherwise nullopt.
std::optional<int> parse(int argc, const char* const* argv, RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Executes a parsed configuration. Prints a one-line summary on success.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// parse + run.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Interpolated-grid group separation for a given input lateral sampling.
int dx_px_from_mm(double dx_mm, double fsp_px_per_mm, int M);

}  // namespace sws::cli

#endif  // SWS_CLI_HPP
