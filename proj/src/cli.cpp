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

#include "sws/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

#include "CLI11.hpp"
#include "sws/metrics.hpp"
#include "sws/phantom.hpp"
#include "sws/volume_io.hpp"

namespace sws::cli {

namespace {

bool parse_pair(const std::string& s, int& a, int& b) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) return false;
  try {
    std::size_t used_a = 0;
    std::size_t used_b = 0;
    a = std::stoi(s.substr(0, comma), &used_a);
    b = std::stoi(s.substr(comma + 1), &used_b);
    return used_a == comma && used_b == s.size() - comma - 1;
  } catch (const std::exception&) {
    return false;
  }
}

struct RawFlags {
  std::string kernel = "5,5";
  std::string roi_x;
  std::string method = "td";
  std::string clean = "auto";
};

void add_estimation_flags(CLI::App* app, RunConfig& cfg, RawFlags& raw) {
  auto& p = cfg.params;
  app->add_option("--dx-mm", cfg.dx_mm, "group separation in mm")->capture_default_str();
  app->add_option("--kernel", raw.kernel, "kernel extents l,a (odd)")->capture_default_str();
  app->add_option("--sigma-w", p.opt.sigma_w, "kernel Gaussian std, pixels")->capture_default_str();
  app->add_option("--upsample", p.opt.L, "temporal interpolation order L")->capture_default_str();
  app->add_option("--fsig-hz", p.opt.f_sig_hz, "significant-frequency cutoff")->capture_default_str();
  app->add_option("--gamma1", p.opt.gamma1, "time-domain loss weight (combined)")->capture_default_str();
  app->add_option("--gamma2", p.opt.gamma2, "phase loss weight (combined)")->capture_default_str();
  app->add_option("--median", p.median_w, "median post-filter window, 1 disables")->capture_default_str();
  app->add_option("--fit-halfwidth", p.base.fit_halfwidth_px, "TTP regression half window, columns")
      ->capture_default_str();
  app->add_option("--theta-lo", p.base.theta_lo, "FDSM speed grid start, m/s")->capture_default_str();
  app->add_option("--theta-hi", p.base.theta_hi, "FDSM speed grid end, m/s")->capture_default_str();
  app->add_option("--theta-step", p.base.theta_step, "FDSM speed grid step, m/s")->capture_default_str();
  app->add_option("--method", raw.method, "ttp|ttp-avg|xcorr|fdsm|td|pd|combined")
      ->check(CLI::IsMember({"ttp", "ttp-avg", "xcorr", "fdsm", "td", "pd", "combined"}))
      ->capture_default_str();
}

void add_cleaning_flags(CLI::App* app, RunConfig& cfg, RawFlags& raw) {
  auto& p = cfg.params;
  app->add_option("--interp", p.M, "lateral interpolation factor M")->capture_default_str();
  app->add_option("--tsh", p.cleaning.t_sh, "peak pruning threshold, samples^2")->capture_default_str();
  app->add_option("--q", p.cleaning.q, "support threshold on normalized amplitude")->capture_default_str();
  app->add_option("--rho", p.cleaning.rho, "mask spread, samples")->capture_default_str();
  app->add_option("--r", p.cleaning.r, "number of piecewise lines")->capture_default_str();
  app->add_option("--roi-x", raw.roi_x, "lateral ROI lo,hi in input columns (default skips 3 mm)");
  app->add_option("--blind-mm", p.blind_mm, "blind zone skipped by the default ROI")->capture_default_str();
  app->add_option("--clean", raw.clean, "auto|on|off")->check(CLI::IsMember({"auto", "on", "off"}))
      ->capture_default_str();
  app->add_flag("--clean-first", p.clean_before_interp, "clean before lateral interpolation");
}

void add_common(CLI::App* app, RunConfig& cfg) {
  app->add_option("--threads", cfg.threads, "OpenMP threads (env SWS_THREADS)");
}

// Parse-time invariants; every violation is reported, not just the first.
std::vector<std::string> finish(RunConfig& cfg, const RawFlags& raw) {
  std::vector<std::string> errors;
  auto& p = cfg.params;
  int l = 0;
  int a = 0;
  if (!parse_pair(raw.kernel, l, a) || l < 1 || a < 1 || l % 2 == 0 || a % 2 == 0) {
    errors.push_back("--kernel: expected two odd positive integers 'l,a', got '" + raw.kernel + "'");
  } else {
    p.opt.l = l;
    p.opt.a = a;
  }
  if (!raw.roi_x.empty()) {
    int lo = 0;
    int hi = 0;
    if (!parse_pair(raw.roi_x, lo, hi) || lo < 0 || hi - lo < 2) {
      errors.push_back("--roi-x: expected 'lo,hi' with 0 <= lo and hi - lo >= 2, got '" + raw.roi_x + "'");
    } else {
      p.cleaning.roi_x = {lo, hi};
    }
  }
  return errors;
}


std::vector<std::string> check_numbers(const RunConfig& cfg) {
  std::vector<std::string> errors;
  const auto& p = cfg.params;
  if (!(cfg.dx_mm > 0.0)) errors.push_back("--dx-mm must be > 0");
  if (!(p.opt.sigma_w > 0.0)) errors.push_back("--sigma-w must be > 0");
  if (p.opt.L < 1) errors.push_back("--upsample must be >= 1");
  if (!(p.opt.f_sig_hz > 0.0)) errors.push_back("--fsig-hz must be > 0");
  if (!(p.opt.gamma1 >= 0.0)) errors.push_back("--gamma1 must be >= 0");
  if (!(p.opt.gamma2 >= 0.0)) errors.push_back("--gamma2 must be >= 0");
  if (!(p.opt.gamma1 + p.opt.gamma2 > 0.0)) errors.push_back("--gamma1 + --gamma2 must be > 0");
  if (p.median_w < 1 || p.median_w % 2 == 0) errors.push_back("--median must be odd and >= 1");
  if (p.M < 1) errors.push_back("--interp must be >= 1");
  if (!(p.cleaning.t_sh > 0.0)) errors.push_back("--tsh must be > 0");
  if (!(p.cleaning.q > 0.0 && p.cleaning.q < 1.0)) errors.push_back("--q must lie in (0, 1)");
  if (!(p.cleaning.rho > 0.0)) errors.push_back("--rho must be > 0");
  if (p.cleaning.r < 1) errors.push_back("--r must be >= 1");
  if (!(p.blind_mm >= 0.0)) errors.push_back("--blind-mm must be >= 0");
  if (p.base.fit_halfwidth_px < 1) errors.push_back("--fit-halfwidth must be >= 1");
  if (!(p.base.theta_lo > 0.0)) errors.push_back("--theta-lo must be > 0");
  if (!(p.base.theta_step > 0.0)) errors.push_back("--theta-step must be > 0");
  if (!(p.base.theta_hi >= p.base.theta_lo)) errors.push_back("--theta-hi must be >= --theta-lo");
  if (cfg.threads < 0) errors.push_back("--threads must be >= 0");
  if (cfg.jitter_std && !(*cfg.jitter_std >= 0.0)) errors.push_back("--jitter must be >= 0");
  if (cfg.reflect_gain && !(*cfg.reflect_gain >= 0.0 && *cfg.reflect_gain < 1.0)) {
    errors.push_back("--reflect-gain must lie in [0, 1)");
  }
  return errors;
}

std::string join_lines(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& e : v) s += "  " + e + "\n";
  return s;
}

void require_file(const std::filesystem::path& p, const char* flag, std::vector<std::string>& errors) {
  if (p.empty()) {
    errors.push_back(std::string(flag) + " is required");
  } else if (!std::filesystem::exists(p)) {
    errors.push_back(std::string(flag) + ": no such file '" + p.string() + "'");
  }
}

std::filesystem::path with_suffix(const std::filesystem::path& base, const std::string& suffix) {
  auto stem = base;
  stem.replace_extension();
  return stem.string() + suffix;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

// Carries the stage name into the error message.
class Stage {
 public:
  explicit Stage(std::string& slot) : slot_(slot) {}
  void operator()(const char* name) { slot_ = name; }

 private:
  std::string& slot_;
};

pipeline::ReconstructParams resolved(const RunConfig& cfg, const DisplacementVolume& vol) {
  auto p = cfg.params;
  p.opt.dx_px = dx_px_from_mm(cfg.dx_mm, vol.fsp_px_per_mm, p.M);
  p.base.dx_px = p.opt.dx_px;
  p.base.f_sig_hz = p.opt.f_sig_hz;
  p.base.L = p.opt.L;
  if (p.opt.dx_px < 1) throw ParameterError("--dx-mm is below one interpolated column");
  return p;
}

int run_synth(const RunConfig& cfg, std::ostream& out, Stage& stage) {
  stage("preset");
  auto preset = phantom::make_preset(cfg.preset);
  preset.noise.seed = cfg.seed;
  if (cfg.jitter_std) preset.noise.jitter_std = *cfg.jitter_std;
  if (cfg.reflect_gain) preset.noise.reflect_gain = *cfg.reflect_gain;
  if (cfg.reflect_x_px) preset.noise.reflect_x_px = *cfg.reflect_x_px;
  if (preset.noise.reflect_gain > 0.0 && !preset.noise.reflect_x_px) {
    preset.noise.reflect_x_px = preset.speed.c.nx() - 1;
  }
  stage("synthesize");
  const auto vol = phantom::render(preset);
  stage("write");
  io::save_volume(vol, cfg.out);
  SwsMap truth(preset.speed.c.nx(), preset.speed.c.nz());
  for (int x = 0; x < truth.nx(); ++x) {
    for (int z = 0; z < truth.nz(); ++z) truth.set(x, z, preset.speed.c(x, z));
  }
  const auto truth_path = with_suffix(cfg.out, ".truth.bin");
  io::save_sws_map(truth, truth_path, io::MapFormat::raw);
  if (preset.inclusion) {
    const auto [inc, bg] = phantom::inclusion_masks(vol.X, vol.Z, vol.fsp_px_per_mm, vol.axial_res_mm_per_px,
                                                    *preset.inclusion, cfg.mask_margin_mm);
    io::save_mask(inc, with_suffix(cfg.out, ".inc.pgm"));
    io::save_mask(bg, with_suffix(cfg.out, ".bg.pgm"));
  }
  out << "synth preset=" << cfg.preset << " X=" << vol.X << " Z=" << vol.Z << " N=" << vol.N
      << " truth=" << truth_path.string() << "\n";
  return 0;
}

int run_clean(const RunConfig& cfg, std::ostream& out, Stage& stage) {
  stage("load");
  const auto vol = io::load_volume(cfg.in);
  stage("clean");
  const auto t0 = std::chrono::steady_clock::now();
  const auto prep = pipeline::prepare(vol, resolved(cfg, vol), true);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  stage("write");
  io::save_volume(prep.volume, cfg.out);
  int fallback = 0;
  for (auto f : prep.slice_fallback) fallback += f;
  out << "clean runtime_s=" << fmt(secs) << " width=" << prep.volume.X << " fallback_slices=" << fallback << "\n";
  return 0;
}

int run_reconstruct(const RunConfig& cfg, std::ostream& out, Stage& stage) {
  stage("load");
  const auto vol = io::load_volume(cfg.in);
  stage("reconstruct");
  const auto p = resolved(cfg, vol);
  const auto t0 = std::chrono::steady_clock::now();
  const auto rec = pipeline::run_method(vol, cfg.method, p);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  stage("write");
  io::save_sws_map(rec.map, cfg.out);
  out << "reconstruct method=" << pipeline::method_name(cfg.method) << " runtime_s=" << fmt(secs)
      << " mean_sws=" << fmt(rec.map.valid_mean()) << " valid=" << rec.map.valid_count() << "\n";
  return 0;
}

int run_evaluate(const RunConfig& cfg, std::ostream& out, Stage& stage) {
  stage("load");
  const auto map = io::load_sws_map(cfg.in);
  std::ostringstream report;
  report << "valid = " << map.valid_count() << "\n";
  report << "mean_sws = " << fmt(map.valid_mean()) << "\n";
  stage("evaluate");
  if (!cfg.label.empty()) {
    const auto truth = io::load_sws_map(cfg.label);
    SpeedMap label{truth.speed, 0.0};
    report << "psnr_db = " << fmt(metrics::psnr(map, label)) << "\n";
  }
  if (!cfg.inc_mask.empty() && !cfg.bg_mask.empty()) {
    const auto inc = io::load_mask(cfg.inc_mask);
    const auto bg = io::load_mask(cfg.bg_mask);
    check_disjoint(inc, bg);
    const auto si = metrics::region_stats(map, inc);
    const auto sb = metrics::region_stats(map, bg);
    report << "inclusion_mean = " << fmt(si.mean) << "\n";
    report << "inclusion_std = " << fmt(si.std) << "\n";
    report << "background_mean = " << fmt(sb.mean) << "\n";
    report << "background_std = " << fmt(sb.std) << "\n";
    report << "cnr_db = " << fmt(metrics::cnr(si, sb)) << "\n";
  }
  if (!cfg.out.empty()) {
    stage("write");
    std::ofstream f(cfg.out);
    if (!f) throw IoError("cannot write '" + cfg.out.string() + "'");
    f << report.str();
  }
  out << "evaluate map=" << cfg.in.string() << " mean_sws=" << fmt(map.valid_mean()) << "\n" << report.str();
  return 0;
}

}  // namespace

std::optional<int> parse(int argc, const char* const* argv, RunConfig& cfg, std::ostream& out, std::ostream& err) {
  CLI::App app{"Shear-wave-speed reconstruction from displacement volumes", "swsopt"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);
  RawFlags raw;
  std::optional<double> jitter;
  std::optional<double> gain;
  std::optional<int> reflect_x;

  auto* synth = app.add_subcommand("synth", "render a phantom preset");
  synth->add_option("--preset", cfg.preset, "phantom preset")
      ->required()
      ->check(CLI::IsMember(phantom::preset_names()));
  synth->add_option("--out", cfg.out, "output volume")->required();
  synth->add_option("--seed", cfg.seed, "noise seed")->capture_default_str();
  synth->add_option("--jitter", jitter, "additive noise std, amplitude units");
  synth->add_option("--reflect-gain", gain, "reflected pulse gain in [0, 1)");
  synth->add_option("--reflect-x", reflect_x, "reflector column (default: last column)");
  synth->add_option("--mask-margin-mm", cfg.mask_margin_mm, "guard band between region masks")
      ->capture_default_str();
  add_common(synth, cfg);

  auto* clean = app.add_subcommand("clean", "interpolate, crop and clean a volume");
  clean->add_option("--in", cfg.in, "input volume")->required();
  clean->add_option("--out", cfg.out, "output volume")->required();
  add_cleaning_flags(clean, cfg, raw);
  add_common(clean, cfg);

  auto* rec = app.add_subcommand("reconstruct", "estimate a speed map");
  rec->add_option("--in", cfg.in, "input volume")->required();
  rec->add_option("--out", cfg.out, "output map (.csv, .pgm or raw)")->required();
  add_estimation_flags(rec, cfg, raw);
  add_cleaning_flags(rec, cfg, raw);
  add_common(rec, cfg);

  auto* ev = app.add_subcommand("evaluate", "metrics for a speed map");
  ev->add_option("--in", cfg.in, "speed map (raw or csv)")->required();
  ev->add_option("--label", cfg.label, "ground-truth map for PSNR");
  ev->add_option("--inc-mask", cfg.inc_mask, "inclusion mask (PGM)");
  ev->add_option("--bg-mask", cfg.bg_mask, "background mask (PGM)");
  ev->add_option("--out", cfg.out, "report file (key = value)");
  add_common(ev, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  std::vector<std::string> errors;
  if (*synth) {
    cfg.subcommand = Subcommand::synth;
  } else if (*clean) {
    cfg.subcommand = Subcommand::clean;
    require_file(cfg.in, "--in", errors);
  } else if (*rec) {
    cfg.subcommand = Subcommand::reconstruct;
    require_file(cfg.in, "--in", errors);
    cfg.method = pipeline::parse_method(raw.method);
  } else {
    cfg.subcommand = Subcommand::evaluate;
    require_file(cfg.in, "--in", errors);
    if (!cfg.label.empty()) require_file(cfg.label, "--label", errors);
    if (!cfg.inc_mask.empty()) require_file(cfg.inc_mask, "--inc-mask", errors);
    if (!cfg.bg_mask.empty()) require_file(cfg.bg_mask, "--bg-mask", errors);
    if (cfg.inc_mask.empty() != cfg.bg_mask.empty()) errors.push_back("--inc-mask and --bg-mask go together");
  }
  cfg.jitter_std = jitter;
  cfg.reflect_gain = gain;
  cfg.reflect_x_px = reflect_x;
  cfg.params.clean = raw.clean == "on"    ? pipeline::CleanMode::always
                     : raw.clean == "off" ? pipeline::CleanMode::never
                                          : pipeline::CleanMode::automatic;
  if (cfg.threads == 0) {
    if (const char* env = std::getenv("SWS_THREADS")) {
      try {
        cfg.threads = std::stoi(env);
      } catch (const std::exception&) {
        errors.push_back(std::string("SWS_THREADS: not an integer '") + env + "'");
      }
    }
  }
  for (auto& e : finish(cfg, raw)) errors.push_back(std::move(e));
  for (auto& e : check_numbers(cfg)) errors.push_back(std::move(e));
  if (!errors.empty()) {
    err << "swsopt: invalid arguments:\n" << join_lines(errors);
    return 2;
  }
  return std::nullopt;
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  std::string stage_name = "setup";
  Stage stage(stage_name);
  try {
    pipeline::ScopedThreads threads(cfg.threads);
    switch (cfg.subcommand) {
      case Subcommand::synth:
        return run_synth(cfg, out, stage);
      case Subcommand::clean:
        return run_clean(cfg, out, stage);
      case Subcommand::reconstruct:
        return run_reconstruct(cfg, out, stage);
      case Subcommand::evaluate:
        return run_evaluate(cfg, out, stage);
    }
  } catch (const std::exception& e) {
    err << "swsopt: " << stage_name << " failed: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  if (auto status = parse(argc, argv, cfg, out, err)) return *status;
  return run(cfg, out, err);
}

int dx_px_from_mm(double dx_mm, double fsp_px_per_mm, int M) {
  return static_cast<int>(std::lround(dx_mm * fsp_px_per_mm * M));
}

}  // namespace sws::cli
