// og: odometer-gyroscope SE(2) dead-reckoning toolkit.
//
// Subcommands: run (integrate a trajectory), calibrate (wheel radius +
// extrinsics), eval (KITTI relative metrics), slip (encoder-vs-ground-truth
// slippage), simulate (synthetic datasets).
//
// Exit codes: 0 success, 1 internal error, 2 input error, 3 degenerate data.
// Errors print as `error: <Name>: <detail>` on stderr.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "og/bias.hpp"
#include "og/calib.hpp"
#include "og/csv.hpp"
#include "og/dr_core.hpp"
#include "og/errors.hpp"
#include "og/eval.hpp"
#include "og/ingest.hpp"
#include "og/synth.hpp"
#include "og/types.hpp"

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

constexpr const char* kVersion = "0.1.0";

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

/// `key = value` file with `#` comments.
std::map<std::string, std::string> load_config(const fs::path& path) {
  std::map<std::string, std::string> out;
  const std::string content = og::csv::read_file(path);
  std::size_t pos = 0;
  while (pos < content.size()) {
    std::size_t nl = content.find('\n', pos);
    if (nl == std::string::npos) nl = content.size();
    std::string line = content.substr(pos, nl - pos);
    pos = nl + 1;
    const auto strip = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    line = strip(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      og::raise(og::Errc::invalid_argument, "config line without '=': " + line);
    }
    out[strip(line.substr(0, eq))] = strip(line.substr(eq + 1));
  }
  return out;
}

struct Settings {
  std::map<std::string, std::string> values;

  double get(const std::string& key, double fallback) const {
    auto it = values.find(key);
    if (it == values.end()) return fallback;
    try {
      return std::stod(it->second);
    } catch (const std::exception&) {
      og::raise(og::Errc::invalid_argument, "bad config value for " + key);
    }
  }
  std::int64_t get(const std::string& key, std::int64_t fallback) const {
    return static_cast<std::int64_t>(get(key, static_cast<double>(fallback)));
  }
  std::optional<double> get_optional(const std::string& key) const {
    auto it = values.find(key);
    if (it == values.end()) return std::nullopt;
    try {
      return std::stod(it->second);
    } catch (const std::exception&) {
      og::raise(og::Errc::invalid_argument, "bad config value for " + key);
    }
  }
  void set(const std::string& key, double v) {
    std::string s;
    og::csv::append_number(s, v);
    values[key] = s;
  }
};

std::uint64_t fnv1a(std::string_view data) {
  std::uint64_t hash = 1469598103934665603ull;
  for (const char c : data) {
    hash ^= static_cast<unsigned char>(c);
    hash *= 1099511628211ull;
  }
  return hash;
}

fs::path require_input(const std::string& flag, const std::string& value) {
  if (value.empty()) {
    og::raise(og::Errc::missing_input, "missing required input --" + flag);
  }
  fs::path p(value);
  std::error_code ec;
  if (!fs::exists(p, ec)) {
    og::raise(og::Errc::missing_input, "--" + flag + ": no such file: " + value);
  }
  return p;
}

fs::path prepare_out_dir(const std::string& out) {
  if (out.empty()) {
    og::raise(og::Errc::missing_input, "missing required --out directory");
  }
  fs::path dir(out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    og::raise(og::Errc::io_error, "cannot create output directory " + out);
  }
  return dir;
}

void write_manifest(const fs::path& dir, const std::string& command,
                    const std::vector<std::pair<std::string, std::string>>& inputs,
                    const Settings& settings) {
  std::string buf;
  buf += "# og manifest\nversion=";
  buf += kVersion;
  buf += "\ncommand=" + command + "\n";
  std::string config_blob;
  for (const auto& [k, v] : settings.values) {
    config_blob += k + "=" + v + "\n";
  }
  buf += "config_hash=" + std::to_string(fnv1a(config_blob)) + "\n";
  for (const auto& [k, v] : inputs) {
    buf += "input " + k + "=" + v + "\n";
  }
  for (const auto& [k, v] : settings.values) {
    buf += "config " + k + "=" + v + "\n";
  }
  og::csv::write_file(dir / "manifest.txt", buf);
}

og::bias::BiasConfig bias_config_from(const Settings& s) {
  og::bias::BiasConfig cfg;
  cfg.alpha = s.get("bias.alpha", cfg.alpha);
  cfg.static_window_s = s.get("bias.static_window_s", cfg.static_window_s);
  cfg.static_tick_tol = s.get("bias.static_tick_tol", cfg.static_tick_tol);
  cfg.initial = s.get_optional("bias.initial");
  if (cfg.alpha < 0.0 || cfg.alpha >= 1.0) {
    og::raise(og::Errc::invalid_argument, "bias.alpha must be in [0, 1)");
  }
  return cfg;
}

std::vector<double> parse_lengths(const std::string& csv_list) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= csv_list.size()) {
    auto comma = csv_list.find(',', pos);
    if (comma == std::string::npos) comma = csv_list.size();
    const std::string item = csv_list.substr(pos, comma - pos);
    pos = comma + 1;
    if (item.empty()) continue;
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      og::raise(og::Errc::invalid_argument, "bad segment length '" + item + "'");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

struct SharedFlags {
  std::string encoder, gyro, gt, calib, out, config;
  int threads = 1;
  std::int64_t seed = -1;
};

void add_shared(CLI::App* cmd, SharedFlags& f) {
  cmd->add_option("--encoder", f.encoder, "Encoder CSV (t,ticks)");
  cmd->add_option("--gyro", f.gyro, "Gyro CSV (t,omega)");
  cmd->add_option("--gt", f.gt, "Ground-truth CSV (t,x,y,yaw[,vx,vy,omega])");
  cmd->add_option("--calib", f.calib, "Calibration key-value file");
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_option("--config", f.config, "key = value configuration file");
  cmd->add_option("--threads", f.threads, "Worker threads (results identical)");
  cmd->add_option("--seed", f.seed, "Seed override for simulation");
}

Settings settings_from(const SharedFlags& f) {
  Settings s;
  if (!f.config.empty()) {
    s.values = load_config(require_input("config", f.config));
  }
  return s;
}

int cmd_run(const SharedFlags& flags, std::int64_t ticks_per_rev_flag,
            double wheel_radius_flag) {
  const auto start = Clock::now();
  Settings settings = settings_from(flags);

  const fs::path encoder_path = require_input("encoder", flags.encoder);
  const fs::path gyro_path = require_input("gyro", flags.gyro);
  const fs::path out_dir = prepare_out_dir(flags.out);

  og::WheelModel wheel;
  wheel.radius = settings.get("wheel.radius_m", wheel.radius);
  wheel.ticks_per_rev = settings.get("wheel.ticks_per_rev", wheel.ticks_per_rev);
  if (ticks_per_rev_flag > 0) wheel.ticks_per_rev = ticks_per_rev_flag;
  if (!flags.calib.empty()) {
    wheel.radius = og::calib::read_calib_file(require_input("calib", flags.calib)).radius;
  }
  if (wheel_radius_flag > 0) wheel.radius = wheel_radius_flag;
  settings.set("wheel.radius_m", wheel.radius);
  settings.set("wheel.ticks_per_rev", static_cast<double>(wheel.ticks_per_rev));

  og::ingest::GyroLimits limits;
  limits.max_abs_omega = settings.get("ingest.max_abs_omega", limits.max_abs_omega);

  const auto parse_start = Clock::now();
  auto encoder = og::ingest::parse_encoder_csv(encoder_path);
  auto gyro = og::ingest::parse_gyro_csv(gyro_path, limits);
  auto stream = og::ingest::build_stream(std::move(encoder), gyro);
  const double parse_s = seconds_since(parse_start);

  const auto series = og::bias::bias_series(stream, bias_config_from(settings));

  const auto integrate_start = Clock::now();
  const og::Trajectory trajectory = og::dr::integrate(stream, wheel, series);
  const double integrate_s = seconds_since(integrate_start);

  og::ingest::write_trajectory_csv(out_dir / "trajectory.csv", trajectory);
  write_manifest(out_dir, "run",
                 {{"encoder", flags.encoder}, {"gyro", flags.gyro},
                  {"calib", flags.calib}},
                 settings);

  const double n = static_cast<double>(stream.size());
  std::printf("samples=%zu\n", stream.size());
  std::printf("path_length_m=%.3f\n", trajectory.path_length());
  std::printf("# timing parse_s=%.4f integrate_s=%.4f per_sample_us=%.4f total_s=%.4f\n",
              parse_s, integrate_s, n > 0 ? integrate_s / n * 1e6 : 0.0,
              seconds_since(start));
  return 0;
}

int cmd_calibrate(const SharedFlags& flags,
                  const std::vector<std::string>& encoders,
                  const std::vector<std::string>& gyros,
                  const std::vector<std::string>& gts,
                  std::int64_t ticks_per_rev_flag) {
  Settings settings = settings_from(flags);

  std::vector<std::string> enc_list = encoders;
  std::vector<std::string> gyro_list = gyros;
  std::vector<std::string> gt_list = gts;
  if (enc_list.empty() && !flags.encoder.empty()) enc_list.push_back(flags.encoder);
  if (gyro_list.empty() && !flags.gyro.empty()) gyro_list.push_back(flags.gyro);
  if (gt_list.empty() && !flags.gt.empty()) gt_list.push_back(flags.gt);
  if (enc_list.empty() || enc_list.size() != gyro_list.size() ||
      enc_list.size() != gt_list.size()) {
    og::raise(og::Errc::missing_input,
              "calibrate needs matching --encoder/--gyro/--gt lists");
  }

  std::int64_t ticks_per_rev = settings.get("wheel.ticks_per_rev", std::int64_t{4096});
  if (ticks_per_rev_flag > 0) ticks_per_rev = ticks_per_rev_flag;
  settings.set("wheel.ticks_per_rev", static_cast<double>(ticks_per_rev));

  og::ingest::GyroLimits limits;
  limits.max_abs_omega = settings.get("ingest.max_abs_omega", limits.max_abs_omega);

  std::vector<og::SampleStream> streams;
  streams.reserve(enc_list.size());
  for (std::size_t i = 0; i < enc_list.size(); ++i) {
    auto encoder = og::ingest::parse_encoder_csv(require_input("encoder", enc_list[i]));
    auto gyro = og::ingest::parse_gyro_csv(require_input("gyro", gyro_list[i]), limits);
    auto gt = og::ingest::parse_ground_truth_csv(require_input("gt", gt_list[i]));
    streams.push_back(
        og::ingest::build_stream(std::move(encoder), gyro, std::move(gt)));
  }

  og::CalibParams init;
  init.radius = settings.get("calib.init_radius_m", 0.35);
  og::calib::SolveOptions options;
  options.max_iterations =
      static_cast<int>(settings.get("calib.max_iterations", std::int64_t{100}));
  options.min_wheel_speed = settings.get("calib.min_speed_mps", options.min_wheel_speed);
  options.huber_delta = settings.get_optional("calib.huber_delta_mps");

  const og::calib::Report report =
      og::calib::solve(streams, ticks_per_rev, init, options);

  const fs::path out_dir = prepare_out_dir(flags.out);
  og::calib::write_calib_file(out_dir / "calibration.txt", report);
  std::vector<std::pair<std::string, std::string>> inputs;
  for (std::size_t i = 0; i < enc_list.size(); ++i) {
    inputs.emplace_back("encoder", enc_list[i]);
    inputs.emplace_back("gyro", gyro_list[i]);
    inputs.emplace_back("gt", gt_list[i]);
  }
  write_manifest(out_dir, "calibrate", inputs, settings);

  std::printf("radius_m=%.9f\n", report.params.radius);
  std::printf("p_ext_x_m=%.9f\np_ext_y_m=%.9f\n", report.params.p_ext.x(),
              report.params.p_ext.y());
  std::printf("theta_ext_rad=%.9f\n", report.params.theta_ext);
  std::printf("rms_residual_mps=%.9g\n", report.rms_residual);
  std::printf("iterations=%d converged=%s\n", report.iterations,
              report.converged ? "true" : "false");
  for (const auto& w : report.warnings) std::printf("warning=%s\n", w.c_str());
  return 0;
}

int cmd_eval(const SharedFlags& flags, const std::string& traj,
             const std::string& lengths_flag) {
  Settings settings = settings_from(flags);

  const og::Trajectory est =
      og::ingest::parse_trajectory_csv(require_input("traj", traj));
  const auto gt = og::ingest::parse_ground_truth_csv(require_input("gt", flags.gt));
  og::CalibParams extrinsics;
  if (!flags.calib.empty()) {
    extrinsics = og::calib::read_calib_file(require_input("calib", flags.calib));
  }

  std::vector<double> lengths = og::eval::default_segment_lengths();
  if (auto cfg = settings.values.find("eval.segment_lengths");
      cfg != settings.values.end()) {
    lengths = parse_lengths(cfg->second);
  }
  if (!lengths_flag.empty()) lengths = parse_lengths(lengths_flag);

  og::eval::MetricOptions options;
  options.start_stride =
      static_cast<std::size_t>(settings.get("eval.stride", std::int64_t{1}));
  options.threads = flags.threads;

  const auto pairs = og::eval::align_to_gt(est, gt, extrinsics);
  const auto report = og::eval::kitti_metrics(pairs, lengths, options);

  const fs::path out_dir = prepare_out_dir(flags.out);
  og::eval::write_eval_report_csv(out_dir / "eval_report.csv", report);
  write_manifest(out_dir, "eval",
                 {{"traj", traj}, {"gt", flags.gt}, {"calib", flags.calib}},
                 settings);

  for (const auto& row : report.per_segment) {
    std::printf("length=%g trans_err_pct=%.6f rot_err_deg_per_100m=%.6f count=%zu\n",
                row.length_m, row.trans_err_pct, row.rot_err_deg_per_100m,
                row.count);
  }
  std::printf("%.2f,%.2f\n", report.trans_err_pct, report.rot_err_deg_per_100m);
  return 0;
}

int cmd_slip(const SharedFlags& flags, std::int64_t ticks_per_rev_flag,
             double wheel_radius_flag) {
  Settings settings = settings_from(flags);

  og::ingest::GyroLimits limits;
  limits.max_abs_omega = settings.get("ingest.max_abs_omega", limits.max_abs_omega);

  auto encoder = og::ingest::parse_encoder_csv(require_input("encoder", flags.encoder));
  auto gyro = og::ingest::parse_gyro_csv(require_input("gyro", flags.gyro), limits);
  auto gt = og::ingest::parse_ground_truth_csv(require_input("gt", flags.gt));
  const auto stream =
      og::ingest::build_stream(std::move(encoder), gyro, std::move(gt));

  og::CalibParams params;
  params.radius = settings.get("wheel.radius_m", params.radius);
  if (!flags.calib.empty()) {
    params = og::calib::read_calib_file(require_input("calib", flags.calib));
  }
  if (wheel_radius_flag > 0) params.radius = wheel_radius_flag;
  std::int64_t ticks_per_rev = settings.get("wheel.ticks_per_rev", std::int64_t{4096});
  if (ticks_per_rev_flag > 0) ticks_per_rev = ticks_per_rev_flag;

  og::eval::SlipOptions options;
  options.min_speed = settings.get("slip.min_speed_mps", 0.0);

  const auto report = og::eval::slip_profile(stream, ticks_per_rev, params, options);

  const fs::path out_dir = prepare_out_dir(flags.out);
  og::eval::write_slip_csv(out_dir / "slip.csv", report);
  write_manifest(out_dir, "slip",
                 {{"encoder", flags.encoder}, {"gyro", flags.gyro},
                  {"gt", flags.gt}, {"calib", flags.calib}},
                 settings);

  std::printf("# rms_forward=%.9f\n# rms_side=%.9f\n", report.rms_forward_slip,
              report.rms_side_slip);
  return 0;
}

int cmd_simulate(const SharedFlags& flags, const std::string& script_path,
                 const std::string& preset_name, const og::synth::NoiseSpec& noise,
                 double rate_override) {
  Settings settings = settings_from(flags);

  og::synth::ManeuverScript script;
  if (!script_path.empty()) {
    script = og::synth::parse_script(require_input("script", script_path));
  } else if (!preset_name.empty()) {
    script = og::synth::preset(preset_name);
  } else {
    og::raise(og::Errc::missing_input, "simulate needs --script or --preset");
  }
  if (flags.seed >= 0) script.seed = static_cast<std::uint64_t>(flags.seed);
  if (rate_override > 0) script.sample_rate = rate_override;

  const og::synth::SimResult result = og::synth::simulate(script, noise);

  const fs::path out_dir = prepare_out_dir(flags.out);
  bool signed_ticks = false;
  for (std::size_t i = 1; i < result.stream.encoder.size(); ++i) {
    if (result.stream.encoder[i].ticks < result.stream.encoder[i - 1].ticks) {
      signed_ticks = true;
      break;
    }
  }
  og::ingest::write_encoder_csv(out_dir / "encoder.csv", result.stream.encoder,
                                signed_ticks);
  og::ingest::write_gyro_csv(out_dir / "gyro.csv", result.stream.gyro_on_encoder_grid);
  og::ingest::write_ground_truth_csv(out_dir / "ground_truth.csv",
                                     *result.stream.ground_truth);
  og::synth::write_true_bias_csv(out_dir / "true_bias.csv", result.stream,
                                 result.true_bias);
  og::eval::SlipReport true_slip;
  true_slip.per_sample_slip = result.true_slip;
  double f2 = 0.0, l2 = 0.0;
  for (const auto& s : result.true_slip) {
    f2 += s.forward * s.forward;
    l2 += s.lateral * s.lateral;
  }
  if (!result.true_slip.empty()) {
    true_slip.rms_forward_slip = std::sqrt(f2 / static_cast<double>(result.true_slip.size()));
    true_slip.rms_side_slip = std::sqrt(l2 / static_cast<double>(result.true_slip.size()));
  }
  og::eval::write_slip_csv(out_dir / "true_slip.csv", true_slip);
  og::synth::write_script(out_dir / "script.txt", script);

  settings.set("sim.seed", static_cast<double>(script.seed));
  settings.set("sim.rate_hz", script.sample_rate);
  settings.set("sim.gyro_noise_std", noise.gyro_noise_std);
  settings.set("sim.gyro_bias_init", noise.gyro_bias_init);
  settings.set("sim.gyro_bias_drift", noise.gyro_bias_drift);
  settings.set("sim.wheel_radius_m", noise.extrinsics.radius);
  settings.set("sim.ticks_per_rev", static_cast<double>(noise.ticks_per_rev));
  write_manifest(out_dir, "simulate",
                 {{"script", script_path}, {"preset", preset_name}}, settings);

  std::printf("samples=%zu\n", result.stream.size());
  std::printf("duration_s=%.3f\n", script.total_duration());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Odometer-gyroscope SE(2) dead-reckoning toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  SharedFlags run_flags, calib_flags, eval_flags, slip_flags, sim_flags;
  std::int64_t run_tpr = 0, calib_tpr = 0, slip_tpr = 0;
  double run_radius = 0.0, slip_radius = 0.0;
  std::vector<std::string> calib_encoders, calib_gyros, calib_gts;
  std::string eval_traj, eval_lengths;
  std::string sim_script, sim_preset;
  double sim_rate = 0.0;
  og::synth::NoiseSpec sim_noise;

  CLI::App* run = app.add_subcommand("run", "Integrate a trajectory");
  add_shared(run, run_flags);
  run->add_option("--ticks-per-rev", run_tpr, "Encoder ticks per revolution");
  run->add_option("--wheel-radius", run_radius, "Wheel radius override (m)");

  CLI::App* calibrate = app.add_subcommand("calibrate", "Estimate radius + extrinsics");
  add_shared(calibrate, calib_flags);
  calibrate->add_option("--encoders", calib_encoders, "Encoder CSVs (repeatable)");
  calibrate->add_option("--gyros", calib_gyros, "Gyro CSVs (repeatable)");
  calibrate->add_option("--gts", calib_gts, "Ground-truth CSVs (repeatable)");
  calibrate->add_option("--ticks-per-rev", calib_tpr, "Encoder ticks per revolution");

  CLI::App* eval_cmd = app.add_subcommand("eval", "KITTI relative-pose metrics");
  add_shared(eval_cmd, eval_flags);
  eval_cmd->add_option("--traj", eval_traj, "Estimated trajectory CSV");
  eval_cmd->add_option("--segment-lengths", eval_lengths,
                       "Comma-separated lengths in meters");

  CLI::App* slip = app.add_subcommand("slip", "Slippage profile and RMS");
  add_shared(slip, slip_flags);
  slip->add_option("--ticks-per-rev", slip_tpr, "Encoder ticks per revolution");
  slip->add_option("--wheel-radius", slip_radius, "Wheel radius override (m)");

  CLI::App* simulate = app.add_subcommand("simulate", "Generate a synthetic dataset");
  add_shared(simulate, sim_flags);
  simulate->add_option("--script", sim_script, "Maneuver script file");
  simulate->add_option("--preset", sim_preset,
                       "no_slip_loop | stop_and_go | drift_loop | suburbs_like");
  simulate->add_option("--rate", sim_rate, "Sample rate override (Hz)");
  simulate->add_option("--gyro-noise-std", sim_noise.gyro_noise_std, "rad/s");
  simulate->add_option("--gyro-bias-init", sim_noise.gyro_bias_init, "rad/s");
  simulate->add_option("--gyro-bias-drift", sim_noise.gyro_bias_drift, "rad/s^2");
  simulate->add_option("--gyro-bias-rw-std", sim_noise.gyro_bias_rw_std,
                       "rad/s per sqrt(s)");
  simulate->add_option("--wheel-radius", sim_noise.extrinsics.radius, "m");
  simulate->add_option("--ticks-per-rev", sim_noise.ticks_per_rev, "");
  simulate->add_option("--ext-px", sim_noise.extrinsics.p_ext.x(), "m");
  simulate->add_option("--ext-py", sim_noise.extrinsics.p_ext.y(), "m");
  simulate->add_option("--ext-theta", sim_noise.extrinsics.theta_ext, "rad");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_flags, run_tpr, run_radius);
    if (calibrate->parsed()) {
      return cmd_calibrate(calib_flags, calib_encoders, calib_gyros, calib_gts,
                           calib_tpr);
    }
    if (eval_cmd->parsed()) return cmd_eval(eval_flags, eval_traj, eval_lengths);
    if (slip->parsed()) return cmd_slip(slip_flags, slip_tpr, slip_radius);
    if (simulate->parsed()) {
      return cmd_simulate(sim_flags, sim_script, sim_preset, sim_noise, sim_rate);
    }
  } catch (const og::Error& e) {
    std::fprintf(stderr, "error: %s: %s\n", e.name(), e.what());
    return og::exit_code(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: Internal: %s\n", e.what());
    return 1;
  }
  return 0;
}
