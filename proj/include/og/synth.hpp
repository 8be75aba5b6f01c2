#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "og/eval.hpp"
#include "og/types.hpp"

namespace og::synth {

struct Segment {
  enum class Kind { straight, arc, stop, slip_burst };
  Kind kind = Kind::stop;
  double duration = 0.0;      // s
  double speed = 0.0;         // m/s, wheel forward speed (straight/arc)
  double yaw_rate = 0.0;      // rad/s (arc)
  double forward_slip = 0.0;  // m/s, extra wheel spin the body does not do
  double lateral_slip = 0.0;  // m/s, body side motion the wheel cannot see

  static Segment straight(double speed, double duration);
  static Segment arc(double speed, double yaw_rate, double duration);
  static Segment stop(double duration);
  /// Rides on the previous segment's speed/yaw rate.
  static Segment slip_burst(double duration, double forward_slip,
                            double lateral_slip);
};

struct ManeuverScript {
  std::vector<Segment> segments;
  double sample_rate = 100.0;  // Hz
  std::uint64_t seed = 0;
  /// Yaw-rate changes between segments ramp linearly over this window at the
  /// start of the new segment (0 = instantaneous step). Ramps are piecewise
  /// linear with kinks on the sample grid, which keeps trapezoidal heading
  /// integration exact.
  double yaw_blend_s = 0.0;

  double total_duration() const;
};

struct NoiseSpec {
  double gyro_noise_std = 0.0;    // rad/s
  double gyro_bias_init = 0.0;    // rad/s
  double gyro_bias_drift = 0.0;   // rad/s per second
  double gyro_bias_rw_std = 0.0;  // rad/s per sqrt(s), optional random walk
  CalibParams extrinsics{};       // true radius + wheel-to-body extrinsics
  std::int64_t ticks_per_rev = 4096;

  WheelModel wheel() const { return {extrinsics.radius, ticks_per_rev}; }
};

struct SimResult {
  SampleStream stream;                      // encoder + gyro + ground truth
  std::vector<double> true_bias;            // per sample
  std::vector<eval::SlipSample> true_slip;  // per sample (right-limit value)
};

/// Deterministic kinematic simulation: exact per-segment ground truth,
/// floor-quantized encoder ticks, gyro with bias and seeded white noise.
/// Segment boundaries snap to the sample grid.
SimResult simulate(const ManeuverScript& script, const NoiseSpec& noise);

/// Built-in scripts: no_slip_loop, stop_and_go, drift_loop, suburbs_like.
ManeuverScript preset(std::string_view name);

/// Returns a copy with every slip magnitude multiplied by factor.
ManeuverScript scale_slip(ManeuverScript script, double factor);

ManeuverScript parse_script(const std::filesystem::path& path);
void write_script(const std::filesystem::path& path, const ManeuverScript& script);

void write_true_bias_csv(const std::filesystem::path& path,
                         const SampleStream& stream,
                         const std::vector<double>& bias);

}  // namespace og::synth
