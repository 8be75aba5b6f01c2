#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

namespace og {

/// Wraps an angle into (-pi, pi].
double normalize_angle(double radians);

/// Cumulative wheel-encoder reading. `ticks` is the raw counter value, not a
/// delta; time is relative seconds.
struct EncoderSample {
  double t = 0.0;
  std::int64_t ticks = 0;
};

/// Yaw angular rate measurement, bias-contaminated as delivered by the sensor.
struct GyroSample {
  double t = 0.0;
  double omega = 0.0;  // rad/s
};

enum class VelocitySource {
  measured,        // velocities came with the file / were emitted analytically
  differentiated,  // velocities recovered by central differences of the poses
};

/// One ground-truth fix: world pose plus body-frame velocities.
struct GroundTruthSample {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;   // normalized to (-pi, pi]
  double vx = 0.0;    // body-frame m/s
  double vy = 0.0;    // body-frame m/s
  double omega = 0.0; // rad/s
  VelocitySource velocity_source = VelocitySource::measured;
};

/// Time-aligned sensor bundle: gyro samples are resampled onto the encoder
/// timestamps so downstream code can treat the pair as one synchronized
/// stream. Ground truth keeps its native timestamps.
struct SampleStream {
  std::vector<EncoderSample> encoder;
  std::vector<GyroSample> gyro_on_encoder_grid;
  std::optional<std::vector<GroundTruthSample>> ground_truth;

  std::size_t size() const { return encoder.size(); }
  bool has_ground_truth_velocity() const {
    return ground_truth.has_value() && !ground_truth->empty();
  }
};

/// Timestamped SE(2) pose; yaw is kept in (-pi, pi].
struct Pose2 {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;
};

struct WheelModel {
  double radius = 0.35;            // m
  std::int64_t ticks_per_rev = 4096;

  double meters_per_tick() const;
  bool valid() const {
    return radius > 0.05 && radius < 2.0 && ticks_per_rev >= 1;
  }
};

struct Trajectory {
  std::vector<Pose2> poses;

  /// Sum of chord lengths between consecutive poses.
  double path_length() const;
};

/// Wheel radius plus wheel-to-ground-truth extrinsics (rotation as a single
/// angle). These are the unknowns of the calibration problem and the
/// transform used when scoring a wheel trajectory against ground truth.
struct CalibParams {
  double radius = 0.35;                       // m
  Eigen::Vector2d p_ext = Eigen::Vector2d::Zero();  // m
  double theta_ext = 0.0;                     // rad, in (-pi, pi]

  bool valid() const;
};

}  // namespace og
