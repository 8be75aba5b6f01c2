#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "og/types.hpp"

namespace og::ingest {

/// Sanity limits applied while parsing gyro files.
struct GyroLimits {
  double max_abs_omega = 20.0;  // rad/s
};

/// Reads `t,ticks`. Time must be strictly increasing; a decreasing counter is
/// rejected unless the file declares `#ticks=signed` (reverse driving).
std::vector<EncoderSample> parse_encoder_csv(const std::filesystem::path& path);

/// Reads `t,omega`.
std::vector<GyroSample> parse_gyro_csv(const std::filesystem::path& path,
                                       const GyroLimits& limits = {});

/// Reads `t,x,y,yaw` or `t,x,y,yaw,vx,vy,omega` (velocity columns all-or-none).
std::vector<GroundTruthSample> parse_ground_truth_csv(
    const std::filesystem::path& path);

/// Reads `t,x,y,yaw`.
Trajectory parse_trajectory_csv(const std::filesystem::path& path);

/// Linear interpolation of omega at each target time. Targets must lie inside
/// the gyro time span; extrapolation is refused.
std::vector<GyroSample> resample_gyro(std::span<const GyroSample> gyro,
                                      std::span<const double> target_times);

/// Assembles the synchronized stream: gyro resampled onto the encoder grid;
/// ground truth (if present, poses only) gets body-frame velocities by central
/// differences and is marked `differentiated`.
SampleStream build_stream(std::vector<EncoderSample> encoder,
                          const std::vector<GyroSample>& gyro,
                          std::optional<std::vector<GroundTruthSample>> ground_truth = {});

/// Linear interpolation of position/velocities and shortest-arc interpolation
/// of yaw at time t. t must lie inside the ground-truth span.
GroundTruthSample interpolate_ground_truth(std::span<const GroundTruthSample> gt,
                                           double t);

void write_encoder_csv(const std::filesystem::path& path,
                       std::span<const EncoderSample> samples,
                       bool signed_ticks = false);
void write_gyro_csv(const std::filesystem::path& path,
                    std::span<const GyroSample> samples);
void write_ground_truth_csv(const std::filesystem::path& path,
                            std::span<const GroundTruthSample> samples);
void write_trajectory_csv(const std::filesystem::path& path,
                          const Trajectory& trajectory);

}  // namespace og::ingest
