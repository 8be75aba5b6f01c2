#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "og/types.hpp"

namespace og::eval {

/// Estimated pose (already mapped into the ground-truth body convention)
/// paired with the ground-truth pose interpolated at its timestamp.
struct PosePair {
  Pose2 est;
  Pose2 gt;
};

/// One relative-pose segment evaluation.
struct SegmentError {
  std::size_t start_frame = 0;
  double start_distance_m = 0.0;
  double length_m = 0.0;         // nominal segment length
  double actual_length_m = 0.0;  // ground-truth distance actually covered
  double trans_err_pct = 0.0;
  double rot_err_deg_per_100m = 0.0;
};

struct EvalReport {
  struct PerLength {
    double length_m = 0.0;
    double trans_err_pct = 0.0;
    double rot_err_deg_per_100m = 0.0;
    std::size_t count = 0;
  };
  double trans_err_pct = 0.0;          // mean over all segment instances
  double rot_err_deg_per_100m = 0.0;   // mean over all segment instances
  std::vector<PerLength> per_segment;
  std::vector<double> segment_lengths;
};

struct SlipSample {
  double t = 0.0;
  double forward = 0.0;  // m/s, encoder minus ground truth
  double lateral = 0.0;  // m/s
};

struct SlipReport {
  double rms_forward_slip = 0.0;
  double rms_side_slip = 0.0;
  std::vector<SlipSample> per_sample_slip;
};

/// KITTI convention: 100 m to 800 m in 100 m steps.
std::vector<double> default_segment_lengths();

/// Maps each estimated wheel pose into the ground-truth body convention using
/// the extrinsics and pairs it with the interpolated ground-truth pose.
/// Estimated poses outside the ground-truth span are dropped; the remaining
/// time overlap must cover at least 90% of the estimate.
std::vector<PosePair> align_to_gt(const Trajectory& est,
                                  std::span<const GroundTruthSample> gt,
                                  const CalibParams& extrinsics);

struct MetricOptions {
  std::size_t start_stride = 1;  // evaluate every start_stride-th frame
  int threads = 1;
};

/// Relative translation [%] and rotation [deg/100 m] errors over fixed-length
/// sub-segments, averaged over every (start, length) instance.
EvalReport kitti_metrics(std::span<const PosePair> pairs,
                         std::span<const double> segment_lengths,
                         const MetricOptions& options = {});

/// Unaggregated per-start-frame segment errors (for locating error spikes).
std::vector<SegmentError> error_vs_distance(std::span<const PosePair> pairs,
                                            std::span<const double> segment_lengths,
                                            const MetricOptions& options = {});

struct SlipOptions {
  double min_speed = 0.0;  // m/s; drop samples with GT speed below this
};

/// Per-sample slip: encoder forward speed minus the ground-truth velocity
/// projected into the wheel frame, plus the RMS of both components.
SlipReport slip_profile(const SampleStream& stream, std::int64_t ticks_per_rev,
                        const CalibParams& params, const SlipOptions& options = {});

void write_eval_report_csv(const std::filesystem::path& path,
                           const EvalReport& report);
void write_slip_csv(const std::filesystem::path& path, const SlipReport& report);

}  // namespace og::eval
