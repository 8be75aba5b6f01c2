#include "og/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <thread>

#include "og/csv.hpp"
#include "og/errors.hpp"
#include "og/ingest.hpp"
#include "og/se2.hpp"

namespace og::eval {

namespace {

/// Runs fn(i) for i in [0, n); each index owns its output slot, so the result
/// is identical for any thread count.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  if (threads <= 1 || n < 2048) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(threads), n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

std::vector<double> gt_cumulative_distance(std::span<const PosePair> pairs) {
  std::vector<double> dist(pairs.size(), 0.0);
  for (std::size_t i = 1; i < pairs.size(); ++i) {
    dist[i] = dist[i - 1] + std::hypot(pairs[i].gt.x - pairs[i - 1].gt.x,
                                       pairs[i].gt.y - pairs[i - 1].gt.y);
  }
  return dist;
}

/// Core segment enumeration shared by kitti_metrics and error_vs_distance.
std::vector<SegmentError> enumerate_segments(std::span<const PosePair> pairs,
                                             std::span<const double> lengths,
                                             const MetricOptions& options) {
  if (pairs.size() < 2) {
    raise(Errc::trajectory_too_short, "need at least 2 pose pairs");
  }
  const std::vector<double> dist = gt_cumulative_distance(pairs);
  const std::size_t n = pairs.size();
  const std::size_t stride = std::max<std::size_t>(1, options.start_stride);
  const std::size_t starts = (n + stride - 1) / stride;

  // End frame per (start, length), -1 when the segment does not fit. The end
  // index is monotone in the start index, so one forward scan per length.
  std::vector<std::ptrdiff_t> ends(starts * lengths.size(), -1);
  for (std::size_t li = 0; li < lengths.size(); ++li) {
    std::size_t e = 0;
    for (std::size_t si = 0; si < starts; ++si) {
      const std::size_t s = si * stride;
      if (e < s) e = s;
      while (e < n && dist[e] - dist[s] < lengths[li]) ++e;
      if (e == n) break;
      ends[si * lengths.size() + li] = static_cast<std::ptrdiff_t>(e);
    }
  }

  std::vector<SegmentError> slots(starts * lengths.size());
  parallel_for(starts, options.threads, [&](std::size_t si) {
    const std::size_t s = si * stride;
    for (std::size_t li = 0; li < lengths.size(); ++li) {
      const std::ptrdiff_t e = ends[si * lengths.size() + li];
      if (e < 0) continue;
      const std::size_t end = static_cast<std::size_t>(e);
      const double actual = dist[end] - dist[s];
      if (!(actual > 0.0)) continue;

      const se2::Transform d_est = se2::between(se2::transform_of(pairs[s].est),
                                                se2::transform_of(pairs[end].est));
      const se2::Transform d_gt = se2::between(se2::transform_of(pairs[s].gt),
                                               se2::transform_of(pairs[end].gt));
      const se2::Transform err = se2::between(d_gt, d_est);

      SegmentError& slot = slots[si * lengths.size() + li];
      slot.start_frame = s;
      slot.start_distance_m = dist[s];
      slot.length_m = lengths[li];
      slot.actual_length_m = actual;
      slot.trans_err_pct = std::hypot(err.x, err.y) / actual * 100.0;
      slot.rot_err_deg_per_100m =
          std::abs(err.yaw) * (180.0 / std::numbers::pi) / actual * 100.0;
    }
  });

  std::vector<SegmentError> out;
  out.reserve(slots.size());
  for (const auto& slot : slots) {
    if (slot.actual_length_m > 0.0) out.push_back(slot);
  }
  if (out.empty() && !lengths.empty()) {
    raise(Errc::trajectory_too_short,
          "ground-truth path shorter than every requested segment length");
  }
  return out;
}

}  // namespace

std::vector<double> default_segment_lengths() {
  return {100.0, 200.0, 300.0, 400.0, 500.0, 600.0, 700.0, 800.0};
}

std::vector<PosePair> align_to_gt(const Trajectory& est,
                                  std::span<const GroundTruthSample> gt,
                                  const CalibParams& extrinsics) {
  if (!extrinsics.valid()) {
    raise(Errc::invalid_argument, "invalid extrinsics");
  }
  if (est.poses.size() < 2 || gt.size() < 2) {
    raise(Errc::trajectory_too_short, "need at least 2 poses on both sides");
  }

  // Wheel pose -> ground-truth body pose. The Eq.-(6) velocity linkage implies
  // the wheel sits at -p_ext in the body frame, so the wheel-to-body transform
  // is (R(-theta_ext), R(-theta_ext) * p_ext).
  const Eigen::Vector2d t_inv = se2::rotate(-extrinsics.theta_ext, extrinsics.p_ext);
  const se2::Transform wheel_to_body{t_inv.x(), t_inv.y(), -extrinsics.theta_ext};

  const double est_span = est.poses.back().t - est.poses.front().t;
  const double lo = std::max(est.poses.front().t, gt.front().t);
  const double hi = std::min(est.poses.back().t, gt.back().t);
  if (!(est_span > 0.0) || hi - lo < 0.9 * est_span) {
    raise(Errc::insufficient_overlap,
          "time overlap covers less than 90% of the estimate");
  }

  std::vector<PosePair> pairs;
  pairs.reserve(est.poses.size());
  for (const Pose2& p : est.poses) {
    if (p.t < gt.front().t || p.t > gt.back().t) continue;
    const se2::Transform body = se2::compose(se2::transform_of(p), wheel_to_body);
    const GroundTruthSample g = ingest::interpolate_ground_truth(gt, p.t);
    pairs.push_back({Pose2{p.t, body.x, body.y, body.yaw},
                     Pose2{g.t, g.x, g.y, g.yaw}});
  }
  if (pairs.size() < 2) {
    raise(Errc::insufficient_overlap, "fewer than 2 poses inside the overlap");
  }
  return pairs;
}

EvalReport kitti_metrics(std::span<const PosePair> pairs,
                         std::span<const double> segment_lengths,
                         const MetricOptions& options) {
  if (segment_lengths.empty()) {
    raise(Errc::invalid_argument, "no segment lengths given");
  }
  const auto segments = enumerate_segments(pairs, segment_lengths, options);

  EvalReport report;
  report.segment_lengths.assign(segment_lengths.begin(), segment_lengths.end());
  double trans_sum = 0.0;
  double rot_sum = 0.0;
  for (const double length : segment_lengths) {
    EvalReport::PerLength row;
    row.length_m = length;
    for (const auto& seg : segments) {
      if (seg.length_m != length) continue;
      row.trans_err_pct += seg.trans_err_pct;
      row.rot_err_deg_per_100m += seg.rot_err_deg_per_100m;
      ++row.count;
    }
    if (row.count > 0) {
      row.trans_err_pct /= static_cast<double>(row.count);
      row.rot_err_deg_per_100m /= static_cast<double>(row.count);
    }
    trans_sum += row.trans_err_pct * static_cast<double>(row.count);
    rot_sum += row.rot_err_deg_per_100m * static_cast<double>(row.count);
    report.per_segment.push_back(row);
  }
  report.trans_err_pct = trans_sum / static_cast<double>(segments.size());
  report.rot_err_deg_per_100m = rot_sum / static_cast<double>(segments.size());
  return report;
}

std::vector<SegmentError> error_vs_distance(std::span<const PosePair> pairs,
                                            std::span<const double> segment_lengths,
                                            const MetricOptions& options) {
  if (segment_lengths.empty()) return {};
  return enumerate_segments(pairs, segment_lengths, options);
}

SlipReport slip_profile(const SampleStream& stream, std::int64_t ticks_per_rev,
                        const CalibParams& params, const SlipOptions& options) {
  if (!stream.has_ground_truth_velocity()) {
    raise(Errc::no_ground_truth, "slip profile needs ground truth with velocities");
  }
  const auto& gt = *stream.ground_truth;
  const auto& enc = stream.encoder;
  const double rad_per_tick =
      2.0 * std::numbers::pi / static_cast<double>(ticks_per_rev);

  SlipReport report;
  report.per_sample_slip.reserve(enc.size());
  double sum_f2 = 0.0;
  double sum_l2 = 0.0;
  for (std::size_t i = 0; i + 1 < enc.size(); ++i) {
    const double t = enc[i].t;
    if (t < gt.front().t || t > gt.back().t) continue;
    const GroundTruthSample g = ingest::interpolate_ground_truth(gt, t);
    if (std::hypot(g.vx, g.vy) < options.min_speed) continue;
    const double dt = enc[i + 1].t - enc[i].t;
    const double enc_speed =
        params.radius * rad_per_tick *
        static_cast<double>(enc[i + 1].ticks - enc[i].ticks) / dt;
    // Invert the Eq.-(6) linkage: remove the lever-arm term, rotate into the
    // wheel frame.
    const Eigen::Vector2d lever(-g.omega * params.p_ext.y(),
                                g.omega * params.p_ext.x());
    const Eigen::Vector2d v_wheel =
        se2::rotate(-params.theta_ext, Eigen::Vector2d(g.vx, g.vy) - lever);
    SlipSample s;
    s.t = t;
    s.forward = enc_speed - v_wheel.x();
    s.lateral = -v_wheel.y();
    sum_f2 += s.forward * s.forward;
    sum_l2 += s.lateral * s.lateral;
    report.per_sample_slip.push_back(s);
  }
  if (!report.per_sample_slip.empty()) {
    const double n = static_cast<double>(report.per_sample_slip.size());
    report.rms_forward_slip = std::sqrt(sum_f2 / n);
    report.rms_side_slip = std::sqrt(sum_l2 / n);
  }
  return report;
}

void write_eval_report_csv(const std::filesystem::path& path,
                           const EvalReport& report) {
  std::string buf;
  buf += "length_m,trans_err_pct,rot_err_deg_per_100m,count\n";
  for (const auto& row : report.per_segment) {
    csv::append_number(buf, row.length_m);
    buf += ',';
    csv::append_number(buf, row.trans_err_pct);
    buf += ',';
    csv::append_number(buf, row.rot_err_deg_per_100m);
    buf += ',';
    csv::append_number(buf, static_cast<std::int64_t>(row.count));
    buf += '\n';
  }
  buf += "# aggregate trans_err_pct=";
  csv::append_number(buf, report.trans_err_pct);
  buf += " rot_err_deg_per_100m=";
  csv::append_number(buf, report.rot_err_deg_per_100m);
  buf += '\n';
  csv::write_file(path, buf);
}

void write_slip_csv(const std::filesystem::path& path, const SlipReport& report) {
  std::string buf;
  buf.reserve(report.per_sample_slip.size() * 48 + 96);
  buf += "t,forward_slip_mps,lateral_slip_mps\n";
  for (const auto& s : report.per_sample_slip) {
    csv::append_number(buf, s.t);
    buf += ',';
    csv::append_number(buf, s.forward);
    buf += ',';
    csv::append_number(buf, s.lateral);
    buf += '\n';
  }
  buf += "# rms_forward=";
  csv::append_number(buf, report.rms_forward_slip);
  buf += "\n# rms_side=";
  csv::append_number(buf, report.rms_side_slip);
  buf += '\n';
  csv::write_file(path, buf);
}

}  // namespace og::eval
