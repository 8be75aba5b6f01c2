#include "og/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "og/csv.hpp"
#include "og/errors.hpp"
#include "og/se2.hpp"

namespace og::ingest {

namespace {

void check_strictly_increasing(double prev, double t, const csv::Reader& reader) {
  if (!(t > prev)) {
    raise(Errc::non_monotonic_time,
          reader.path().string() + ":" + std::to_string(reader.line()) +
              ": time " + std::to_string(t) + " does not increase (previous " +
              std::to_string(prev) + ")");
  }
}

}  // namespace

std::vector<EncoderSample> parse_encoder_csv(const std::filesystem::path& path) {
  csv::Reader reader(path, "t,ticks");
  const bool signed_ticks = [&] {
    auto it = reader.directives().find("ticks");
    return it != reader.directives().end() && it->second == "signed";
  }();

  std::vector<EncoderSample> out;
  while (reader.next()) {
    if (reader.field_count() != 2) reader.fail("expected 2 fields");
    EncoderSample s;
    s.t = reader.parse_double(0);
    s.ticks = reader.parse_int(1);
    if (!out.empty()) {
      check_strictly_increasing(out.back().t, s.t, reader);
      if (!signed_ticks && s.ticks < out.back().ticks) {
        raise(Errc::ticks_decreasing,
              path.string() + ":" + std::to_string(reader.line()) +
                  ": counter decreases without a '#ticks=signed' declaration");
      }
    }
    out.push_back(s);
  }
  if (out.empty()) raise(Errc::empty_file, path.string() + ": no data rows");
  return out;
}

std::vector<GyroSample> parse_gyro_csv(const std::filesystem::path& path,
                                       const GyroLimits& limits) {
  csv::Reader reader(path, "t,omega");
  std::vector<GyroSample> out;
  while (reader.next()) {
    if (reader.field_count() != 2) reader.fail("expected 2 fields");
    GyroSample s;
    s.t = reader.parse_double(0);
    s.omega = reader.parse_double(1);
    if (std::abs(s.omega) >= limits.max_abs_omega) {
      reader.fail("omega " + std::to_string(s.omega) +
                  " exceeds sanity bound " + std::to_string(limits.max_abs_omega));
    }
    if (!out.empty()) check_strictly_increasing(out.back().t, s.t, reader);
    out.push_back(s);
  }
  if (out.empty()) raise(Errc::empty_file, path.string() + ": no data rows");
  return out;
}

std::vector<GroundTruthSample> parse_ground_truth_csv(
    const std::filesystem::path& path) {
  csv::Reader reader(path, {"t,x,y,yaw,vx,vy,omega", "t,x,y,yaw"});
  const bool with_velocity = reader.matched_header() == 0;

  std::vector<GroundTruthSample> out;
  while (reader.next()) {
    if (reader.field_count() != (with_velocity ? 7 : 4)) {
      reader.fail(with_velocity ? "expected 7 fields" : "expected 4 fields");
    }
    GroundTruthSample s;
    s.t = reader.parse_double(0);
    s.x = reader.parse_double(1);
    s.y = reader.parse_double(2);
    s.yaw = normalize_angle(reader.parse_double(3));
    if (with_velocity) {
      s.vx = reader.parse_double(4);
      s.vy = reader.parse_double(5);
      s.omega = reader.parse_double(6);
      s.velocity_source = VelocitySource::measured;
    }
    if (!out.empty()) check_strictly_increasing(out.back().t, s.t, reader);
    out.push_back(s);
  }
  if (out.empty()) raise(Errc::empty_file, path.string() + ": no data rows");
  if (!with_velocity) {
    for (auto& s : out) s.velocity_source = VelocitySource::differentiated;
  }
  return out;
}

Trajectory parse_trajectory_csv(const std::filesystem::path& path) {
  csv::Reader reader(path, "t,x,y,yaw");
  Trajectory out;
  while (reader.next()) {
    if (reader.field_count() != 4) reader.fail("expected 4 fields");
    Pose2 p;
    p.t = reader.parse_double(0);
    p.x = reader.parse_double(1);
    p.y = reader.parse_double(2);
    p.yaw = normalize_angle(reader.parse_double(3));
    if (!out.poses.empty()) check_strictly_increasing(out.poses.back().t, p.t, reader);
    out.poses.push_back(p);
  }
  if (out.poses.empty()) raise(Errc::empty_file, path.string() + ": no data rows");
  return out;
}

std::vector<GyroSample> resample_gyro(std::span<const GyroSample> gyro,
                                      std::span<const double> target_times) {
  if (gyro.size() < 2) {
    raise(Errc::insufficient_data,
          "resample needs at least 2 gyro samples, got " +
              std::to_string(gyro.size()));
  }
  std::vector<GyroSample> out;
  out.reserve(target_times.size());
  std::size_t j = 0;  // targets are sorted in every caller; scan forward
  for (const double t : target_times) {
    if (t < gyro.front().t || t > gyro.back().t) {
      raise(Errc::out_of_range,
            "target time " + std::to_string(t) + " outside gyro span [" +
                std::to_string(gyro.front().t) + ", " +
                std::to_string(gyro.back().t) + "]");
    }
    if (t < gyro[j].t) j = 0;  // non-sorted targets: restart the scan
    while (j + 2 < gyro.size() && gyro[j + 1].t <= t) ++j;
    const GyroSample& a = gyro[j];
    const GyroSample& b = gyro[j + 1];
    double omega;
    if (t == a.t) {
      omega = a.omega;
    } else if (t == b.t) {
      omega = b.omega;
    } else {
      const double u = (t - a.t) / (b.t - a.t);
      omega = a.omega + u * (b.omega - a.omega);
    }
    out.push_back({t, omega});
  }
  return out;
}

namespace {

/// Body-frame velocities from poses: central differences of position rotated
/// into the body frame, omega from unwrapped yaw. Endpoints one-sided.
void differentiate_ground_truth(std::vector<GroundTruthSample>& gt) {
  const std::size_t n = gt.size();
  if (n < 2) {
    raise(Errc::insufficient_data,
          "cannot differentiate ground truth with fewer than 2 samples");
  }
  std::vector<double> unwrapped(n);
  unwrapped[0] = gt[0].yaw;
  for (std::size_t i = 1; i < n; ++i) {
    unwrapped[i] = unwrapped[i - 1] + normalize_angle(gt[i].yaw - gt[i - 1].yaw);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i == 0 ? 0 : i - 1;
    const std::size_t hi = i + 1 == n ? i : i + 1;
    const double dt = gt[hi].t - gt[lo].t;
    const Eigen::Vector2d world_v((gt[hi].x - gt[lo].x) / dt,
                                  (gt[hi].y - gt[lo].y) / dt);
    const Eigen::Vector2d body_v = se2::rotate(-gt[i].yaw, world_v);
    gt[i].vx = body_v.x();
    gt[i].vy = body_v.y();
    gt[i].omega = (unwrapped[hi] - unwrapped[lo]) / dt;
    gt[i].velocity_source = VelocitySource::differentiated;
  }
}

}  // namespace

SampleStream build_stream(std::vector<EncoderSample> encoder,
                          const std::vector<GyroSample>& gyro,
                          std::optional<std::vector<GroundTruthSample>> ground_truth) {
  if (encoder.empty()) {
    raise(Errc::insufficient_data, "encoder stream is empty");
  }
  if (gyro.size() < 2) {
    raise(Errc::insufficient_data, "need at least 2 gyro samples");
  }
  if (gyro.front().t > encoder.front().t || gyro.back().t < encoder.back().t) {
    raise(Errc::span_mismatch,
          "gyro span [" + std::to_string(gyro.front().t) + ", " +
              std::to_string(gyro.back().t) + "] does not cover encoder span [" +
              std::to_string(encoder.front().t) + ", " +
              std::to_string(encoder.back().t) + "]");
  }

  std::vector<double> times;
  times.reserve(encoder.size());
  for (const auto& s : encoder) times.push_back(s.t);

  SampleStream stream;
  stream.gyro_on_encoder_grid = resample_gyro(gyro, times);
  stream.encoder = std::move(encoder);
  if (ground_truth) {
    if (!ground_truth->empty() &&
        ground_truth->front().velocity_source == VelocitySource::differentiated) {
      differentiate_ground_truth(*ground_truth);
    }
    stream.ground_truth = std::move(ground_truth);
  }
  return stream;
}

GroundTruthSample interpolate_ground_truth(std::span<const GroundTruthSample> gt,
                                           double t) {
  if (gt.size() < 2) {
    raise(Errc::insufficient_data, "need at least 2 ground-truth samples");
  }
  if (t < gt.front().t || t > gt.back().t) {
    raise(Errc::out_of_range,
          "time " + std::to_string(t) + " outside ground-truth span");
  }
  auto it = std::lower_bound(
      gt.begin(), gt.end(), t,
      [](const GroundTruthSample& s, double value) { return s.t < value; });
  if (it == gt.begin()) return gt.front();
  if (it->t == t) return *it;
  const GroundTruthSample& b = *it;
  const GroundTruthSample& a = *(it - 1);
  const double u = (t - a.t) / (b.t - a.t);

  GroundTruthSample s;
  s.t = t;
  s.x = a.x + u * (b.x - a.x);
  s.y = a.y + u * (b.y - a.y);
  s.yaw = normalize_angle(a.yaw + u * normalize_angle(b.yaw - a.yaw));
  s.vx = a.vx + u * (b.vx - a.vx);
  s.vy = a.vy + u * (b.vy - a.vy);
  s.omega = a.omega + u * (b.omega - a.omega);
  s.velocity_source = a.velocity_source;
  return s;
}

void write_encoder_csv(const std::filesystem::path& path,
                       std::span<const EncoderSample> samples,
                       bool signed_ticks) {
  std::string buf;
  buf.reserve(samples.size() * 24 + 32);
  if (signed_ticks) buf += "#ticks=signed\n";
  buf += "t,ticks\n";
  for (const auto& s : samples) {
    csv::append_number(buf, s.t);
    buf += ',';
    csv::append_number(buf, s.ticks);
    buf += '\n';
  }
  csv::write_file(path, buf);
}

void write_gyro_csv(const std::filesystem::path& path,
                    std::span<const GyroSample> samples) {
  std::string buf;
  buf.reserve(samples.size() * 28 + 16);
  buf += "t,omega\n";
  for (const auto& s : samples) {
    csv::append_number(buf, s.t);
    buf += ',';
    csv::append_number(buf, s.omega);
    buf += '\n';
  }
  csv::write_file(path, buf);
}

void write_ground_truth_csv(const std::filesystem::path& path,
                            std::span<const GroundTruthSample> samples) {
  std::string buf;
  buf.reserve(samples.size() * 96 + 32);
  buf += "t,x,y,yaw,vx,vy,omega\n";
  for (const auto& s : samples) {
    csv::append_number(buf, s.t);
    buf += ',';
    csv::append_number(buf, s.x);
    buf += ',';
    csv::append_number(buf, s.y);
    buf += ',';
    csv::append_number(buf, s.yaw);
    buf += ',';
    csv::append_number(buf, s.vx);
    buf += ',';
    csv::append_number(buf, s.vy);
    buf += ',';
    csv::append_number(buf, s.omega);
    buf += '\n';
  }
  csv::write_file(path, buf);
}

void write_trajectory_csv(const std::filesystem::path& path,
                          const Trajectory& trajectory) {
  std::string buf;
  buf.reserve(trajectory.poses.size() * 64 + 16);
  buf += "t,x,y,yaw\n";
  for (const auto& p : trajectory.poses) {
    csv::append_number(buf, p.t);
    buf += ',';
    csv::append_number(buf, p.x);
    buf += ',';
    csv::append_number(buf, p.y);
    buf += ',';
    csv::append_number(buf, p.yaw);
    buf += '\n';
  }
  csv::write_file(path, buf);
}

}  // namespace og::ingest
