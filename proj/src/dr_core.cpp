#include "og/dr_core.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "og/errors.hpp"

namespace og::dr {

double tick_distance(const WheelModel& model, std::int64_t ticks_a,
                     std::int64_t ticks_b) {
  return model.meters_per_tick() * static_cast<double>(ticks_b - ticks_a);
}

double heading_increment(double omega_a, double omega_b, double dt) {
  if (!(dt > 0.0)) {
    raise(Errc::non_positive_dt, "dt must be positive, got " + std::to_string(dt));
  }
  return 0.5 * (omega_a + omega_b) * dt;
}

Eigen::Vector2d arc_displacement(double d, double dtheta) {
  if (std::abs(dtheta) < kSmallHeading) {
    // Second-order Taylor of sin(x)/x and (1-cos(x))/x.
    return {d * (1.0 - dtheta * dtheta / 6.0), d * dtheta * 0.5};
  }
  // 1 - cos(x) as 2*sin^2(x/2) keeps the small-angle side of the branch
  // accurate to a few ulps.
  const double half_sin = std::sin(0.5 * dtheta);
  return {d * std::sin(dtheta) / dtheta, d * 2.0 * half_sin * half_sin / dtheta};
}

Trajectory integrate(const SampleStream& stream, const WheelModel& model,
                     std::span<const double> bias_series,
                     const IntegrateOptions& options) {
  const std::size_t n = stream.size();
  if (bias_series.size() != n || stream.gyro_on_encoder_grid.size() != n) {
    raise(Errc::length_mismatch,
          "bias series (" + std::to_string(bias_series.size()) +
              ") and gyro grid (" + std::to_string(stream.gyro_on_encoder_grid.size()) +
              ") must match the encoder length (" + std::to_string(n) + ")");
  }
  if (!model.valid()) {
    raise(Errc::invalid_argument, "wheel model outside sanity bounds");
  }

  Trajectory out;
  out.poses.reserve(n);
  if (n == 0) return out;

  Pose2 pose;
  pose.t = stream.encoder.front().t;
  out.poses.push_back(pose);

  const double meters_per_tick = model.meters_per_tick();
  double x = 0.0, y = 0.0, yaw = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double dt = stream.encoder[i + 1].t - stream.encoder[i].t;
    const double omega_a = stream.gyro_on_encoder_grid[i].omega - bias_series[i];
    const double omega_b =
        stream.gyro_on_encoder_grid[i + 1].omega - bias_series[i + 1];
    const double dtheta = heading_increment(omega_a, omega_b, dt);
    double d = meters_per_tick *
               static_cast<double>(stream.encoder[i + 1].ticks -
                                   stream.encoder[i].ticks);
    if (options.forward_only) d = std::abs(d);

    const Eigen::Vector2d local = arc_displacement(d, dtheta);
    const double c = std::cos(yaw);
    const double s = std::sin(yaw);
    x += c * local.x() - s * local.y();
    y += s * local.x() + c * local.y();
    yaw = normalize_angle(yaw + dtheta);

    out.poses.push_back({stream.encoder[i + 1].t, x, y, yaw});
  }
  return out;
}

}  // namespace og::dr
