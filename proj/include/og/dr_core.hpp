#pragma once

#include <cstdint>
#include <span>

#include <Eigen/Core>

#include "og/types.hpp"

namespace og::dr {

/// Below this heading increment the arc displacement switches to its
/// second-order Taylor form; the two branches agree to better than 1e-12
/// relative at the threshold.
inline constexpr double kSmallHeading = 1e-6;

/// Distance travelled by the wheel center for a tick delta: 2*pi*r*(b-a)/N.
/// Sign follows the tick delta.
double tick_distance(const WheelModel& model, std::int64_t ticks_a,
                     std::int64_t ticks_b);

/// Trapezoidal heading increment (omega_a + omega_b) * dt / 2.
double heading_increment(double omega_a, double omega_b, double dt);

/// Body-frame displacement of a circular arc of length d turning by dtheta:
/// (d/dtheta) * [sin dtheta, 1 - cos dtheta], with the straight-line limit
/// handled by a Taylor continuation.
Eigen::Vector2d arc_displacement(double d, double dtheta);

struct IntegrateOptions {
  /// Treat every tick delta as forward motion (unsigned counters that cannot
  /// indicate reverse).
  bool forward_only = false;
};

/// Sequential dead reckoning over the stream: per interval, bias-corrected
/// trapezoidal heading increment, tick distance, exact-arc displacement
/// rotated into the world frame. First pose is the identity at the first
/// encoder timestamp. `bias_series` holds one bias value per sample.
Trajectory integrate(const SampleStream& stream, const WheelModel& model,
                     std::span<const double> bias_series,
                     const IntegrateOptions& options = {});

}  // namespace og::dr
