#pragma once

#include <Eigen/Core>

#include "og/types.hpp"

namespace og::se2 {

/// Minimal planar rigid transform, (R(yaw), t).
struct Transform {
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;
};

inline Eigen::Vector2d rotate(double yaw, const Eigen::Vector2d& v) {
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  return {c * v.x() - s * v.y(), s * v.x() + c * v.y()};
}

Transform compose(const Transform& a, const Transform& b);
Transform inverse(const Transform& a);

/// a^-1 * b, the motion from a to b.
Transform between(const Transform& a, const Transform& b);

inline Transform transform_of(const Pose2& p) { return {p.x, p.y, p.yaw}; }

}  // namespace og::se2
