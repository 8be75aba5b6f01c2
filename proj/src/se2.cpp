#include "og/se2.hpp"

#include <cmath>
#include <numbers>

namespace og {

double normalize_angle(double radians) {
  double r = std::remainder(radians, 2.0 * std::numbers::pi);
  if (r <= -std::numbers::pi) r += 2.0 * std::numbers::pi;
  return r;
}

double WheelModel::meters_per_tick() const {
  return 2.0 * std::numbers::pi * radius / static_cast<double>(ticks_per_rev);
}

double Trajectory::path_length() const {
  double total = 0.0;
  for (std::size_t i = 1; i < poses.size(); ++i) {
    total += std::hypot(poses[i].x - poses[i - 1].x, poses[i].y - poses[i - 1].y);
  }
  return total;
}

bool CalibParams::valid() const {
  return radius > 0.0 && std::isfinite(radius) && p_ext.allFinite() &&
         std::isfinite(theta_ext);
}

namespace se2 {

Transform compose(const Transform& a, const Transform& b) {
  const double c = std::cos(a.yaw);
  const double s = std::sin(a.yaw);
  return {a.x + c * b.x - s * b.y, a.y + s * b.x + c * b.y,
          normalize_angle(a.yaw + b.yaw)};
}

Transform inverse(const Transform& a) {
  const double c = std::cos(a.yaw);
  const double s = std::sin(a.yaw);
  return {-(c * a.x + s * a.y), -(-s * a.x + c * a.y), normalize_angle(-a.yaw)};
}

Transform between(const Transform& a, const Transform& b) {
  return compose(inverse(a), b);
}

}  // namespace se2
}  // namespace og
