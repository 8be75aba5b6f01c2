#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "og/types.hpp"

namespace og::calib {

/// One velocity-matching constraint: ground-truth body velocity against the
/// encoder tick rate over the interval starting at the same time.
/// `tick_rate_distance` is (2*pi/N) * delta_ticks / delta_t, i.e. wheel speed
/// per meter of radius.
struct ResidualSample {
  Eigen::Vector2d v_gt = Eigen::Vector2d::Zero();  // m/s
  double omega_gt = 0.0;                            // rad/s
  double tick_rate_distance = 0.0;                  // 1/s
};

struct SolveOptions {
  int max_iterations = 100;
  double cost_rel_tol = 1e-10;
  double step_tol = 1e-12;
  double min_wheel_speed = 0.1;        // m/s, static-sample exclusion
  std::optional<double> huber_delta;   // m/s; unset = plain squared loss
};

struct Report {
  CalibParams params;
  double rms_residual = 0.0;  // m/s over scalar residual rows
  int iterations = 0;
  bool converged = false;
  Eigen::Vector4d std_errors = Eigen::Vector4d::Zero();  // (r, px, py, theta)
  std::vector<double> cost_history;  // accepted-step costs, non-increasing
  std::vector<std::string> warnings;
};

/// Ground-truth body velocity predicted from the wheel speed:
/// R(theta_ext) * [wheel_speed, 0]^T + omega_gt * [-p_y, p_x]^T.
Eigen::Vector2d predict_gt_velocity(const CalibParams& params, double wheel_speed,
                                    double omega_gt);

/// Extracts velocity-matching samples from the streams. Near-static samples
/// (|wheel speed| below min_wheel_speed at the reference radius) are dropped.
std::vector<ResidualSample> collect_residual_samples(
    std::span<const SampleStream> streams, std::int64_t ticks_per_rev,
    double reference_radius, double min_wheel_speed);

/// Stacked residual vector, two rows per sample: v_gt - prediction.
Eigen::VectorXd build_residuals(std::span<const ResidualSample> samples,
                                const CalibParams& params);

/// Residuals plus the analytic Jacobian wrt (radius, p_x, p_y, theta_ext).
void residuals_and_jacobian(std::span<const ResidualSample> samples,
                            const CalibParams& params, Eigen::VectorXd& residuals,
                            Eigen::Matrix<double, Eigen::Dynamic, 4>& jacobian);

/// Levenberg-Marquardt over (radius, p_ext, theta_ext) with all streams
/// concatenated into one residual vector.
Report solve(std::span<const SampleStream> streams, std::int64_t ticks_per_rev,
             const CalibParams& init, const SolveOptions& options = {});

void write_calib_file(const std::filesystem::path& path, const Report& report);
CalibParams read_calib_file(const std::filesystem::path& path);

}  // namespace og::calib
