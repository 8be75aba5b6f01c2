#include "og/calib.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "og/csv.hpp"
#include "og/errors.hpp"
#include "og/ingest.hpp"

namespace og::calib {

namespace {

constexpr double kMinTurnRate = 1e-3;  // rad/s; below this p_ext is unobservable

double robust_cost(const Eigen::VectorXd& residuals,
                   const std::optional<double>& huber_delta) {
  if (!huber_delta) return 0.5 * residuals.squaredNorm();
  const double delta = *huber_delta;
  double cost = 0.0;
  for (Eigen::Index k = 0; k + 1 < residuals.size(); k += 2) {
    const double norm = std::hypot(residuals[k], residuals[k + 1]);
    cost += norm <= delta ? 0.5 * norm * norm : delta * (norm - 0.5 * delta);
  }
  return cost;
}

/// Per-sample IRLS weights for the Huber loss; 1.0 everywhere for plain
/// squared loss.
void apply_robust_weights(Eigen::VectorXd& residuals,
                          Eigen::Matrix<double, Eigen::Dynamic, 4>& jacobian,
                          double delta) {
  for (Eigen::Index k = 0; k + 1 < residuals.size(); k += 2) {
    const double norm = std::hypot(residuals[k], residuals[k + 1]);
    if (norm <= delta || norm == 0.0) continue;
    const double w = std::sqrt(delta / norm);
    residuals.segment<2>(k) *= w;
    jacobian.block<2, 4>(k, 0) *= w;
  }
}

}  // namespace

Eigen::Vector2d predict_gt_velocity(const CalibParams& params, double wheel_speed,
                                    double omega_gt) {
  const double c = std::cos(params.theta_ext);
  const double s = std::sin(params.theta_ext);
  return {wheel_speed * c - omega_gt * params.p_ext.y(),
          wheel_speed * s + omega_gt * params.p_ext.x()};
}

std::vector<ResidualSample> collect_residual_samples(
    std::span<const SampleStream> streams, std::int64_t ticks_per_rev,
    double reference_radius, double min_wheel_speed) {
  std::vector<ResidualSample> out;
  const double rad_per_tick = 2.0 * std::numbers::pi / static_cast<double>(ticks_per_rev);
  for (const auto& stream : streams) {
    if (!stream.has_ground_truth_velocity()) {
      raise(Errc::no_ground_truth,
            "calibration needs ground truth with velocities");
    }
    const auto& gt = *stream.ground_truth;
    const auto& enc = stream.encoder;
    for (std::size_t i = 0; i + 1 < enc.size(); ++i) {
      const double t = enc[i].t;
      if (t < gt.front().t || t > gt.back().t) continue;
      const double dt = enc[i + 1].t - enc[i].t;
      const double tick_rate =
          rad_per_tick * static_cast<double>(enc[i + 1].ticks - enc[i].ticks) / dt;
      if (std::abs(tick_rate) * reference_radius < min_wheel_speed) continue;
      const GroundTruthSample g = ingest::interpolate_ground_truth(gt, t);
      out.push_back({Eigen::Vector2d(g.vx, g.vy), g.omega, tick_rate});
    }
  }
  return out;
}

Eigen::VectorXd build_residuals(std::span<const ResidualSample> samples,
                                const CalibParams& params) {
  Eigen::VectorXd r(2 * static_cast<Eigen::Index>(samples.size()));
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const auto& s = samples[k];
    r.segment<2>(2 * static_cast<Eigen::Index>(k)) =
        s.v_gt -
        predict_gt_velocity(params, params.radius * s.tick_rate_distance, s.omega_gt);
  }
  return r;
}

void residuals_and_jacobian(std::span<const ResidualSample> samples,
                            const CalibParams& params, Eigen::VectorXd& residuals,
                            Eigen::Matrix<double, Eigen::Dynamic, 4>& jacobian) {
  const Eigen::Index m = 2 * static_cast<Eigen::Index>(samples.size());
  residuals.resize(m);
  jacobian.resize(m, 4);
  const double c = std::cos(params.theta_ext);
  const double s = std::sin(params.theta_ext);
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const auto& smp = samples[k];
    const double a = smp.tick_rate_distance;
    const double w = smp.omega_gt;
    const double speed = params.radius * a;
    const Eigen::Index row = 2 * static_cast<Eigen::Index>(k);
    residuals[row] = smp.v_gt.x() - (speed * c - w * params.p_ext.y());
    residuals[row + 1] = smp.v_gt.y() - (speed * s + w * params.p_ext.x());
    // d(residual)/d(r, px, py, theta) = -d(prediction)
    jacobian(row, 0) = -a * c;
    jacobian(row, 1) = 0.0;
    jacobian(row, 2) = w;
    jacobian(row, 3) = speed * s;
    jacobian(row + 1, 0) = -a * s;
    jacobian(row + 1, 1) = -w;
    jacobian(row + 1, 2) = 0.0;
    jacobian(row + 1, 3) = -speed * c;
  }
}

Report solve(std::span<const SampleStream> streams, std::int64_t ticks_per_rev,
             const CalibParams& init, const SolveOptions& options) {
  if (init.radius <= 0.0) {
    raise(Errc::non_positive_radius, "initial radius must be positive");
  }
  const auto samples = collect_residual_samples(
      streams, ticks_per_rev, init.radius, options.min_wheel_speed);
  if (samples.empty()) {
    raise(Errc::all_samples_static,
          "no samples above " + std::to_string(options.min_wheel_speed) + " m/s");
  }
  if (samples.size() < 2) {
    raise(Errc::insufficient_data, "need at least 2 residual samples");
  }

  double max_turn = 0.0;
  std::size_t turning = 0;
  for (const auto& s : samples) {
    max_turn = std::max(max_turn, std::abs(s.omega_gt));
    if (std::abs(s.omega_gt) > 0.05) ++turning;
  }
  if (max_turn < kMinTurnRate) {
    raise(Errc::degenerate_geometry,
          "no turning in the data; extrinsic translation is unobservable");
  }

  Report report;
  if (static_cast<double>(turning) < 0.02 * static_cast<double>(samples.size())) {
    report.warnings.push_back("low_turning_fraction");
  }

  CalibParams params = init;
  Eigen::VectorXd residuals;
  Eigen::Matrix<double, Eigen::Dynamic, 4> jacobian;
  residuals_and_jacobian(samples, params, residuals, jacobian);
  if (options.huber_delta) {
    apply_robust_weights(residuals, jacobian, *options.huber_delta);
  }
  double cost = robust_cost(build_residuals(samples, params), options.huber_delta);
  report.cost_history.push_back(cost);

  double lambda = 1e-3;
  bool converged = false;
  int iterations = 0;
  while (iterations < options.max_iterations && !converged) {
    ++iterations;
    const Eigen::Matrix4d jtj = jacobian.transpose() * jacobian;
    const Eigen::Vector4d jtr = jacobian.transpose() * residuals;
    Eigen::Matrix4d damped = jtj;
    damped.diagonal() += lambda * jtj.diagonal();
    const Eigen::Vector4d step = damped.ldlt().solve(-jtr);

    CalibParams candidate = params;
    candidate.radius += step[0];
    candidate.p_ext.x() += step[1];
    candidate.p_ext.y() += step[2];
    candidate.theta_ext += step[3];

    bool accept = false;
    double new_cost = cost;
    if (candidate.radius > 0.0) {
      new_cost = robust_cost(build_residuals(samples, candidate), options.huber_delta);
      accept = new_cost <= cost;
    }
    if (accept) {
      if (new_cost > cost) {
        raise(Errc::internal, "cost increased on an accepted step");
      }
      const double decrease = cost - new_cost;
      params = candidate;
      cost = new_cost;
      report.cost_history.push_back(cost);
      residuals_and_jacobian(samples, params, residuals, jacobian);
      if (options.huber_delta) {
        apply_robust_weights(residuals, jacobian, *options.huber_delta);
      }
      lambda = std::max(lambda * 0.2, 1e-12);
      if (decrease <= options.cost_rel_tol * std::max(cost, 1e-300) ||
          step.norm() < options.step_tol) {
        converged = true;
      }
    } else {
      lambda *= 10.0;
      if (step.norm() < options.step_tol) {
        converged = true;  // stalled at a (possibly damped) stationary point
      } else if (lambda > 1e14) {
        break;
      }
    }
  }

  if (!converged) {
    raise(Errc::no_convergence,
          "no convergence after " + std::to_string(iterations) + " iterations");
  }
  if (params.radius <= 0.0) {
    raise(Errc::non_positive_radius, "solution left the valid radius domain");
  }

  params.theta_ext = normalize_angle(params.theta_ext);
  report.params = params;
  report.iterations = iterations;
  report.converged = true;

  const Eigen::VectorXd raw = build_residuals(samples, params);
  report.rms_residual =
      std::sqrt(raw.squaredNorm() / static_cast<double>(raw.size()));

  // Standard errors from the unweighted normal equations at the solution.
  residuals_and_jacobian(samples, params, residuals, jacobian);
  const Eigen::Index dof = raw.size() - 4;
  if (dof > 0) {
    const double sigma2 = raw.squaredNorm() / static_cast<double>(dof);
    const Eigen::Matrix4d cov =
        sigma2 * (jacobian.transpose() * jacobian).inverse();
    report.std_errors = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  }
  return report;
}

void write_calib_file(const std::filesystem::path& path, const Report& report) {
  std::string buf;
  buf += "radius_m=";
  csv::append_number(buf, report.params.radius);
  buf += "\np_ext_x_m=";
  csv::append_number(buf, report.params.p_ext.x());
  buf += "\np_ext_y_m=";
  csv::append_number(buf, report.params.p_ext.y());
  buf += "\ntheta_ext_rad=";
  csv::append_number(buf, report.params.theta_ext);
  buf += "\nrms_residual_mps=";
  csv::append_number(buf, report.rms_residual);
  buf += "\nconverged=";
  buf += report.converged ? "true" : "false";
  buf += '\n';
  csv::write_file(path, buf);
}

CalibParams read_calib_file(const std::filesystem::path& path) {
  const std::string content = csv::read_file(path);
  CalibParams params;
  bool have_radius = false;
  std::size_t pos = 0;
  while (pos < content.size()) {
    std::size_t nl = content.find('\n', pos);
    if (nl == std::string::npos) nl = content.size();
    const std::string_view line(content.data() + pos, nl - pos);
    pos = nl + 1;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) continue;
    const std::string_view key = line.substr(0, eq);
    const std::string value(line.substr(eq + 1));
    try {
      if (key == "radius_m") {
        params.radius = std::stod(value);
        have_radius = true;
      } else if (key == "p_ext_x_m") {
        params.p_ext.x() = std::stod(value);
      } else if (key == "p_ext_y_m") {
        params.p_ext.y() = std::stod(value);
      } else if (key == "theta_ext_rad") {
        params.theta_ext = std::stod(value);
      }
    } catch (const std::exception&) {
      raise(Errc::malformed_row,
            path.string() + ": bad value for " + std::string(key));
    }
  }
  if (!have_radius || !params.valid()) {
    raise(Errc::malformed_row, path.string() + ": missing or invalid radius_m");
  }
  return params;
}

}  // namespace og::calib
