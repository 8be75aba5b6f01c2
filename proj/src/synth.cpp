#include "og/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "og/csv.hpp"
#include "og/errors.hpp"
#include "og/se2.hpp"

namespace og::synth {

namespace {

constexpr double kTickSnapTol = 1e-6;  // ticks/sample considered integral
constexpr double kFloorGuard = 1e-9;   // absorbs roundoff at tick boundaries
constexpr int kBlendSubsteps = 32;     // pose substeps inside yaw ramps

/// Advances a pose by a constant body twist (v, omega) over h seconds.
void twist_step(double& x, double& y, double& yaw, const Eigen::Vector2d& v_body,
                double omega, double h) {
  const double phi = omega * h;
  double a, b;  // integral of R(omega s) over [0, h], divided by h
  if (std::abs(phi) < 1e-9) {
    a = 1.0 - phi * phi / 6.0;
    b = 0.5 * phi;
  } else {
    const double half_sin = std::sin(0.5 * phi);
    a = std::sin(phi) / phi;
    b = 2.0 * half_sin * half_sin / phi;
  }
  const Eigen::Vector2d local(h * (a * v_body.x() - b * v_body.y()),
                              h * (b * v_body.x() + a * v_body.y()));
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  x += c * local.x() - s * local.y();
  y += s * local.x() + c * local.y();
  yaw = normalize_angle(yaw + phi);
}

/// Per-segment state after snapping the script onto the sample grid.
struct SegPlan {
  std::size_t first = 0;      // first sample index
  std::size_t intervals = 0;  // number of sample intervals
  double v = 0.0;             // wheel forward speed (commanded)
  double omega = 0.0;         // target yaw rate
  double omega_prev = 0.0;    // yaw rate at segment entry
  std::size_t blend = 0;      // ramp length in samples
  double forward_slip = 0.0;
  double lateral_slip = 0.0;
  double ticks_per_sample = 0.0;
  double start_ticks = 0.0;   // cumulative real ticks at `first`

  double omega_at(std::size_t local) const {
    if (blend > 0 && local < blend) {
      return omega_prev + (omega - omega_prev) * static_cast<double>(local) /
                              static_cast<double>(blend);
    }
    return omega;
  }
};

std::vector<SegPlan> plan_script(const ManeuverScript& script,
                                 const NoiseSpec& noise) {
  if (script.segments.empty()) {
    raise(Errc::invalid_script, "script has no segments");
  }
  if (script.sample_rate < 10.0) {
    raise(Errc::invalid_script, "sample rate must be at least 10 Hz");
  }
  if (script.yaw_blend_s < 0.0) {
    raise(Errc::invalid_script, "yaw blend must be non-negative");
  }
  if (noise.gyro_noise_std < 0.0 || noise.gyro_bias_rw_std < 0.0 ||
      !noise.wheel().valid() || !noise.extrinsics.valid()) {
    raise(Errc::invalid_script, "invalid noise specification");
  }

  const double dt = 1.0 / script.sample_rate;
  const double ticks_per_meter =
      static_cast<double>(noise.ticks_per_rev) /
      (2.0 * std::numbers::pi * noise.extrinsics.radius);

  std::vector<SegPlan> plan;
  plan.reserve(script.segments.size());
  std::size_t cursor = 0;
  double prev_v = 0.0, prev_omega = 0.0, ticks = 0.0;
  for (const Segment& seg : script.segments) {
    if (!(seg.duration > 0.0)) {
      raise(Errc::invalid_script, "segment duration must be positive");
    }
    SegPlan p;
    p.first = cursor;
    p.intervals = static_cast<std::size_t>(
        std::llround(seg.duration * script.sample_rate));
    if (p.intervals == 0) {
      raise(Errc::invalid_script, "segment shorter than one sample interval");
    }
    switch (seg.kind) {
      case Segment::Kind::straight:
        if (seg.speed < 0.0) raise(Errc::invalid_script, "negative speed");
        p.v = seg.speed;
        p.omega = 0.0;
        break;
      case Segment::Kind::arc:
        if (seg.speed < 0.0) raise(Errc::invalid_script, "negative speed");
        p.v = seg.speed;
        p.omega = seg.yaw_rate;
        break;
      case Segment::Kind::stop:
        break;
      case Segment::Kind::slip_burst:
        p.v = prev_v;
        p.omega = prev_omega;
        p.forward_slip = seg.forward_slip;
        p.lateral_slip = seg.lateral_slip;
        break;
    }
    p.omega_prev = prev_omega;
    if (p.omega != prev_omega && script.yaw_blend_s > 0.0) {
      p.blend = std::min<std::size_t>(
          p.intervals,
          static_cast<std::size_t>(
              std::llround(script.yaw_blend_s * script.sample_rate)));
    }
    // Encoder rate; near-integral ticks/sample snap exactly so that aligned
    // scripts produce quantization-free counters.
    double tps = (p.v + p.forward_slip) * dt * ticks_per_meter;
    if (std::abs(tps - std::round(tps)) < kTickSnapTol) tps = std::round(tps);
    p.ticks_per_sample = tps;
    p.start_ticks = ticks;
    ticks += tps * static_cast<double>(p.intervals);

    prev_v = p.v;
    prev_omega = p.omega;
    cursor += p.intervals;
    plan.push_back(p);
  }
  return plan;
}

}  // namespace

Segment Segment::straight(double speed, double duration) {
  Segment s;
  s.kind = Kind::straight;
  s.speed = speed;
  s.duration = duration;
  return s;
}

Segment Segment::arc(double speed, double yaw_rate, double duration) {
  Segment s;
  s.kind = Kind::arc;
  s.speed = speed;
  s.yaw_rate = yaw_rate;
  s.duration = duration;
  return s;
}

Segment Segment::stop(double duration) {
  Segment s;
  s.kind = Kind::stop;
  s.duration = duration;
  return s;
}

Segment Segment::slip_burst(double duration, double forward_slip,
                            double lateral_slip) {
  Segment s;
  s.kind = Kind::slip_burst;
  s.duration = duration;
  s.forward_slip = forward_slip;
  s.lateral_slip = lateral_slip;
  return s;
}

double ManeuverScript::total_duration() const {
  double total = 0.0;
  for (const auto& s : segments) total += s.duration;
  return total;
}

SimResult simulate(const ManeuverScript& script, const NoiseSpec& noise) {
  const auto plan = plan_script(script, noise);
  const double dt = 1.0 / script.sample_rate;
  const std::size_t n = plan.back().first + plan.back().intervals + 1;

  const double theta_ext = noise.extrinsics.theta_ext;
  const Eigen::Vector2d p_ext = noise.extrinsics.p_ext;

  std::mt19937_64 rng(script.seed);
  std::normal_distribution<double> unit(0.0, 1.0);

  SimResult out;
  out.stream.encoder.reserve(n);
  out.stream.gyro_on_encoder_grid.reserve(n);
  out.true_bias.reserve(n);
  out.true_slip.reserve(n);
  std::vector<GroundTruthSample> gt;
  gt.reserve(n);

  // Body velocity in the ground-truth body frame per the Eq.-(6) linkage:
  // R(theta) * [v, -lateral_slip]^T + omega * [-p_y, p_x]^T.
  const auto body_velocity = [&](const SegPlan& p, double omega) {
    const Eigen::Vector2d wheel_v(p.v, -p.lateral_slip);
    Eigen::Vector2d v = se2::rotate(theta_ext, wheel_v);
    v.x() += -omega * p_ext.y();
    v.y() += omega * p_ext.x();
    return v;
  };

  double x = 0.0, y = 0.0, yaw = 0.0;
  double bias_rw = 0.0;
  std::size_t seg = 0;
  for (std::size_t k = 0; k < n; ++k) {
    // The segment owning sample k (final sample belongs to the last segment).
    while (seg + 1 < plan.size() && k >= plan[seg].first + plan[seg].intervals) {
      ++seg;
    }
    const SegPlan& p = plan[seg];
    const std::size_t local = k - p.first;
    const double t = static_cast<double>(k) * dt;
    const double omega_true = p.omega_at(local);

    const double bias = noise.gyro_bias_init + noise.gyro_bias_drift * t + bias_rw;
    double omega_meas = omega_true + bias;
    if (noise.gyro_noise_std > 0.0) {
      omega_meas += noise.gyro_noise_std * unit(rng);
    }
    if (noise.gyro_bias_rw_std > 0.0) {
      bias_rw += noise.gyro_bias_rw_std * std::sqrt(dt) * unit(rng);
    }

    const double real_ticks =
        p.start_ticks + p.ticks_per_sample * static_cast<double>(local);
    const auto ticks =
        static_cast<std::int64_t>(std::floor(real_ticks + kFloorGuard));

    const Eigen::Vector2d v_body = body_velocity(p, omega_true);

    out.stream.encoder.push_back({t, ticks});
    out.stream.gyro_on_encoder_grid.push_back({t, omega_meas});
    out.true_bias.push_back(bias);
    out.true_slip.push_back({t, p.forward_slip, p.lateral_slip});
    GroundTruthSample g;
    g.t = t;
    g.x = x;
    g.y = y;
    g.yaw = yaw;
    g.vx = v_body.x();
    g.vy = v_body.y();
    g.omega = omega_true;
    g.velocity_source = VelocitySource::measured;
    gt.push_back(g);

    // Advance the pose over [t_k, t_k+1] using this segment's motion law.
    if (k + 1 == n) break;
    const double omega_next = p.omega_at(local + 1);
    if (omega_next == omega_true) {
      twist_step(x, y, yaw, v_body, omega_true, dt);
    } else {
      // Yaw ramp: midpoint twists over fine substeps (exact for the heading,
      // far below quantization for the position).
      const double h = dt / kBlendSubsteps;
      for (int m = 0; m < kBlendSubsteps; ++m) {
        const double frac = (static_cast<double>(m) + 0.5) / kBlendSubsteps;
        const double omega_mid = omega_true + frac * (omega_next - omega_true);
        twist_step(x, y, yaw, body_velocity(p, omega_mid), omega_mid, h);
      }
    }
  }

  out.stream.ground_truth = std::move(gt);
  return out;
}

ManeuverScript scale_slip(ManeuverScript script, double factor) {
  for (auto& seg : script.segments) {
    if (seg.kind == Segment::Kind::slip_burst) {
      seg.forward_slip *= factor;
      seg.lateral_slip *= factor;
    }
  }
  return script;
}

namespace {

using S = Segment;

ManeuverScript no_slip_loop() {
  ManeuverScript sc;
  sc.sample_rate = 100.0;
  sc.seed = 11;
  sc.yaw_blend_s = 0.4;
  sc.segments.push_back(S::stop(2.5));
  for (int loop = 0; loop < 2; ++loop) {
    sc.segments.push_back(S::straight(6.5, 48.0));
    sc.segments.push_back(S::arc(5.0, 0.35, 9.0));
    sc.segments.push_back(S::straight(6.5, 48.0));
    sc.segments.push_back(S::arc(5.0, -0.35, 9.0));
    sc.segments.push_back(S::straight(7.0, 45.0));
    sc.segments.push_back(S::arc(4.5, 0.45, 7.0));
    sc.segments.push_back(S::straight(6.5, 30.0));
    sc.segments.push_back(S::arc(5.0, -0.30, 10.5));
    sc.segments.push_back(S::straight(6.0, 15.0));
  }
  sc.segments.push_back(S::stop(2.5));
  return sc;  // ~2.8 km in ~7.5 min, campus-loop scale
}

ManeuverScript stop_and_go() {
  ManeuverScript sc;
  sc.sample_rate = 100.0;
  sc.seed = 12;
  sc.yaw_blend_s = 0.4;
  sc.segments.push_back(S::stop(2.5));
  for (int leg = 0; leg < 5; ++leg) {
    const double sign = leg % 2 == 0 ? 1.0 : -1.0;
    sc.segments.push_back(S::straight(5.0, 20.0));
    sc.segments.push_back(S::arc(4.0, sign * 0.25, 12.0));
    sc.segments.push_back(S::straight(5.0, 25.5));
    sc.segments.push_back(S::stop(2.5));
  }
  return sc;  // stop windows end exactly 60 s apart
}

ManeuverScript drift_loop() {
  ManeuverScript sc;
  sc.sample_rate = 100.0;
  sc.seed = 13;
  sc.yaw_blend_s = 0.4;
  sc.segments.push_back(S::stop(2.5));
  for (int loop = 0; loop < 2; ++loop) {
    sc.segments.push_back(S::straight(6.5, 48.0));
    sc.segments.push_back(S::arc(5.0, 0.35, 5.0));
    sc.segments.push_back(S::slip_burst(2.0, 0.8, 3.0));
    sc.segments.push_back(S::arc(5.0, 0.35, 2.0));
    sc.segments.push_back(S::straight(6.5, 48.0));
    sc.segments.push_back(S::arc(5.0, -0.35, 4.0));
    sc.segments.push_back(S::slip_burst(2.5, 1.2, 5.0));
    sc.segments.push_back(S::arc(5.0, -0.35, 2.5));
    sc.segments.push_back(S::straight(7.0, 45.0));
    sc.segments.push_back(S::arc(4.5, 0.45, 3.0));
    sc.segments.push_back(S::slip_burst(1.5, 1.5, 7.0));
    sc.segments.push_back(S::arc(4.5, 0.45, 2.5));
    sc.segments.push_back(S::straight(6.5, 30.0));
    sc.segments.push_back(S::arc(5.0, -0.30, 5.0));
    sc.segments.push_back(S::slip_burst(2.0, 0.6, 2.5));
    sc.segments.push_back(S::arc(5.0, -0.30, 3.5));
    sc.segments.push_back(S::straight(6.0, 15.0));
  }
  sc.segments.push_back(S::stop(2.5));
  return sc;  // handbrake pulls mid-curve, lateral slip up to 7 m/s
}

ManeuverScript suburbs_like() {
  ManeuverScript sc;
  sc.sample_rate = 100.0;
  sc.seed = 14;
  sc.yaw_blend_s = 0.5;
  sc.segments.push_back(S::stop(3.0));
  sc.segments.push_back(S::straight(7.0, 70.0));
  sc.segments.push_back(S::arc(6.0, 0.30, 5.2));
  sc.segments.push_back(S::straight(10.0, 80.0));
  sc.segments.push_back(S::arc(7.0, -0.25, 6.3));
  sc.segments.push_back(S::straight(16.0, 90.0));
  sc.segments.push_back(S::arc(6.0, -0.30, 5.2));
  sc.segments.push_back(S::straight(7.0, 70.0));
  sc.segments.push_back(S::stop(3.0));
  sc.segments.push_back(S::straight(8.0, 75.0));
  sc.segments.push_back(S::arc(5.0, 0.35, 9.0));
  sc.segments.push_back(S::straight(10.0, 85.0));
  sc.segments.push_back(S::arc(6.0, 0.30, 5.2));
  sc.segments.push_back(S::straight(7.0, 60.0));
  sc.segments.push_back(S::stop(2.5));
  sc.segments.push_back(S::straight(8.0, 70.0));
  sc.segments.push_back(S::arc(5.5, -0.30, 5.2));
  sc.segments.push_back(S::straight(8.0, 95.0));
  sc.segments.push_back(S::stop(3.0));
  return sc;  // ~7.4 km suburban route with traffic stops
}

}  // namespace

ManeuverScript preset(std::string_view name) {
  if (name == "no_slip_loop") return no_slip_loop();
  if (name == "stop_and_go") return stop_and_go();
  if (name == "drift_loop") return drift_loop();
  if (name == "suburbs_like") return suburbs_like();
  raise(Errc::unknown_preset, "unknown preset '" + std::string(name) + "'");
}

ManeuverScript parse_script(const std::filesystem::path& path) {
  const std::string content = csv::read_file(path);
  ManeuverScript sc;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos <= content.size()) {
    std::size_t nl = content.find('\n', pos);
    if (nl == std::string::npos) nl = content.size();
    std::string_view line(content.data() + pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
      line.remove_suffix(1);
    }
    while (!line.empty() && line.front() == ' ') line.remove_prefix(1);
    if (line.empty()) {
      if (pos > content.size()) break;
      continue;
    }

    const auto fail = [&](const std::string& what) -> double {
      raise(Errc::invalid_script,
            path.string() + ":" + std::to_string(line_no) + ": " + what);
    };
    const auto to_double = [&](std::string_view f) {
      try {
        return std::stod(std::string(f));
      } catch (const std::exception&) {
        return fail("bad number '" + std::string(f) + "'");
      }
    };

    if (line.front() == '#') {
      std::string_view body = line.substr(1);
      while (!body.empty() && body.front() == ' ') body.remove_prefix(1);
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) continue;
      const std::string_view key = body.substr(0, eq);
      const std::string_view value = body.substr(eq + 1);
      if (key == "rate") {
        sc.sample_rate = to_double(value);
      } else if (key == "seed") {
        sc.seed = static_cast<std::uint64_t>(std::llround(to_double(value)));
      } else if (key == "blend") {
        sc.yaw_blend_s = to_double(value);
      }
      continue;
    }

    std::vector<std::string_view> fields;
    std::string_view rest = line;
    while (true) {
      const auto comma = rest.find(',');
      fields.push_back(comma == std::string_view::npos ? rest
                                                       : rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    const std::string_view kind = fields[0];
    if (kind == "straight" && fields.size() == 3) {
      sc.segments.push_back(S::straight(to_double(fields[1]), to_double(fields[2])));
    } else if (kind == "arc" && fields.size() == 4) {
      sc.segments.push_back(
          S::arc(to_double(fields[1]), to_double(fields[2]), to_double(fields[3])));
    } else if (kind == "stop" && fields.size() == 2) {
      sc.segments.push_back(S::stop(to_double(fields[1])));
    } else if (kind == "slip" && fields.size() == 4) {
      sc.segments.push_back(S::slip_burst(to_double(fields[1]), to_double(fields[2]),
                                          to_double(fields[3])));
    } else {
      fail("unrecognized segment '" + std::string(line) + "'");
    }
  }
  if (sc.segments.empty()) {
    raise(Errc::invalid_script, path.string() + ": script has no segments");
  }
  return sc;
}

void write_script(const std::filesystem::path& path, const ManeuverScript& sc) {
  std::string buf;
  buf += "#rate=";
  csv::append_number(buf, sc.sample_rate);
  buf += "\n#seed=";
  csv::append_number(buf, static_cast<std::int64_t>(sc.seed));
  buf += "\n#blend=";
  csv::append_number(buf, sc.yaw_blend_s);
  buf += '\n';
  for (const auto& seg : sc.segments) {
    switch (seg.kind) {
      case Segment::Kind::straight:
        buf += "straight,";
        csv::append_number(buf, seg.speed);
        buf += ',';
        csv::append_number(buf, seg.duration);
        break;
      case Segment::Kind::arc:
        buf += "arc,";
        csv::append_number(buf, seg.speed);
        buf += ',';
        csv::append_number(buf, seg.yaw_rate);
        buf += ',';
        csv::append_number(buf, seg.duration);
        break;
      case Segment::Kind::stop:
        buf += "stop,";
        csv::append_number(buf, seg.duration);
        break;
      case Segment::Kind::slip_burst:
        buf += "slip,";
        csv::append_number(buf, seg.duration);
        buf += ',';
        csv::append_number(buf, seg.forward_slip);
        buf += ',';
        csv::append_number(buf, seg.lateral_slip);
        break;
    }
    buf += '\n';
  }
  csv::write_file(path, buf);
}

void write_true_bias_csv(const std::filesystem::path& path,
                         const SampleStream& stream,
                         const std::vector<double>& bias) {
  std::string buf;
  buf.reserve(bias.size() * 32 + 16);
  buf += "t,bias\n";
  for (std::size_t i = 0; i < bias.size() && i < stream.encoder.size(); ++i) {
    csv::append_number(buf, stream.encoder[i].t);
    buf += ',';
    csv::append_number(buf, bias[i]);
    buf += '\n';
  }
  csv::write_file(path, buf);
}

}  // namespace og::synth
