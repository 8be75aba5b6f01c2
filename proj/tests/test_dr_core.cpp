#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "og/dr_core.hpp"
#include "og/errors.hpp"
#include "og/se2.hpp"
#include "og/synth.hpp"
#include "test_support.hpp"

using namespace og;
using std::numbers::pi;

TEST_SUITE("dr_core") {

TEST_CASE("tick_distance") {
  CHECK(dr::tick_distance({0.5, 100}, 0, 100) == doctest::Approx(pi).epsilon(1e-12));
  CHECK(dr::tick_distance({0.5, 100}, 50, 50) == 0.0);
  CHECK(dr::tick_distance({0.3, 4096}, 0, 1) ==
        doctest::Approx(4.6019e-4).epsilon(1e-4));
  CHECK(dr::tick_distance({0.5, 100}, 100, 0) == doctest::Approx(-pi));
}

TEST_CASE("heading_increment") {
  CHECK(dr::heading_increment(0.1, 0.1, 1.0) == doctest::Approx(0.1));
  CHECK(dr::heading_increment(0.0, 0.2, 1.0) == doctest::Approx(0.1));
  CHECK_THROWS_AS(dr::heading_increment(0.1, 0.1, 0.0), Error);
  CHECK_THROWS_AS(dr::heading_increment(0.1, 0.1, -0.1), Error);

  SUBCASE("exact on a linear ramp at 1 kHz") {
    // omega(t) = 0.3 + 0.2 t over [0, 1]; trapezoid integrates linear exactly.
    const int n = 1000;
    const double dt = 1.0 / n;
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      const double a = 0.3 + 0.2 * (i * dt);
      const double b = 0.3 + 0.2 * ((i + 1) * dt);
      total += dr::heading_increment(a, b, dt);
    }
    CHECK(std::abs(total - 0.4) < 1e-9);
  }
}

TEST_CASE("arc_displacement") {
  SUBCASE("straight line") {
    const auto d = dr::arc_displacement(1.0, 0.0);
    CHECK(d.x() == 1.0);
    CHECK(d.y() == 0.0);
  }

  SUBCASE("quarter arc") {
    const auto d = dr::arc_displacement(1.0, pi / 2.0);
    CHECK(d.x() == doctest::Approx(2.0 / pi).epsilon(1e-12));
    CHECK(d.y() == doctest::Approx(2.0 / pi).epsilon(1e-12));
  }

  SUBCASE("branches agree near the threshold") {
    const auto closed_form = [](double d, double h) {
      const double half_sin = std::sin(0.5 * h);
      return Eigen::Vector2d(d * std::sin(h) / h, d * 2.0 * half_sin * half_sin / h);
    };
    const auto taylor = [](double d, double h) {
      return Eigen::Vector2d(d * (1.0 - h * h / 6.0), d * h * 0.5);
    };
    for (const double h : {1e-7, dr::kSmallHeading * 1.01}) {
      const auto a = closed_form(1.0, h);
      const auto b = taylor(1.0, h);
      CHECK(std::abs(a.x() - b.x()) / std::abs(a.x()) < 1e-12);
      CHECK(std::abs(a.y() - b.y()) / std::abs(a.y()) < 1e-12);
      // The public function matches whichever side of the branch h is on.
      const auto f = dr::arc_displacement(1.0, h);
      CHECK(std::abs(f.x() - a.x()) / std::abs(a.x()) < 1e-12);
      CHECK(std::abs(f.y() - a.y()) / std::abs(a.y()) < 1e-12);
    }
  }
}

TEST_CASE("integrate straight line") {
  const auto stream = test_support::constant_motion_stream(1001, 0.01, 5, 0.0);
  const WheelModel wheel{0.35, 4096};
  const std::vector<double> zero_bias(stream.size(), 0.0);
  const auto traj = dr::integrate(stream, wheel, zero_bias);
  REQUIRE(traj.poses.size() == stream.size());
  const double expected = wheel.meters_per_tick() * 5.0 * 1000.0;
  CHECK(traj.poses.back().x == doctest::Approx(expected).epsilon(1e-12));
  CHECK(traj.poses.back().y == 0.0);
  CHECK(traj.poses.back().yaw == 0.0);
  CHECK(traj.poses.front().x == 0.0);
  CHECK(traj.poses.front().t == stream.encoder.front().t);
}

TEST_CASE("integrate closes a circle") {
  // 1250 steps of exactly 2*pi/1250 rad each; constant tick rate.
  const int n = 1250;
  const double dt = 0.01;
  const double omega = 2.0 * pi / (n * dt);
  const auto stream = test_support::constant_motion_stream(n + 1, dt, 16, omega);
  const WheelModel wheel{0.5, 1000};
  const std::vector<double> zero_bias(stream.size(), 0.0);
  const auto traj = dr::integrate(stream, wheel, zero_bias);
  const double circumference = wheel.meters_per_tick() * 16.0 * n;
  const double miss =
      std::hypot(traj.poses.back().x, traj.poses.back().y);
  CHECK(miss < 1e-6 * circumference);
  CHECK(std::abs(traj.poses.back().yaw) < 1e-9);
}

TEST_CASE("integrate matches the simulator within quantization") {
  const auto sim = synth::simulate(synth::preset("no_slip_loop"), synth::NoiseSpec{});
  const std::vector<double> zero_bias(sim.stream.size(), 0.0);
  const auto traj =
      dr::integrate(sim.stream, synth::NoiseSpec{}.wheel(), zero_bias);
  const auto& gt = *sim.stream.ground_truth;
  REQUIRE(traj.poses.size() == gt.size());
  const double path = traj.path_length();
  const double final_err = std::hypot(traj.poses.back().x - gt.back().x,
                                      traj.poses.back().y - gt.back().y);
  CHECK(final_err < 5e-5 * path);  // < 0.005% of path length
}

TEST_CASE("left invariance of relative poses") {
  auto rng = test_support::rng(99);
  std::normal_distribution<double> turn(0.0, 0.3);
  SampleStream stream;
  std::int64_t ticks = 0;
  for (int i = 0; i <= 500; ++i) {
    stream.encoder.push_back({i * 0.01, ticks});
    stream.gyro_on_encoder_grid.push_back({i * 0.01, turn(rng)});
    ticks += 40 + static_cast<std::int64_t>(rng() % 20);
  }
  const std::vector<double> zero_bias(stream.size(), 0.0);
  const auto traj = dr::integrate(stream, {0.35, 4096}, zero_bias);

  const se2::Transform g{12.3, -4.5, 1.1};  // arbitrary global transform
  std::vector<se2::Transform> moved;
  for (const auto& p : traj.poses) {
    moved.push_back(se2::compose(g, se2::transform_of(p)));
  }
  for (std::size_t i = 1; i < traj.poses.size(); i += 37) {
    const auto rel_a = se2::between(se2::transform_of(traj.poses[i - 1]),
                                    se2::transform_of(traj.poses[i]));
    const auto rel_b = se2::between(moved[i - 1], moved[i]);
    CHECK(std::abs(rel_a.x - rel_b.x) < 1e-9);
    CHECK(std::abs(rel_a.y - rel_b.y) < 1e-9);
    CHECK(std::abs(normalize_angle(rel_a.yaw - rel_b.yaw)) < 1e-12);
  }
}

TEST_CASE("reversing the stream returns to the start") {
  // Forward leg with a smooth yaw bump that starts and ends at zero rate,
  // then the exact mirror with negated rates and tick deltas.
  const int m = 5000;
  const double dt = 0.01;
  std::vector<double> omega_fwd(m + 1);
  std::vector<std::int64_t> delta_fwd(m, 80);
  for (int i = 0; i <= m; ++i) {
    const double u = static_cast<double>(i) / m;
    omega_fwd[i] = 0.4 * std::sin(pi * u) * std::sin(pi * u);
  }

  SampleStream stream;
  std::int64_t ticks = 0;
  int idx = 0;
  stream.encoder.push_back({0.0, 0});
  stream.gyro_on_encoder_grid.push_back({0.0, omega_fwd[0]});
  for (int i = 0; i < m; ++i) {
    ++idx;
    ticks += delta_fwd[i];
    stream.encoder.push_back({idx * dt, ticks});
    stream.gyro_on_encoder_grid.push_back({idx * dt, omega_fwd[i + 1]});
  }
  for (int i = 0; i < m; ++i) {
    ++idx;
    ticks -= delta_fwd[m - 1 - i];
    stream.encoder.push_back({idx * dt, ticks});
    stream.gyro_on_encoder_grid.push_back({idx * dt, -omega_fwd[m - 1 - i]});
  }

  const std::vector<double> zero_bias(stream.size(), 0.0);
  const auto traj = dr::integrate(stream, {0.35, 4096}, zero_bias);
  const double miss = std::hypot(traj.poses.back().x, traj.poses.back().y);
  CHECK(miss < 1e-9);  // 1e4 steps, noiseless
}

TEST_CASE("path length bookkeeping") {
  SUBCASE("straight segments are exact") {
    const auto stream = test_support::constant_motion_stream(501, 0.01, 7, 0.0);
    const WheelModel wheel{0.35, 4096};
    const std::vector<double> zero_bias(stream.size(), 0.0);
    const auto traj = dr::integrate(stream, wheel, zero_bias);
    const double sum_d = wheel.meters_per_tick() * 7.0 * 500.0;
    CHECK(traj.path_length() == doctest::Approx(sum_d).epsilon(1e-12));
  }

  SUBCASE("curved segments agree to 1e-6 relative") {
    const auto stream = test_support::constant_motion_stream(2001, 0.01, 12, 0.3);
    const WheelModel wheel{0.35, 4096};
    const std::vector<double> zero_bias(stream.size(), 0.0);
    const auto traj = dr::integrate(stream, wheel, zero_bias);
    const double sum_d = wheel.meters_per_tick() * 12.0 * 2000.0;
    CHECK(std::abs(traj.path_length() - sum_d) / sum_d < 1e-6);
  }
}

TEST_CASE("fuzz: finite inputs never produce NaN and yaw stays normalized") {
  auto rng = test_support::rng(1234);
  std::uniform_real_distribution<double> omega_dist(-18.0, 18.0);
  std::uniform_int_distribution<int> delta(-500, 500);
  for (int trial = 0; trial < 10; ++trial) {
    SampleStream stream;
    std::int64_t ticks = 0;
    for (int i = 0; i <= 300; ++i) {
      stream.encoder.push_back({i * 0.005, ticks});
      stream.gyro_on_encoder_grid.push_back({i * 0.005, omega_dist(rng)});
      ticks += delta(rng);
    }
    const std::vector<double> zero_bias(stream.size(), 0.0);
    const auto traj = dr::integrate(stream, {0.35, 4096}, zero_bias);
    for (const auto& p : traj.poses) {
      REQUIRE(std::isfinite(p.x));
      REQUIRE(std::isfinite(p.y));
      REQUIRE(std::isfinite(p.yaw));
      REQUIRE(p.yaw > -pi);
      REQUIRE(p.yaw <= pi);
    }
  }
}

TEST_CASE("forward-only option rectifies reverse deltas") {
  SampleStream stream;
  stream.encoder = {{0.0, 0}, {0.1, 100}, {0.2, 0}};
  stream.gyro_on_encoder_grid = {{0.0, 0.0}, {0.1, 0.0}, {0.2, 0.0}};
  const std::vector<double> zero_bias(3, 0.0);
  const WheelModel wheel{0.35, 4096};

  const auto back = dr::integrate(stream, wheel, zero_bias);
  CHECK(back.poses.back().x == doctest::Approx(0.0));

  dr::IntegrateOptions fwd;
  fwd.forward_only = true;
  const auto rectified = dr::integrate(stream, wheel, zero_bias, fwd);
  CHECK(rectified.poses.back().x ==
        doctest::Approx(2.0 * wheel.meters_per_tick() * 100.0));
}

TEST_CASE("bias series length is enforced") {
  const auto stream = test_support::constant_motion_stream(10, 0.01, 5, 0.0);
  const std::vector<double> short_bias(5, 0.0);
  try {
    dr::integrate(stream, {0.35, 4096}, short_bias);
    FAIL("expected LengthMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::length_mismatch);
  }
}

}  // TEST_SUITE
