#include <doctest.h>

#include <cmath>
#include <random>
#include <span>

#include "og/calib.hpp"
#include "og/csv.hpp"
#include "og/errors.hpp"
#include "og/ingest.hpp"
#include "og/synth.hpp"
#include "test_support.hpp"

using namespace og;

namespace {

CalibParams truth_params() {
  CalibParams p;
  p.radius = 0.30;
  p.p_ext = {1.0, 0.5};
  p.theta_ext = 0.02;
  return p;
}

SampleStream rich_turning_stream(const CalibParams& truth,
                                 std::int64_t ticks_per_rev = 4096) {
  synth::NoiseSpec noise;
  noise.extrinsics = truth;
  noise.ticks_per_rev = ticks_per_rev;
  const auto script = test_support::rich_turning_script(noise.wheel());
  return synth::simulate(script, noise).stream;
}

/// Independent central-difference Jacobian of the residual vector.
Eigen::MatrixXd numeric_jacobian(std::span<const calib::ResidualSample> samples,
                                 const CalibParams& params) {
  Eigen::MatrixXd out(2 * static_cast<Eigen::Index>(samples.size()), 4);
  const auto perturb = [&](int axis, double h) {
    CalibParams p = params;
    switch (axis) {
      case 0: p.radius += h; break;
      case 1: p.p_ext.x() += h; break;
      case 2: p.p_ext.y() += h; break;
      case 3: p.theta_ext += h; break;
    }
    return calib::build_residuals(samples, p);
  };
  for (int axis = 0; axis < 4; ++axis) {
    const double h = 1e-6;
    out.col(axis) = (perturb(axis, h) - perturb(axis, -h)) / (2.0 * h);
  }
  return out;
}

}  // namespace

TEST_SUITE("calib") {

TEST_CASE("predict_gt_velocity") {
  SUBCASE("identity extrinsics") {
    CalibParams p;
    p.theta_ext = 0.0;
    p.p_ext = {0.0, 0.0};
    const auto v = calib::predict_gt_velocity(p, 5.0, 0.7);
    CHECK(v.x() == doctest::Approx(5.0));
    CHECK(v.y() == doctest::Approx(0.0));
  }

  SUBCASE("pure lever arm") {
    CalibParams p;
    p.p_ext = {1.0, 0.5};
    const auto v = calib::predict_gt_velocity(p, 0.0, 0.2);
    CHECK(v.x() == doctest::Approx(-0.1));
    CHECK(v.y() == doctest::Approx(0.2));
  }

  SUBCASE("matches an explicit matrix evaluation") {
    auto rng = test_support::rng(31);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int i = 0; i < 100; ++i) {
      CalibParams p;
      p.radius = 0.2 + std::abs(u(rng));
      p.p_ext = {u(rng), u(rng)};
      p.theta_ext = u(rng);
      const double speed = 3.0 * u(rng);
      const double w = u(rng);
      Eigen::Matrix2d rot;
      rot << std::cos(p.theta_ext), -std::sin(p.theta_ext),
          std::sin(p.theta_ext), std::cos(p.theta_ext);
      Eigen::Matrix2d skew;
      skew << 0.0, -w, w, 0.0;
      const Eigen::Vector2d expected =
          rot * Eigen::Vector2d(speed, 0.0) + skew * p.p_ext;
      const auto got = calib::predict_gt_velocity(p, speed, w);
      CHECK((got - expected).norm() < 1e-14);
    }
  }
}

TEST_CASE("build_residuals") {
  SUBCASE("zero at the generative parameters") {
    const auto truth = truth_params();
    const auto stream = rich_turning_stream(truth);
    const auto samples = calib::collect_residual_samples(
        std::span(&stream, 1), 4096, truth.radius, 0.1);
    REQUIRE(samples.size() > 5000);
    const auto r = calib::build_residuals(samples, truth);
    CHECK(r.lpNorm<Eigen::Infinity>() < 1e-9);
  }

  SUBCASE("radius perturbation shows up as forward residual") {
    // Straight constant speed: +1% radius -> forward residual -0.01 * speed.
    const WheelModel wheel{0.30, 4096};
    const double v = test_support::aligned_speed(wheel, 100.0, 109);
    synth::ManeuverScript sc;
    sc.sample_rate = 100.0;
    sc.segments.push_back(synth::Segment::straight(v, 20.0));
    synth::NoiseSpec noise;
    noise.extrinsics.radius = wheel.radius;
    noise.ticks_per_rev = wheel.ticks_per_rev;
    const auto stream = synth::simulate(sc, noise).stream;

    CalibParams inflated = noise.extrinsics;
    inflated.radius *= 1.01;
    const auto samples = calib::collect_residual_samples(
        std::span(&stream, 1), 4096, wheel.radius, 0.1);
    const auto r = calib::build_residuals(samples, inflated);
    for (Eigen::Index k = 0; k < r.size(); k += 2) {
      CHECK(r[k] == doctest::Approx(-0.01 * v).epsilon(1e-9));
      CHECK(std::abs(r[k + 1]) < 1e-9);
    }
  }

  SUBCASE("missing ground truth") {
    const auto stream = test_support::constant_motion_stream(100, 0.01, 10, 0.0);
    try {
      calib::collect_residual_samples(std::span(&stream, 1), 4096, 0.35, 0.1);
      FAIL("expected NoGroundTruth");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::no_ground_truth);
    }
  }
}

TEST_CASE("solve recovers noiseless parameters") {
  const auto truth = truth_params();
  const auto stream = rich_turning_stream(truth);
  CalibParams init;
  init.radius = 0.35;
  const auto report = calib::solve(std::span(&stream, 1), 4096, init);
  CHECK(report.converged);
  CHECK(std::abs(report.params.radius - truth.radius) < 1e-6);
  CHECK((report.params.p_ext - truth.p_ext).norm() < 1e-5);
  CHECK(std::abs(report.params.theta_ext - truth.theta_ext) < 1e-6);
  CHECK(report.rms_residual < 1e-9);

  SUBCASE("cost history is non-increasing") {
    for (std::size_t i = 1; i < report.cost_history.size(); ++i) {
      CHECK(report.cost_history[i] <= report.cost_history[i - 1]);
    }
  }
}

TEST_CASE("solve under velocity noise recovers the radius within 0.1%") {
  const auto truth = truth_params();
  const auto base = rich_turning_stream(truth);
  REQUIRE(base.size() >= 10000);

  auto rng = test_support::rng(77);
  std::normal_distribution<double> vel_noise(0.0, 0.05);
  int hits = 0;
  const int seeds = 10;
  for (int s = 0; s < seeds; ++s) {
    SampleStream noisy = base;
    for (auto& g : *noisy.ground_truth) {
      g.vx += vel_noise(rng);
      g.vy += vel_noise(rng);
    }
    CalibParams init;
    init.radius = 0.35;
    const auto report = calib::solve(std::span(&noisy, 1), 4096, init);
    if (std::abs(report.params.radius - truth.radius) / truth.radius < 1e-3) {
      ++hits;
    }
  }
  CHECK(hits >= seeds - 1);
}

TEST_CASE("analytic jacobian matches central differences") {
  auto rng = test_support::rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);

  std::vector<calib::ResidualSample> samples(40);
  for (auto& s : samples) {
    s.v_gt = {5.0 * u(rng), 5.0 * u(rng)};
    s.omega_gt = 0.8 * u(rng);
    s.tick_rate_distance = 20.0 * u(rng);
  }

  for (int point = 0; point < 100; ++point) {
    CalibParams p;
    p.radius = 0.2 + 0.4 * std::abs(u(rng)) + 0.05;
    p.p_ext = {2.0 * u(rng), 2.0 * u(rng)};
    p.theta_ext = 2.0 * u(rng);

    Eigen::VectorXd r;
    Eigen::Matrix<double, Eigen::Dynamic, 4> J;
    calib::residuals_and_jacobian(samples, p, r, J);
    const Eigen::MatrixXd J_fd = numeric_jacobian(samples, p);
    const double rel = (J - J_fd).norm() / (1.0 + J.norm());
    CHECK(rel < 1e-6);
  }
}

TEST_CASE("degenerate and empty data") {
  SUBCASE("straight-only driving") {
    synth::ManeuverScript sc;
    sc.sample_rate = 100.0;
    sc.segments.push_back(synth::Segment::straight(5.0, 30.0));
    const auto stream = synth::simulate(sc, synth::NoiseSpec{}).stream;
    CalibParams init;
    try {
      calib::solve(std::span(&stream, 1), 4096, init);
      FAIL("expected DegenerateGeometry");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::degenerate_geometry);
    }
  }

  SUBCASE("all samples static") {
    synth::ManeuverScript sc;
    sc.sample_rate = 100.0;
    sc.segments.push_back(synth::Segment::stop(10.0));
    const auto stream = synth::simulate(sc, synth::NoiseSpec{}).stream;
    CalibParams init;
    try {
      calib::solve(std::span(&stream, 1), 4096, init);
      FAIL("expected AllSamplesStatic");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::all_samples_static);
    }
  }

  SUBCASE("non-positive initial radius") {
    const auto stream = rich_turning_stream(truth_params());
    CalibParams init;
    init.radius = -0.1;
    try {
      calib::solve(std::span(&stream, 1), 4096, init);
      FAIL("expected NonPositiveRadius");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::non_positive_radius);
    }
  }
}

TEST_CASE("gauge: rotating the ground-truth frame shifts theta only") {
  const auto truth = truth_params();
  auto stream = rich_turning_stream(truth);

  const double phi = 0.6;
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  for (auto& g : *stream.ground_truth) {
    const double vx = c * g.vx - s * g.vy;
    const double vy = s * g.vx + c * g.vy;
    g.vx = vx;
    g.vy = vy;
  }

  CalibParams init;
  init.radius = 0.35;
  const auto report = calib::solve(std::span(&stream, 1), 4096, init);
  CHECK(std::abs(report.params.radius - truth.radius) < 1e-6);
  CHECK(std::abs(normalize_angle(report.params.theta_ext - truth.theta_ext - phi)) <
        1e-6);
  const Eigen::Vector2d rotated_p(c * truth.p_ext.x() - s * truth.p_ext.y(),
                                  s * truth.p_ext.x() + c * truth.p_ext.y());
  CHECK((report.params.p_ext - rotated_p).norm() < 1e-5);
}

TEST_CASE("joint solve equals the union of its parts") {
  const auto truth = truth_params();
  const auto s1 = rich_turning_stream(truth);
  const auto s2 = rich_turning_stream(truth);
  std::vector<SampleStream> both{s1, s2};
  CalibParams init;
  init.radius = 0.35;
  const auto joint = calib::solve(both, 4096, init);
  const auto single = calib::solve(std::span(&s1, 1), 4096, init);
  CHECK(std::abs(joint.params.radius - single.params.radius) < 1e-9);
  CHECK((joint.params.p_ext - single.params.p_ext).norm() < 1e-7);
}

TEST_CASE("huber option converges in the presence of outliers") {
  const auto truth = truth_params();
  auto stream = rich_turning_stream(truth);
  auto rng = test_support::rng(13);
  std::uniform_int_distribution<std::size_t> pick(0, stream.ground_truth->size() - 1);
  for (int i = 0; i < 50; ++i) {
    auto& g = (*stream.ground_truth)[pick(rng)];
    g.vx += 5.0;  // gross outlier
  }
  CalibParams init;
  init.radius = 0.35;
  calib::SolveOptions opts;
  opts.huber_delta = 0.1;
  const auto robust = calib::solve(std::span(&stream, 1), 4096, init, opts);
  const auto plain = calib::solve(std::span(&stream, 1), 4096, init);
  CHECK(robust.converged);
  CHECK(std::abs(robust.params.radius - truth.radius) <
        std::abs(plain.params.radius - truth.radius));
}

TEST_CASE("calibration file round-trip") {
  const auto dir = test_support::scratch_dir("calib_file");
  calib::Report report;
  report.params = truth_params();
  report.rms_residual = 1.25e-3;
  report.converged = true;
  const auto path = dir / "calibration.txt";
  calib::write_calib_file(path, report);
  const auto back = calib::read_calib_file(path);
  CHECK(back.radius == report.params.radius);
  CHECK(back.p_ext.x() == report.params.p_ext.x());
  CHECK(back.p_ext.y() == report.params.p_ext.y());
  CHECK(back.theta_ext == report.params.theta_ext);

  csv::write_file(dir / "broken.txt", "p_ext_x_m=1.0\n");
  CHECK_THROWS_AS(calib::read_calib_file(dir / "broken.txt"), Error);
}

}  // TEST_SUITE
