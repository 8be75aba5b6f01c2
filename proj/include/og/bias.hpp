#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "og/types.hpp"

namespace og::bias {

struct BiasConfig {
  double alpha = 0.9;             // low-pass coefficient in [0, 1)
  double static_window_s = 2.0;   // minimum static duration for an estimate
  std::int64_t static_tick_tol = 0;
  std::optional<double> initial;  // fallback when no static window exists
};

struct BiasState {
  double estimate = 0.0;  // rad/s
  bool initialized = false;
  double alpha = 0.9;
};

/// Inclusive index range into the encoder/gyro grid.
struct IndexWindow {
  std::size_t first = 0;
  std::size_t last = 0;
};

/// Maximal intervals of duration >= window_s where every consecutive tick
/// delta stays within tick_tol. Empty result when the vehicle never stops.
std::vector<IndexWindow> detect_static_windows(const SampleStream& stream,
                                               double window_s,
                                               std::int64_t tick_tol);

/// Mean of the raw gyro values over the window.
double initialize_bias(const SampleStream& stream, IndexWindow window,
                       double min_window_s);

/// estimate <- alpha * estimate + (1 - alpha) * window_mean.
BiasState update_bias(BiasState state, double window_mean);

/// Piecewise-constant per-sample bias: each sample carries the latest
/// estimate; samples before the first static window carry the first estimate
/// retroactively. The estimate changes at each window's last index.
std::vector<double> bias_series(const SampleStream& stream,
                                const BiasConfig& config = {});

}  // namespace og::bias
