#include "og/bias.hpp"

#include <cmath>
#include <string>

#include "og/errors.hpp"

namespace og::bias {

std::vector<IndexWindow> detect_static_windows(const SampleStream& stream,
                                               double window_s,
                                               std::int64_t tick_tol) {
  std::vector<IndexWindow> out;
  const auto& enc = stream.encoder;
  const std::size_t n = enc.size();
  std::size_t start = 0;
  for (std::size_t i = 1; i <= n; ++i) {
    const bool still_static =
        i < n && std::abs(enc[i].ticks - enc[i - 1].ticks) <= tick_tol;
    if (still_static) continue;
    const std::size_t end = i - 1;  // inclusive
    if (end > start && enc[end].t - enc[start].t >= window_s) {
      out.push_back({start, end});
    }
    start = i;
  }
  return out;
}

double initialize_bias(const SampleStream& stream, IndexWindow window,
                       double min_window_s) {
  const auto& enc = stream.encoder;
  if (window.last >= enc.size() || window.last <= window.first ||
      enc[window.last].t - enc[window.first].t < min_window_s) {
    raise(Errc::window_too_short,
          "static window shorter than " + std::to_string(min_window_s) + " s");
  }
  double sum = 0.0;
  for (std::size_t i = window.first; i <= window.last; ++i) {
    sum += stream.gyro_on_encoder_grid[i].omega;
  }
  return sum / static_cast<double>(window.last - window.first + 1);
}

BiasState update_bias(BiasState state, double window_mean) {
  if (!state.initialized) {
    raise(Errc::not_initialized, "bias filter updated before initialization");
  }
  state.estimate = state.alpha * state.estimate + (1.0 - state.alpha) * window_mean;
  return state;
}

std::vector<double> bias_series(const SampleStream& stream,
                                const BiasConfig& config) {
  const std::size_t n = stream.size();
  const auto windows =
      detect_static_windows(stream, config.static_window_s, config.static_tick_tol);

  if (windows.empty()) {
    if (!config.initial) {
      raise(Errc::no_static_window,
            "no static interval of " + std::to_string(config.static_window_s) +
                " s found and no fallback bias configured");
    }
    return std::vector<double>(n, *config.initial);
  }

  std::vector<double> series(n, 0.0);
  BiasState state;
  state.alpha = config.alpha;
  state.estimate = initialize_bias(stream, windows.front(), config.static_window_s);
  state.initialized = true;

  // Retroactive fill up to (and including) the first window's end.
  std::size_t next = 0;
  for (std::size_t i = 0; i <= windows.front().last && i < n; ++i) {
    series[i] = state.estimate;
  }
  next = windows.front().last + 1;

  for (std::size_t w = 1; w < windows.size(); ++w) {
    // The previous estimate holds until this window completes.
    for (std::size_t i = next; i < windows[w].last && i < n; ++i) {
      series[i] = state.estimate;
    }
    state = update_bias(state,
                        initialize_bias(stream, windows[w], config.static_window_s));
    if (windows[w].last < n) series[windows[w].last] = state.estimate;
    next = windows[w].last + 1;
  }
  for (std::size_t i = next; i < n; ++i) series[i] = state.estimate;
  return series;
}

}  // namespace og::bias
