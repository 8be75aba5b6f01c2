#pragma once

#include <stdexcept>
#include <string>

namespace og {

/// Stable error identifiers. The CLI prints the name verbatim and maps each
/// code onto the documented exit-code contract (0 ok, 1 internal, 2 input,
/// 3 degenerate data), so names must not change between releases.
enum class Errc {
  // ingestion
  malformed_row,
  non_monotonic_time,
  empty_file,
  ticks_decreasing,
  out_of_range,
  insufficient_data,
  span_mismatch,
  // dead reckoning
  non_positive_dt,
  length_mismatch,
  // bias
  window_too_short,
  not_initialized,
  no_static_window,
  // calibration
  no_ground_truth,
  all_samples_static,
  degenerate_geometry,
  no_convergence,
  non_positive_radius,
  // evaluation
  insufficient_overlap,
  trajectory_too_short,
  // simulator
  invalid_script,
  unknown_preset,
  // cli / misc
  missing_input,
  invalid_argument,
  io_error,
  internal,
};

const char* error_name(Errc code) noexcept;

/// 1 = internal, 2 = bad input, 3 = degenerate data.
int exit_code(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }
  const char* name() const noexcept { return error_name(code_); }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace og
