#include "og/errors.hpp"

namespace og {

const char* error_name(Errc code) noexcept {
  switch (code) {
    case Errc::malformed_row: return "MalformedRow";
    case Errc::non_monotonic_time: return "NonMonotonicTime";
    case Errc::empty_file: return "EmptyFile";
    case Errc::ticks_decreasing: return "TicksDecreasing";
    case Errc::out_of_range: return "OutOfRange";
    case Errc::insufficient_data: return "InsufficientData";
    case Errc::span_mismatch: return "SpanMismatch";
    case Errc::non_positive_dt: return "NonPositiveDt";
    case Errc::length_mismatch: return "LengthMismatch";
    case Errc::window_too_short: return "WindowTooShort";
    case Errc::not_initialized: return "NotInitialized";
    case Errc::no_static_window: return "NoStaticWindow";
    case Errc::no_ground_truth: return "NoGroundTruth";
    case Errc::all_samples_static: return "AllSamplesStatic";
    case Errc::degenerate_geometry: return "DegenerateGeometry";
    case Errc::no_convergence: return "NoConvergence";
    case Errc::non_positive_radius: return "NonPositiveRadius";
    case Errc::insufficient_overlap: return "InsufficientOverlap";
    case Errc::trajectory_too_short: return "TrajectoryTooShort";
    case Errc::invalid_script: return "InvalidScript";
    case Errc::unknown_preset: return "UnknownPreset";
    case Errc::missing_input: return "MissingInput";
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::io_error: return "IoError";
    case Errc::internal: return "Internal";
  }
  return "Internal";
}

int exit_code(Errc code) noexcept {
  switch (code) {
    case Errc::malformed_row:
    case Errc::non_monotonic_time:
    case Errc::empty_file:
    case Errc::ticks_decreasing:
    case Errc::out_of_range:
    case Errc::insufficient_data:
    case Errc::span_mismatch:
    case Errc::non_positive_dt:
    case Errc::no_ground_truth:
    case Errc::invalid_script:
    case Errc::unknown_preset:
    case Errc::missing_input:
    case Errc::invalid_argument:
    case Errc::io_error:
      return 2;
    case Errc::window_too_short:
    case Errc::no_static_window:
    case Errc::all_samples_static:
    case Errc::degenerate_geometry:
    case Errc::no_convergence:
    case Errc::non_positive_radius:
    case Errc::insufficient_overlap:
    case Errc::trajectory_too_short:
      return 3;
    case Errc::length_mismatch:
    case Errc::not_initialized:
    case Errc::internal:
      return 1;
  }
  return 1;
}

}  // namespace og
