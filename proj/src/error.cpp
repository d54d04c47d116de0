#include "thermoresp/error.hpp"

namespace thermoresp {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::malformed_header: return "malformed_header";
    case ErrorCode::short_payload: return "short_payload";
    case ErrorCode::bad_maxval: return "bad_maxval";
    case ErrorCode::invariant_violation: return "invariant_violation";
    case ErrorCode::io_failure: return "io_failure";
    case ErrorCode::out_of_bounds: return "out_of_bounds";
    case ErrorCode::roi_too_small: return "roi_too_small";
    case ErrorCode::input_too_small: return "input_too_small";
    case ErrorCode::search_window_too_small: return "search_window_too_small";
    case ErrorCode::zero_variance: return "zero_variance";
    case ErrorCode::motion_excursion: return "motion_excursion";
    case ErrorCode::sampling_inadequate: return "sampling_inadequate";
    case ErrorCode::track_length_mismatch: return "track_length_mismatch";
    case ErrorCode::all_frames_dropped: return "all_frames_dropped";
    case ErrorCode::signal_too_short: return "signal_too_short";
    case ErrorCode::invalid_band: return "invalid_band";
    case ErrorCode::insufficient_peaks: return "insufficient_peaks";
    case ErrorCode::invalid_width: return "invalid_width";
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::empty_input: return "empty_input";
    case ErrorCode::no_manifests: return "no_manifests";
    case ErrorCode::flag_range: return "flag_range";
  }
  return "unknown";
}

}  // namespace thermoresp
