#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace thermoresp {

/// Machine-readable failure categories. The textual form (see to_string)
/// is what the CLI prints and what result tables store in error_code cells.
enum class ErrorCode {
  malformed_header,
  short_payload,
  bad_maxval,
  invariant_violation,
  io_failure,
  out_of_bounds,
  roi_too_small,
  input_too_small,
  search_window_too_small,
  zero_variance,
  motion_excursion,
  sampling_inadequate,
  track_length_mismatch,
  all_frames_dropped,
  signal_too_short,
  invalid_band,
  insufficient_peaks,
  invalid_width,
  invalid_argument,
  empty_input,
  no_manifests,
  flag_range,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace thermoresp
