#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "thermoresp/dsp.hpp"
#include "thermoresp/respsig.hpp"

// Peak-based respiratory rate with amplitude-threshold false-peak rejection,
// plus three comparison estimators (no rejection, dominant FFT frequency,
// Gaussian-smoothed peak count).

namespace thermoresp::rr {

struct PeakSet {
  std::vector<std::size_t> indices;  // strictly ascending
  std::vector<double> amplitudes;
  std::size_t source_len = 0;  // TF
  double fs = 0.0;

  std::size_t size() const noexcept { return indices.size(); }
  bool empty() const noexcept { return indices.empty(); }
  /// Throws invariant_violation on unsorted, out-of-range or mismatched data.
  void validate() const;
};

/// How the uncounted edge segments enter the rate. `verbatim` adds PN to the
/// edge term; `interior_intervals` adds PN - 1 instead.
enum class EdgeRule { verbatim, interior_intervals };

struct RrEstimate {
  double rr_bpm = 0.0;  // raw value scaled to breaths per minute
  double rr_raw = 0.0;  // (FP + (TF - LP)) / ADP + PN
  std::size_t pn = 0;
  std::size_t fp = 0;
  std::size_t lp = 0;
  double adp = 0.0;
  std::size_t tf = 0;
  double fs = 0.0;
  std::optional<double> thr;
  std::optional<double> xi;
  /// Gaussian width actually used (gw only).
  std::optional<int> width;

  bool operator==(const RrEstimate&) const = default;
};

/// round(fs / band_high), at least 1.
std::size_t default_min_separation(double fs, double band_high);

/// Interior local maxima s[i-1] < s[i] >= s[i+1] with s[i] > 0. Among maxima
/// closer than min_separation only the highest survives (ties keep the
/// earlier index). Throws signal_too_short below 3 samples.
PeakSet detect_candidates(const Signal& signal, std::size_t min_separation);

struct Elimination {
  PeakSet kept;
  double awa = 0.0;
  double thr = 0.0;
};

/// thr = mean(amplitudes) * (1 - xi); keeps amplitudes >= thr. Throws
/// insufficient_peaks on an empty set, flag_range unless 0 <= xi < 1.
Elimination eliminate_false_peaks(const PeakSet& peaks, double xi);

/// Throws insufficient_peaks when fewer than two peaks remain.
/// rr_bpm = rr_raw * 60 * fs / TF, evaluated left to right.
RrEstimate respiration_rate(const PeakSet& peaks, EdgeRule rule = EdgeRule::verbatim);

struct RrOptions {
  dsp::FilterConfig filter;
  double segment_seconds = dsp::kDefaultSegmentSeconds;
  std::optional<std::size_t> min_separation;  // default round(fs / band_high)
  EdgeRule edge = EdgeRule::verbatim;
};

constexpr double kDefaultXi = 0.25;

RrEstimate nrrm_rr(const Signal& irs, double xi, const RrOptions& options = {});
RrEstimate nrrm_eep_rr(const Signal& irs, const RrOptions& options = {});
/// 60 x the in-band FFT magnitude peak after detrend and normalize, refined by
/// parabolic interpolation over the neighbouring bins.
double fdam_rr(const Signal& irs, const RrOptions& options = {});
/// Band-filtered signal smoothed by a unit-area Gaussian of `width` samples
/// (even widths round up, sigma = width / 6), then peak count and rate.
RrEstimate gw_rr(const Signal& irs, int width, const RrOptions& options = {});

/// Unit-area Gaussian kernel; throws invalid_width below 3.
std::vector<double> gaussian_kernel(int width);

enum class Method { nrrm, nrrm_eep, fdam, gw };

std::string_view to_string(Method method) noexcept;
Method method_from_string(std::string_view text);

struct MethodRun {
  Method method = Method::nrrm;
  /// xi for nrrm, width for gw, ignored otherwise.
  double parameter = kDefaultXi;
};

RrEstimate run_method(const Signal& irs, const MethodRun& run, const RrOptions& options = {});

struct ResultRow {
  std::string video_id;
  Method method = Method::nrrm;
  std::optional<double> xi_or_width;
  std::optional<RrEstimate> estimate;
  std::string error_code;  // empty on success
};

/// run_method with errors captured into error_code.
ResultRow evaluate(const std::string& video_id, const Signal& irs, const MethodRun& run,
                   const RrOptions& options = {});

/// Header: video_id,method,xi_or_width,rr_bpm,PN,FP,LP,ADP,TF,error_code
std::string results_csv(std::span<const ResultRow> rows);
void write_results_csv(std::span<const ResultRow> rows, const std::filesystem::path& path);

}  // namespace thermoresp::rr
