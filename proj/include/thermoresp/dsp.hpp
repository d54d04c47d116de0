#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "thermoresp/respsig.hpp"

// Respiration-signal conditioning: IRS -> RS_D (piecewise linear detrend)
// -> RS_N (zero mean, unit population sd) -> RS_BF (band-pass).

namespace thermoresp::dsp {

enum class FilterMethod { butterworth, fft_mask };

std::string_view to_string(FilterMethod method) noexcept;
FilterMethod filter_method_from_string(std::string_view text);

struct FilterConfig {
  double band_low = 0.15;   // Hz
  double band_high = 0.40;  // Hz; 0.70 is the wide alternative
  FilterMethod method = FilterMethod::butterworth;
  int butterworth_order = 4;
  bool zero_phase = true;

  /// Throws invalid_band unless 0 < band_low < band_high < fs/2.
  void validate(double fs) const;
};

constexpr double kDefaultSegmentSeconds = 10.0;

/// Second-order section, a0 normalized to 1:
/// H(z) = (b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2).
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
};

/// Digital Butterworth band-pass of the given prototype order (2*order
/// poles, `order` sections) by bilinear transform with prewarped edges.
/// Gain is exactly 1 at the geometric centre frequency.
std::vector<Biquad> butterworth_bandpass(int order, double low_hz, double high_hz, double fs);

/// H(e^{j omega}) of the cascade, omega in radians/sample.
std::complex<double> frequency_response(std::span<const Biquad> sos, double omega);

/// Time constant, in samples, of the slowest-decaying pole:
/// ceil(-1 / ln(max |pole|)).
std::size_t settling_length(std::span<const Biquad> sos);

/// Direct-form II transposed cascade, zero initial state.
std::vector<double> sosfilt(std::span<const Biquad> sos, std::span<const double> x);

/// Per-segment least-squares line removal. Segments hold
/// round(segment_seconds * fs) samples; a short remainder joins the last one.
Signal detrend(const Signal& signal, double segment_seconds = kDefaultSegmentSeconds);

/// (x - mean) / population sd. Throws zero_variance when sd <= 1e-9.
Signal normalize(const Signal& signal);

Signal band_filter(const Signal& signal, const FilterConfig& cfg);

/// detrend -> normalize -> band_filter.
Signal condition(const Signal& irs, const FilterConfig& cfg,
                 double segment_seconds = kDefaultSegmentSeconds);

}  // namespace thermoresp::dsp
