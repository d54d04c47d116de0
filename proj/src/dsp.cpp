#include "thermoresp/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>

#include "thermoresp/error.hpp"
#include "thermoresp/fft.hpp"

namespace thermoresp::dsp {

namespace {

using cd = std::complex<double>;

constexpr double kZeroVariance = 1e-9;
constexpr std::size_t kMinMaskSamples = 8;
constexpr double kRealPoleTol = 1e-12;

std::vector<double> reflect_pad(std::span<const double> x, std::size_t pad) {
  std::vector<double> out;
  out.reserve(x.size() + 2 * pad);
  const double first = x.front();
  const double last = x.back();
  for (std::size_t k = pad; k >= 1; --k) out.push_back(2.0 * first - x[k]);
  out.insert(out.end(), x.begin(), x.end());
  const std::size_t n = x.size();
  for (std::size_t k = 1; k <= pad; ++k) out.push_back(2.0 * last - x[n - 1 - k]);
  return out;
}

Signal butterworth(const Signal& signal, const FilterConfig& cfg) {
  const auto sos = butterworth_bandpass(cfg.butterworth_order, cfg.band_low, cfg.band_high,
                                        signal.fs());
  const std::size_t pad = 3 * settling_length(sos);
  if (signal.size() <= pad) {
    fail(ErrorCode::signal_too_short,
         "butterworth needs more than " + std::to_string(pad) + " samples, got " +
             std::to_string(signal.size()));
  }
  std::vector<double> y = sosfilt(sos, reflect_pad(signal.samples(), pad));
  if (cfg.zero_phase) {
    std::reverse(y.begin(), y.end());
    y = sosfilt(sos, y);
    std::reverse(y.begin(), y.end());
  }
  return signal.with_samples(
      std::vector<double>(y.begin() + static_cast<std::ptrdiff_t>(pad),
                          y.begin() + static_cast<std::ptrdiff_t>(pad + signal.size())),
      Stage::rs_bf);
}

Signal fft_mask(const Signal& signal, const FilterConfig& cfg) {
  const std::size_t n = signal.size();
  if (n < kMinMaskSamples) {
    fail(ErrorCode::signal_too_short, "fft-mask needs at least 8 samples");
  }
  auto spectrum = fft::rfft(signal.samples());
  for (std::size_t k = 0; k < spectrum.size(); ++k) {
    const double f = fft::bin_frequency(k, n, signal.fs());
    if (f < cfg.band_low || f > cfg.band_high) spectrum[k] = 0.0;
  }
  return signal.with_samples(fft::irfft(spectrum, n), Stage::rs_bf);
}

}  // namespace

std::string_view to_string(FilterMethod method) noexcept {
  return method == FilterMethod::fft_mask ? "fft-mask" : "butterworth";
}

FilterMethod filter_method_from_string(std::string_view text) {
  if (text == "butterworth") return FilterMethod::butterworth;
  if (text == "fft-mask") return FilterMethod::fft_mask;
  fail(ErrorCode::invalid_argument, "unknown filter '" + std::string(text) + "'");
}

void FilterConfig::validate(double fs) const {
  if (!(band_low > 0.0 && band_low < band_high && band_high < fs / 2.0)) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "band [%g, %g] Hz invalid for fs %g (need 0 < low < high < %g)",
                  band_low, band_high, fs, fs / 2.0);
    fail(ErrorCode::invalid_band, buf);
  }
  if (method == FilterMethod::butterworth && (butterworth_order < 1 || butterworth_order > 16)) {
    fail(ErrorCode::invalid_argument, "butterworth order must lie in [1, 16]");
  }
}

std::vector<Biquad> butterworth_bandpass(int order, double low_hz, double high_hz, double fs) {
  FilterConfig{low_hz, high_hz, FilterMethod::butterworth, order, true}.validate(fs);
  const double pi = std::numbers::pi;
  const double wl = 2.0 * fs * std::tan(pi * low_hz / fs);
  const double wh = 2.0 * fs * std::tan(pi * high_hz / fs);
  const double bw = wh - wl;
  const double w0 = std::sqrt(wl * wh);

  std::vector<cd> poles;
  for (int k = 1; k <= order; ++k) {
    const cd p = std::polar(1.0, pi * (2.0 * k + order - 1) / (2.0 * order));
    const cd disc = std::sqrt(p * p * bw * bw - 4.0 * w0 * w0);
    for (const cd s : {(p * bw + disc) / 2.0, (p * bw - disc) / 2.0}) {
      poles.push_back((2.0 * fs + s) / (2.0 * fs - s));
    }
  }

  std::vector<Biquad> sos;
  std::vector<double> real_poles;
  for (const cd z : poles) {
    if (z.imag() > kRealPoleTol) {
      sos.push_back({1.0, 0.0, -1.0, -2.0 * z.real(), std::norm(z)});
    } else if (std::abs(z.imag()) <= kRealPoleTol) {
      real_poles.push_back(z.real());
    }
  }
  for (std::size_t i = 0; i + 1 < real_poles.size(); i += 2) {
    const double r1 = real_poles[i];
    const double r2 = real_poles[i + 1];
    sos.push_back({1.0, 0.0, -1.0, -(r1 + r2), r1 * r2});
  }
  if (static_cast<int>(sos.size()) != order) {
    fail(ErrorCode::invariant_violation, "butterworth pole pairing failed");
  }

  // Unit gain at the centre frequency, spread evenly over the sections.
  const double omega0 = 2.0 * std::atan(w0 / (2.0 * fs));
  for (auto& s : sos) {
    const double g = 1.0 / std::abs(frequency_response(std::span<const Biquad>(&s, 1), omega0));
    s.b0 *= g;
    s.b1 *= g;
    s.b2 *= g;
  }
  return sos;
}

std::complex<double> frequency_response(std::span<const Biquad> sos, double omega) {
  const cd z1 = std::polar(1.0, -omega);
  const cd z2 = z1 * z1;
  cd h = 1.0;
  for (const auto& s : sos) {
    h *= (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
  }
  return h;
}

std::size_t settling_length(std::span<const Biquad> sos) {
  double rmax = 0.0;
  for (const auto& s : sos) {
    // Roots of z^2 + a1 z + a2.
    const cd disc = std::sqrt(cd(s.a1 * s.a1 - 4.0 * s.a2, 0.0));
    rmax = std::max({rmax, std::abs((-s.a1 + disc) / 2.0), std::abs((-s.a1 - disc) / 2.0)});
  }
  if (!(rmax < 1.0)) fail(ErrorCode::invariant_violation, "filter is not stable");
  if (rmax == 0.0) return 1;
  return static_cast<std::size_t>(std::ceil(-1.0 / std::log(rmax)));
}

std::vector<double> sosfilt(std::span<const Biquad> sos, std::span<const double> x) {
  std::vector<double> y(x.begin(), x.end());
  for (const auto& s : sos) {
    double z1 = 0.0;
    double z2 = 0.0;
    for (double& v : y) {
      const double in = v;
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      v = out;
    }
  }
  return y;
}

Signal detrend(const Signal& signal, double segment_seconds) {
  const std::size_t n = signal.size();
  if (n < 2) fail(ErrorCode::signal_too_short, "detrend needs at least 2 samples");
  if (!(segment_seconds > 0.0)) fail(ErrorCode::invalid_argument, "segment length must be > 0");
  const auto seg = static_cast<std::size_t>(std::llround(segment_seconds * signal.fs()));
  if (seg < 2) {
    fail(ErrorCode::invalid_argument, "detrend segment shorter than 2 samples");
  }
  const std::size_t segments = std::max<std::size_t>(1, n / seg);

  const auto x = signal.samples();
  std::vector<double> out(n);
  for (std::size_t s = 0; s < segments; ++s) {
    const std::size_t begin = s * seg;
    const std::size_t end = s + 1 == segments ? n : begin + seg;
    const double m = static_cast<double>(end - begin);
    const double t_mean = (m - 1.0) / 2.0;
    double y_mean = 0.0;
    for (std::size_t i = begin; i < end; ++i) y_mean += x[i];
    y_mean /= m;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      const double t = static_cast<double>(i - begin) - t_mean;
      sxy += t * (x[i] - y_mean);
      sxx += t * t;
    }
    const double slope = sxy / sxx;
    for (std::size_t i = begin; i < end; ++i) {
      const double t = static_cast<double>(i - begin) - t_mean;
      out[i] = (x[i] - y_mean) - slope * t;
    }
  }
  return signal.with_samples(std::move(out), Stage::rs_d);
}

Signal normalize(const Signal& signal) {
  const auto x = signal.samples();
  const double n = static_cast<double>(x.size());
  double mean = 0.0;
  for (const double v : x) mean += v;
  mean /= n;
  double ss = 0.0;
  for (const double v : x) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / n);
  if (!(sd > kZeroVariance)) fail(ErrorCode::zero_variance, "signal is constant");
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mean) / sd;
  return signal.with_samples(std::move(out), Stage::rs_n);
}

Signal band_filter(const Signal& signal, const FilterConfig& cfg) {
  cfg.validate(signal.fs());
  return cfg.method == FilterMethod::butterworth ? butterworth(signal, cfg)
                                                 : fft_mask(signal, cfg);
}

Signal condition(const Signal& irs, const FilterConfig& cfg, double segment_seconds) {
  cfg.validate(irs.fs());
  return band_filter(normalize(detrend(irs, segment_seconds)), cfg);
}

}  // namespace thermoresp::dsp
