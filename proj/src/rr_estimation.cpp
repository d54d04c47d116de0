#include "thermoresp/rr_estimation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "thermoresp/error.hpp"
#include "thermoresp/fft.hpp"

namespace thermoresp::rr {

namespace {

std::size_t min_separation(const RrOptions& options, double fs) {
  return options.min_separation.value_or(default_min_separation(fs, options.filter.band_high));
}

// Conditioning for the peak-counting methods. A flat signal has no breaths,
// which the caller sees as insufficient_peaks rather than a constant-signal
// failure.
Signal conditioned(const Signal& irs, const RrOptions& options) {
  try {
    return dsp::condition(irs, options.filter, options.segment_seconds);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::zero_variance) {
      fail(ErrorCode::insufficient_peaks, "signal is flat; no breathing peaks");
    }
    throw;
  }
}

std::vector<double> smooth(std::span<const double> x, const std::vector<double>& kernel) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  const auto half = static_cast<std::ptrdiff_t>(kernel.size() / 2);
  auto sample = [&](std::ptrdiff_t i) {
    // Mirror about the end samples; repeat for kernels longer than x.
    if (n == 1) return x[0];
    while (i < 0 || i >= n) {
      if (i < 0) i = -i;
      if (i >= n) i = 2 * (n - 1) - i;
    }
    return x[static_cast<std::size_t>(i)];
  };
  std::vector<double> y(x.size(), 0.0);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::ptrdiff_t k = -half; k <= half; ++k) {
      acc += kernel[static_cast<std::size_t>(k + half)] * sample(i - k);
    }
    y[static_cast<std::size_t>(i)] = acc;
  }
  return y;
}

std::string lower(std::string_view text) {
  std::string s(text);
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

void PeakSet::validate() const {
  if (indices.size() != amplitudes.size()) {
    fail(ErrorCode::invariant_violation, "peak indices and amplitudes differ in length");
  }
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= source_len) fail(ErrorCode::invariant_violation, "peak index past TF");
    if (i > 0 && indices[i] <= indices[i - 1]) {
      fail(ErrorCode::invariant_violation, "peak indices not strictly ascending");
    }
  }
}

std::size_t default_min_separation(double fs, double band_high) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(fs / band_high)));
}

PeakSet detect_candidates(const Signal& signal, std::size_t min_separation) {
  const std::size_t n = signal.size();
  if (n < 3) fail(ErrorCode::signal_too_short, "peak detection needs at least 3 samples");
  const auto s = signal.samples();
  std::vector<std::size_t> maxima;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (s[i - 1] < s[i] && s[i] >= s[i + 1] && s[i] > 0.0) maxima.push_back(i);
  }
  // Greedy suppression, tallest first.
  std::vector<std::size_t> order(maxima.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return s[maxima[a]] > s[maxima[b]]; });
  std::vector<bool> keep(maxima.size(), false);
  std::vector<std::size_t> accepted;
  for (const std::size_t k : order) {
    const std::size_t idx = maxima[k];
    const bool clear = std::none_of(accepted.begin(), accepted.end(), [&](std::size_t a) {
      return (a > idx ? a - idx : idx - a) < min_separation;
    });
    if (clear) {
      accepted.push_back(idx);
      keep[k] = true;
    }
  }
  PeakSet peaks;
  peaks.source_len = n;
  peaks.fs = signal.fs();
  for (std::size_t k = 0; k < maxima.size(); ++k) {
    if (!keep[k]) continue;
    peaks.indices.push_back(maxima[k]);
    peaks.amplitudes.push_back(s[maxima[k]]);
  }
  return peaks;
}

Elimination eliminate_false_peaks(const PeakSet& peaks, double xi) {
  if (!(xi >= 0.0 && xi < 1.0)) fail(ErrorCode::flag_range, "xi must lie in [0, 1)");
  if (peaks.empty()) fail(ErrorCode::insufficient_peaks, "no candidate peaks");
  peaks.validate();
  Elimination out;
  out.awa = std::accumulate(peaks.amplitudes.begin(), peaks.amplitudes.end(), 0.0) /
            static_cast<double>(peaks.size());
  out.thr = out.awa * (1.0 - xi);
  out.kept.source_len = peaks.source_len;
  out.kept.fs = peaks.fs;
  for (std::size_t i = 0; i < peaks.size(); ++i) {
    if (peaks.amplitudes[i] >= out.thr) {
      out.kept.indices.push_back(peaks.indices[i]);
      out.kept.amplitudes.push_back(peaks.amplitudes[i]);
    }
  }
  return out;
}

RrEstimate respiration_rate(const PeakSet& peaks, EdgeRule rule) {
  peaks.validate();
  if (peaks.size() < 2) {
    fail(ErrorCode::insufficient_peaks,
         "need at least 2 peaks, have " + std::to_string(peaks.size()));
  }
  RrEstimate e;
  e.pn = peaks.size();
  e.fp = peaks.indices.front();
  e.lp = peaks.indices.back();
  e.tf = peaks.source_len;
  e.fs = peaks.fs;
  std::size_t span_sum = 0;
  for (std::size_t i = 1; i < peaks.size(); ++i) span_sum += peaks.indices[i] - peaks.indices[i - 1];
  e.adp = static_cast<double>(span_sum) / static_cast<double>(e.pn - 1);
  const double count = static_cast<double>(rule == EdgeRule::verbatim ? e.pn : e.pn - 1);
  e.rr_raw = static_cast<double>(e.fp + (e.tf - e.lp)) / e.adp + count;
  e.rr_bpm = e.rr_raw * 60.0 * e.fs / static_cast<double>(e.tf);
  return e;
}

RrEstimate nrrm_rr(const Signal& irs, double xi, const RrOptions& options) {
  if (!(xi >= 0.0 && xi < 1.0)) fail(ErrorCode::flag_range, "xi must lie in [0, 1)");
  const Signal bf = conditioned(irs, options);
  const auto elim = eliminate_false_peaks(detect_candidates(bf, min_separation(options, bf.fs())), xi);
  RrEstimate e = respiration_rate(elim.kept, options.edge);
  e.thr = elim.thr;
  e.xi = xi;
  return e;
}

RrEstimate nrrm_eep_rr(const Signal& irs, const RrOptions& options) {
  const Signal bf = conditioned(irs, options);
  const PeakSet peaks = detect_candidates(bf, min_separation(options, bf.fs()));
  if (peaks.empty()) fail(ErrorCode::insufficient_peaks, "no candidate peaks");
  return respiration_rate(peaks, options.edge);
}

double fdam_rr(const Signal& irs, const RrOptions& options) {
  if (irs.size() < 8) fail(ErrorCode::signal_too_short, "fdam needs at least 8 samples");
  options.filter.validate(irs.fs());
  const Signal rs_n = dsp::normalize(dsp::detrend(irs, options.segment_seconds));
  const auto spectrum = fft::rfft(rs_n.samples());
  const std::size_t n = rs_n.size();
  std::vector<double> mag(spectrum.size());
  for (std::size_t k = 0; k < spectrum.size(); ++k) mag[k] = std::abs(spectrum[k]);

  std::optional<std::size_t> best;
  for (std::size_t k = 0; k < spectrum.size(); ++k) {
    const double f = fft::bin_frequency(k, n, irs.fs());
    if (f < options.filter.band_low || f > options.filter.band_high) continue;
    if (!best || mag[k] > mag[*best]) best = k;
  }
  if (!best) fail(ErrorCode::invalid_band, "no FFT bin falls inside the band");
  const std::size_t k = *best;
  double delta = 0.0;
  if (k > 0 && k + 1 < mag.size()) {
    const double a = mag[k - 1];
    const double b = mag[k];
    const double c = mag[k + 1];
    const double denom = a - 2.0 * b + c;
    if (denom != 0.0) delta = std::clamp(0.5 * (a - c) / denom, -0.5, 0.5);
  }
  return 60.0 * (static_cast<double>(k) + delta) * irs.fs() / static_cast<double>(n);
}

std::vector<double> gaussian_kernel(int width) {
  if (width < 3) fail(ErrorCode::invalid_width, "gaussian width must be >= 3");
  if (width % 2 == 0) ++width;
  const double sigma = width / 6.0;
  const int half = width / 2;
  std::vector<double> k(static_cast<std::size_t>(width));
  double sum = 0.0;
  for (int i = -half; i <= half; ++i) {
    const double v = std::exp(-0.5 * (i / sigma) * (i / sigma));
    k[static_cast<std::size_t>(i + half)] = v;
    sum += v;
  }
  for (double& v : k) v /= sum;
  return k;
}

RrEstimate gw_rr(const Signal& irs, int width, const RrOptions& options) {
  const auto kernel = gaussian_kernel(width);
  const Signal bf = conditioned(irs, options);
  const Signal smoothed = bf.with_samples(smooth(bf.samples(), kernel), Stage::rs_bf);
  const PeakSet peaks = detect_candidates(smoothed, min_separation(options, bf.fs()));
  if (peaks.empty()) fail(ErrorCode::insufficient_peaks, "no peaks after smoothing");
  RrEstimate e = respiration_rate(peaks, options.edge);
  e.width = static_cast<int>(kernel.size());
  return e;
}

std::string_view to_string(Method method) noexcept {
  switch (method) {
    case Method::nrrm: return "NRRM";
    case Method::nrrm_eep: return "NRRM-EEP";
    case Method::fdam: return "FDAM";
    case Method::gw: return "GW";
  }
  return "NRRM";
}

Method method_from_string(std::string_view text) {
  const std::string s = lower(text);
  if (s == "nrrm") return Method::nrrm;
  if (s == "nrrm-eep" || s == "nrrm_eep" || s == "eep") return Method::nrrm_eep;
  if (s == "fdam") return Method::fdam;
  if (s == "gw") return Method::gw;
  fail(ErrorCode::invalid_argument, "unknown method '" + std::string(text) + "'");
}

RrEstimate run_method(const Signal& irs, const MethodRun& run, const RrOptions& options) {
  switch (run.method) {
    case Method::nrrm:
      return nrrm_rr(irs, run.parameter, options);
    case Method::nrrm_eep:
      return nrrm_eep_rr(irs, options);
    case Method::fdam: {
      RrEstimate e;
      e.rr_bpm = fdam_rr(irs, options);
      e.rr_raw = e.rr_bpm;
      e.tf = irs.size();
      e.fs = irs.fs();
      return e;
    }
    case Method::gw:
      if (run.parameter != std::floor(run.parameter)) {
        fail(ErrorCode::invalid_width, "gaussian width must be an integer sample count");
      }
      return gw_rr(irs, static_cast<int>(run.parameter), options);
  }
  fail(ErrorCode::invalid_argument, "unknown method");
}

ResultRow evaluate(const std::string& video_id, const Signal& irs, const MethodRun& run,
                   const RrOptions& options) {
  ResultRow row;
  row.video_id = video_id;
  row.method = run.method;
  if (run.method == Method::nrrm || run.method == Method::gw) row.xi_or_width = run.parameter;
  try {
    row.estimate = run_method(irs, run, options);
    if (row.estimate->width) row.xi_or_width = *row.estimate->width;
  } catch (const Error& e) {
    row.error_code = std::string(to_string(e.code()));
  }
  return row;
}

std::string results_csv(std::span<const ResultRow> rows) {
  std::ostringstream out;
  out << "video_id,method,xi_or_width,rr_bpm,PN,FP,LP,ADP,TF,error_code\n";
  for (const auto& r : rows) {
    out << r.video_id << ',' << to_string(r.method) << ','
        << (r.xi_or_width ? fmt(*r.xi_or_width) : "") << ',';
    if (r.estimate) {
      const auto& e = *r.estimate;
      out << fmt(e.rr_bpm) << ',' << e.pn << ',' << e.fp << ',' << e.lp << ',' << fmt(e.adp)
          << ',' << e.tf;
    } else {
      out << ",,,,,";
    }
    out << ',' << r.error_code << '\n';
  }
  return out.str();
}

void write_results_csv(std::span<const ResultRow> rows, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::io_failure, "cannot write " + path.string());
  out << results_csv(rows);
  if (!out) fail(ErrorCode::io_failure, "write failed for " + path.string());
}

}  // namespace thermoresp::rr
