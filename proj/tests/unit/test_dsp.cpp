#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "oracles.hpp"
#include "thermoresp/dsp.hpp"
#include "thermoresp/fft.hpp"

using namespace thermoresp;
using testutil::error_of;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> tone(double f, double fs, double seconds, double amp = 1.0, double phase = 0.0) {
  const auto n = static_cast<std::size_t>(std::llround(fs * seconds));
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = amp * std::sin(2.0 * kPi * f * i / fs + phase);
  return x;
}

std::vector<double> values(const Signal& s) { return {s.samples().begin(), s.samples().end()}; }

std::vector<double> random_signal(std::size_t n, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> d(0.0, 1.0);
  std::vector<double> x(n);
  for (auto& v : x) v = d(gen);
  return x;
}

}  // namespace

TEST(Fft, MatchesNaiveDft) {
  for (const std::size_t n : {1u, 2u, 7u, 16u, 99u, 250u}) {
    const auto x = random_signal(n, static_cast<unsigned>(n));
    const auto got = fft::rfft(x);
    const auto ref = oracle::dft(x);
    ASSERT_EQ(got.size(), n / 2 + 1);
    for (std::size_t k = 0; k < got.size(); ++k) {
      EXPECT_NEAR(got[k].real(), ref[k].real(), 1e-9 * n);
      EXPECT_NEAR(got[k].imag(), ref[k].imag(), 1e-9 * n);
    }
    const auto back = fft::irfft(got, n);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(back[i], x[i], 1e-12);
  }
  EXPECT_EQ(fft::bin_frequency(3, 1500, 25.0), 0.05);
}

TEST(Butterworth, MatchesAnalyticMagnitude) {
  const double fs = 25.0;
  for (const int order : {1, 2, 4, 6}) {
    for (const auto& [lo, hi] : {std::pair{0.15, 0.40}, std::pair{0.15, 0.70}, std::pair{1.0, 5.0}}) {
      const auto sos = dsp::butterworth_bandpass(order, lo, hi, fs);
      ASSERT_EQ(sos.size(), static_cast<std::size_t>(order));
      for (double f = 0.01; f < 12.4; f *= 1.07) {
        const double got = std::norm(dsp::frequency_response(sos, 2.0 * kPi * f / fs));
        EXPECT_NEAR(got, oracle::butterworth_mag2(f, lo, hi, fs, order), 1e-8)
            << order << " " << lo << "-" << hi << " @" << f;
      }
      // -3 dB at the edges.
      EXPECT_NEAR(std::norm(dsp::frequency_response(sos, 2.0 * kPi * lo / fs)), 0.5, 1e-8);
      EXPECT_NEAR(std::norm(dsp::frequency_response(sos, 2.0 * kPi * hi / fs)), 0.5, 1e-8);
    }
  }
}

TEST(Butterworth, SettlingLengthBoundsImpulseTail) {
  const auto sos = dsp::butterworth_bandpass(4, 0.15, 0.40, 25.0);
  const std::size_t len = dsp::settling_length(sos);
  EXPECT_GT(len, 10u);
  std::vector<double> impulse(20 * len, 0.0);
  impulse[0] = 1.0;
  const auto h = dsp::sosfilt(sos, impulse);
  double peak = 0.0, tail = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    double& bound = i < 10 * len ? peak : tail;
    bound = std::max(bound, std::abs(h[i]));
  }
  EXPECT_LT(tail, 1e-3 * peak);
}

TEST(Detrend, LineIsAnnihilated) {
  for (const auto& [a, b] : {std::pair{0.0, 1.0}, std::pair{20000.0, -3.5}, std::pair{-7.0, 1e-4}}) {
    std::vector<double> x(200);
    for (std::size_t n = 0; n < x.size(); ++n) x[n] = a + b * n;
    const Signal out = dsp::detrend(Signal(x, 25.0, Stage::irs), 100.0);
    EXPECT_EQ(out.stage(), Stage::rs_d);
    for (const double v : out.samples()) EXPECT_NEAR(v, 0.0, 1e-9);
  }
}

// Per-segment line removal, done independently of the library.
std::vector<double> oracle_detrend(const std::vector<double>& x, std::size_t seg) {
  std::vector<double> y(x.size());
  for (std::size_t b = 0; b < x.size(); b += seg) {
    const std::size_t e = std::min(b + seg, x.size());
    const std::vector<double> part(x.begin() + b, x.begin() + e);
    const auto fit = oracle::ols(part);
    for (std::size_t i = 0; i < part.size(); ++i) {
      y[b + i] = static_cast<double>(part[i] - fit.intercept - fit.slope * static_cast<long double>(i));
    }
  }
  return y;
}

TEST(Detrend, SegmentsRemoveTrendAndKeepTone) {
  auto x = tone(0.3, 25.0, 60.0);
  for (std::size_t n = 0; n < x.size(); ++n) x[n] += 0.01 * n;
  for (const double seconds : {10.0, 60.0}) {
    const Signal out = dsp::detrend(Signal(x, 25.0, Stage::irs), seconds);
    ASSERT_EQ(out.size(), x.size());
    const auto y = values(out);
    const auto seg = static_cast<std::size_t>(seconds * 25.0);
    const auto ref = oracle_detrend(x, seg);
    for (std::size_t n = 0; n < y.size(); ++n) ASSERT_NEAR(y[n], ref[n], 1e-9);
    for (std::size_t b = 0; b < y.size(); b += seg) {
      const std::vector<double> part(y.begin() + b, y.begin() + b + seg);
      EXPECT_LE(std::abs(static_cast<double>(oracle::ols(part).slope)), 1e-6);
    }
    const double amp = oracle::tone_amplitude(y, 0.3, 25.0);
    if (seconds == 60.0) {
      EXPECT_NEAR(amp, 1.0, 0.02);
    } else {
      // A zero-phase sine over whole cycles correlates with the segment line;
      // removing it costs slope * T / (3 pi) of the tone, about 6.8%.
      EXPECT_NEAR(amp, 0.9325, 0.002);
    }
  }
}

TEST(Detrend, RemainderJoinsLastSegmentAndGates) {
  std::vector<double> x(260);
  for (std::size_t n = 0; n < x.size(); ++n) x[n] = (n < 250 ? 1.0 : 0.0) + 0.5 * n;
  const auto y = values(dsp::detrend(Signal(x, 25.0, Stage::irs), 2.0));
  const std::vector<double> last(y.begin() + 200, y.end());
  EXPECT_NEAR(static_cast<double>(oracle::ols(last).slope), 0.0, 1e-9);
  EXPECT_EQ(error_of([] { dsp::detrend(Signal({1.0}, 25.0, Stage::irs)); }), "signal_too_short");
}

TEST(Normalize, Examples) {
  const auto y = values(dsp::normalize(Signal({1.0, 2.0, 3.0}, 1.0, Stage::rs_d)));
  const double z = 1.0 / std::sqrt(2.0 / 3.0);
  EXPECT_NEAR(y[0], -z, 1e-12);
  EXPECT_NEAR(y[1], 0.0, 1e-12);
  EXPECT_NEAR(y[2], z, 1e-12);
  const Signal again = dsp::normalize(Signal(y, 1.0, Stage::rs_d));
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(again[i], y[i], 1e-12);
  EXPECT_EQ(error_of([] { dsp::normalize(Signal({5.0, 5.0, 5.0}, 1.0, Stage::rs_d)); }),
            "zero_variance");
}

TEST(Normalize, DetrendThenNormalizeProperty) {
  for (unsigned seed = 1; seed <= 20; ++seed) {
    auto x = random_signal(100 + 37 * seed, seed);
    for (std::size_t n = 0; n < x.size(); ++n) x[n] = 1000.0 * seed + 0.3 * n + 50.0 * x[n];
    const auto y = values(dsp::normalize(dsp::detrend(Signal(x, 25.0, Stage::irs), 3.0)));
    long double mean = 0, ss = 0;
    for (double v : y) mean += v;
    mean /= y.size();
    for (double v : y) ss += (v - mean) * (v - mean);
    EXPECT_NEAR(static_cast<double>(mean), 0.0, 1e-9 * y.size());
    EXPECT_NEAR(std::sqrt(static_cast<double>(ss / y.size())), 1.0, 1e-9);
  }
}

TEST(BandFilter, PassesBreathingAndRejectsDistractor) {
  for (const auto method : {dsp::FilterMethod::butterworth, dsp::FilterMethod::fft_mask}) {
    dsp::FilterConfig cfg;
    cfg.method = method;
    const auto pass = values(dsp::band_filter(Signal(tone(0.3, 25.0, 60.0), 25.0, Stage::rs_n), cfg));
    EXPECT_GE(oracle::tone_amplitude(pass, 0.3, 25.0), 0.9) << dsp::to_string(method);
    const auto stop = values(dsp::band_filter(Signal(tone(1.2, 25.0, 60.0), 25.0, Stage::rs_n), cfg));
    EXPECT_LE(oracle::tone_amplitude(stop, 1.2, 25.0), 0.1) << dsp::to_string(method);
    EXPECT_EQ(pass.size(), 1500u);
  }
}

TEST(BandFilter, Gates) {
  dsp::FilterConfig cfg;
  cfg.band_high = 13.0;
  const Signal s(tone(0.3, 25.0, 60.0), 25.0, Stage::rs_n);
  EXPECT_EQ(error_of([&] { dsp::band_filter(s, cfg); }), "invalid_band");
  cfg.band_high = 0.1;
  EXPECT_EQ(error_of([&] { dsp::band_filter(s, cfg); }), "invalid_band");
  dsp::FilterConfig ok;
  EXPECT_EQ(error_of([&] { dsp::band_filter(Signal(tone(0.3, 25.0, 4.0), 25.0, Stage::rs_n), ok); }),
            "signal_too_short");
  ok.method = dsp::FilterMethod::fft_mask;
  EXPECT_EQ(error_of([&] { dsp::band_filter(Signal(std::vector<double>(7, 1.0), 25.0, Stage::rs_n), ok); }),
            "signal_too_short");
  EXPECT_EQ(dsp::filter_method_from_string("fft-mask"), dsp::FilterMethod::fft_mask);
}

TEST(BandFilter, FftMaskIdempotentAndReal) {
  dsp::FilterConfig cfg;
  cfg.method = dsp::FilterMethod::fft_mask;
  cfg.band_high = 0.7;
  for (unsigned seed = 1; seed <= 5; ++seed) {
    const Signal s(random_signal(999 + seed, seed), 25.0, Stage::rs_n);
    const Signal once = dsp::band_filter(s, cfg);
    const Signal twice = dsp::band_filter(once, cfg);
    for (std::size_t i = 0; i < s.size(); ++i) ASSERT_NEAR(once[i], twice[i], 1e-9);
    const auto spec = fft::rfft(once.samples());
    for (std::size_t k = 0; k < spec.size(); ++k) {
      const double f = fft::bin_frequency(k, s.size(), 25.0);
      if (f < cfg.band_low || f > cfg.band_high) {
        ASSERT_LT(std::abs(spec[k]), 1e-9);
      }
    }
  }
}

TEST(BandFilter, ZeroPhaseKeepsPeakPositions) {
  const double fs = 25.0;
  for (const double f : {0.2, 0.27, 0.33}) {
    const auto x = tone(f, fs, 60.0, 1.0, 0.7);
    const auto y = values(dsp::band_filter(Signal(x, fs, Stage::rs_n), dsp::FilterConfig{}));
    // Compare local maxima beyond the padding transient at either end.
    const std::size_t margin = 3 * dsp::settling_length(dsp::butterworth_bandpass(4, 0.15, 0.40, fs));
    for (std::size_t i = margin; i + margin < x.size(); ++i) {
      if (x[i] > x[i - 1] && x[i] >= x[i + 1]) {
        std::size_t best = i - 2;
        for (std::size_t j = i - 2; j <= i + 2; ++j) {
          if (y[j] > y[best]) best = j;
        }
        EXPECT_LE(std::abs(static_cast<long>(best) - static_cast<long>(i)), 1) << f << " @" << i;
      }
    }
  }
}

TEST(Condition, DeterministicAndLengthPreserving) {
  auto x = tone(0.25, 25.0, 40.0, 30.0);
  const auto noise = random_signal(x.size(), 3);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += 20000.0 + 0.05 * i + noise[i];
  const Signal irs(x, 25.0, Stage::irs);
  const Signal a = dsp::condition(irs, {});
  EXPECT_EQ(a, dsp::condition(irs, {}));
  EXPECT_EQ(a.size(), irs.size());
  EXPECT_EQ(a.stage(), Stage::rs_bf);
}
