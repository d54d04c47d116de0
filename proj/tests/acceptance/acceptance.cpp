// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "thermoresp/dsp.hpp"
#include "thermoresp/error.hpp"
#include "thermoresp/eval_stats.hpp"
#include "thermoresp/featurenet.hpp"
#include "thermoresp/frame_source.hpp"
#include "thermoresp/imaging_io.hpp"
#include "thermoresp/respsig.hpp"
#include "thermoresp/rng.hpp"
#include "thermoresp/rr_estimation.hpp"
#include "thermoresp/synthgen.hpp"
#include "thermoresp/tiered_pipeline.hpp"
#include "thermoresp/tracker.hpp"

using namespace thermoresp;

namespace {

// Pinned thresholds and tolerances.
constexpr double kMaxMae = 1.0;             // bpm
constexpr double kMaxRmse = 1.5;            // bpm
constexpr double kMaxCorpusSeconds = 300.0;
constexpr double kGwSlack = 0.1;            // bpm
constexpr double kMinTrafficRatio = 100.0;
constexpr double kMaxPassLossDb = 1.0;
constexpr double kMinStopAttenuationDb = 20.0;
constexpr long kMaxPeakShift = 1;           // samples
constexpr double kIdempotenceTol = 1e-9;
constexpr double kDetrendTol = 1e-9;
constexpr double kMeanTol = 1e-9;
constexpr double kSdTol = 1e-9;
constexpr double kMinIou = 0.7;
constexpr double kBaTol = 1e-9;
constexpr double kRealTimeSeconds = 60.0;
constexpr double kCalibrationTol = 1e-9;    // s

constexpr double kPi = std::numbers::pi;
constexpr double kXi = 0.25;
constexpr std::size_t kCorpusSize = 20;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

int failures = 0;

void report(int id, bool pass, const std::string& name, const std::string& detail) {
  if (!pass) ++failures;
  std::printf("[%s] %d %s: %s\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
}

struct Scene {
  synth::SceneConfig scene;
  synth::BreathingModel breath;
};

// 60 s, 640x480 16-bit, random rate, noise, drift, trend and phase.
Scene corpus_scene(std::uint64_t seed, bool bumps) {
  rng::SplitMix64 r(seed);
  Scene s;
  s.breath.rr_bpm = r.uniform(12.0, 30.0);
  s.breath.amplitude = 60.0;
  s.breath.phase = r.uniform(0.0, 2.0 * kPi);
  if (bumps) {
    s.breath.waveform = synth::Waveform::paused_sinusoid;
    s.breath.bumps = synth::SpuriousBumps{};
  }
  s.scene.noise_sd = r.uniform(0.0, 0.2 * s.breath.amplitude);
  const double drift = r.uniform(0.0, 0.3);
  const double dir = r.uniform(0.0, 2.0 * kPi);
  s.scene.motion.drift_x = drift * std::cos(dir);
  s.scene.motion.drift_y = drift * std::sin(dir);
  s.scene.trend_slope = r.uniform(-0.2, 0.2);
  const double span = static_cast<double>(s.scene.frame_count() - 1);
  s.scene.nose_roi0 = {static_cast<int>(std::lround(304.0 - 0.5 * span * s.scene.motion.drift_x)),
                       static_cast<int>(std::lround(228.0 - 0.5 * span * s.scene.motion.drift_y)), 32,
                       24};
  s.scene.seed = seed;
  return s;
}

pipeline::PipelineConfig nose_config() {
  pipeline::PipelineConfig cfg;
  cfg.mode = pipeline::TransferMode::nose;
  cfg.method = {rr::Method::nrrm, kXi};
  cfg.options.filter.band_high = 0.7;
  return cfg;
}

struct Metrics {
  double mae = 0.0;
  double rmse = 0.0;
};

Metrics metrics(const std::vector<double>& truth, const std::vector<double>& pred) {
  eval::PairedResults p;
  p.truth = truth;
  p.predicted = pred;
  return {eval::mae(p), eval::rmse(p)};
}

double mean_iou(std::span<const tracker::TrackPoint> track, std::span<const io::RoiBox> truth) {
  double sum = 0.0;
  for (std::size_t i = 0; i < track.size(); ++i) sum += io::iou(track[i].roi, truth[i]);
  return sum / static_cast<double>(track.size());
}

std::vector<double> tone(double f, double fs, double seconds, double phase = 0.0) {
  const auto n = static_cast<std::size_t>(std::llround(fs * seconds));
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::sin(2.0 * kPi * f * static_cast<double>(i) / fs + phase);
  return x;
}

io::Frame textured_frame(int w, int h, int dx, int dy, std::uint64_t seed) {
  const int pad = 64;
  const int fw = w + 2 * pad;
  std::vector<std::uint16_t> px(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto sx = static_cast<std::uint64_t>(x - dx + pad);
      const auto sy = static_cast<std::uint64_t>(y - dy + pad);
      const double u = rng::uniform01(rng::derive(seed, sy * static_cast<std::uint64_t>(fw) + sx));
      px[static_cast<std::size_t>(y) * w + x] = static_cast<std::uint16_t>(1000 + 4000 * u);
    }
  }
  return io::Frame(w, h, 16, std::move(px));
}

std::vector<pipeline::CostReport> nose_costs;

// 1: end-to-end accuracy over the seeded corpus; also feeds 8 and 11.
std::vector<double> criterion1(std::vector<double>& per_scene_iou) {
  const auto t0 = Clock::now();
  std::vector<double> truth, pred;
  std::size_t errors = 0;
  for (std::size_t i = 0; i < kCorpusSize; ++i) {
    const Scene s = corpus_scene(1000 + i, false);
    const synth::SyntheticSource source(s.scene, s.breath);
    const auto r = pipeline::run_pipeline(source, s.scene.nose_roi0, nose_config());
    nose_costs.push_back(r.cost);
    const auto gt = synth::ground_truth(s.scene, s.breath);
    per_scene_iou.push_back(mean_iou(r.track, gt.roi_track));
    if (!r.estimate) {
      ++errors;
      continue;
    }
    truth.push_back(s.breath.rr_bpm);
    pred.push_back(r.estimate->rr_bpm);
  }
  const double elapsed = seconds_since(t0);
  std::ostringstream d;
  if (truth.empty()) {
    report(1, false, "end-to-end synthetic accuracy", "every scene failed");
    return {};
  }
  const Metrics m = metrics(truth, pred);
  double bias = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) bias += pred[i] - truth[i];
  bias /= static_cast<double>(truth.size());
  d << kCorpusSize << " scenes, " << errors << " errors, MAE " << fmt("%.4f", m.mae) << " (<= "
    << kMaxMae << "), RMSE " << fmt("%.4f", m.rmse) << " (<= " << kMaxRmse << "), mean bias "
    << fmt("%+.4f", bias) << " bpm, runtime " << fmt("%.1f", elapsed) << " s (<= "
    << kMaxCorpusSeconds << ")";
  report(1, errors == 0 && m.mae <= kMaxMae && m.rmse <= kMaxRmse && elapsed <= kMaxCorpusSeconds,
         "end-to-end synthetic accuracy", d.str());
  return pred;
}

// 2 and 3: ablation and xi sweep on the spurious-bump corpus.
void criteria2and3() {
  eval::SweepVariant variant{"nose", {}};
  std::size_t pipeline_errors = 0;
  for (std::size_t i = 0; i < kCorpusSize; ++i) {
    const Scene s = corpus_scene(2000 + i, true);
    const synth::SyntheticSource source(s.scene, s.breath);
    const auto r = pipeline::run_pipeline(source, s.scene.nose_roi0, nose_config());
    nose_costs.push_back(r.cost);
    if (r.irs.empty()) {
      ++pipeline_errors;
      continue;
    }
    variant.videos.push_back({"bump" + std::to_string(i), Signal(r.irs, s.scene.fps, Stage::irs),
                              s.breath.rr_bpm});
  }
  const std::vector<double> xis{0.20, 0.25, 0.30, 0.35, 0.40};
  std::vector<eval::SweepColumn> columns{{"NRRM", {rr::Method::nrrm, kXi}},
                                         {"NRRM-EEP", {rr::Method::nrrm_eep, 0.0}}};
  const std::size_t gw_first = columns.size();
  for (int w = 50; w <= 150; w += 10) {
    columns.push_back({"GW" + std::to_string(w), {rr::Method::gw, static_cast<double>(w)}});
  }
  const std::size_t xi_first = columns.size();
  for (const double xi : xis) columns.push_back({"xi=" + fmt("%.2f", xi), {rr::Method::nrrm, xi}});
  rr::RrOptions options;
  options.filter.band_high = 0.7;
  const std::vector<eval::SweepVariant> variants{variant};
  const auto table = eval::sweep(variants, columns, options, 1);

  const auto mae_of = [&](std::size_t c) {
    const auto& cell = table.at(0, c);
    return cell.mae ? *cell.mae : INFINITY;
  };
  double gw_best = INFINITY;
  std::string gw_label;
  for (std::size_t c = gw_first; c < xi_first; ++c) {
    if (mae_of(c) < gw_best) {
      gw_best = mae_of(c);
      gw_label = columns[c].label;
    }
  }
  const double nrrm = mae_of(0);
  const double eep = mae_of(1);
  std::ostringstream d2;
  d2 << variant.videos.size() << " videos, MAE NRRM " << fmt("%.4f", nrrm) << " < NRRM-EEP "
     << fmt("%.4f", eep) << "; NRRM <= best GW (" << gw_label << ") " << fmt("%.4f", gw_best)
     << " + " << kGwSlack;
  report(2, pipeline_errors == 0 && nrrm < eep && nrrm <= gw_best + kGwSlack,
         "ablation ordering on spurious-bump corpus", d2.str());

  std::size_t argmin = xi_first;
  std::size_t aborted = 0;
  std::ostringstream row;
  for (std::size_t c = xi_first; c < columns.size(); ++c) {
    aborted += table.at(0, c).errors;
    if (mae_of(c) < mae_of(argmin)) argmin = c;
    row << " " << columns[c].label << ":" << fmt("%.4f", mae_of(c)) << "/"
        << fmt("%.4f", table.at(0, c).rmse.value_or(INFINITY));
  }
  std::printf("xi sweep (MAE/RMSE):%s\n", row.str().c_str());
  std::ostringstream d3;
  d3 << "minimum MAE at " << columns[argmin].label << " (must not be the right edge), "
     << aborted << " aborted cells";
  report(3, pipeline_errors == 0 && aborted == 0 && argmin != columns.size() - 1,
         "xi sweep shape", d3.str());
}

// 4: traffic ratio, exact arithmetic on the ledger.
void criterion4() {
  Scene s;
  s.scene.bit_depth = 8;
  s.scene.baseline.level = 100.0;
  s.scene.texture_amplitude = 25.0;
  s.scene.nose_roi0 = {288, 216, 64, 48};
  s.breath.amplitude = 20.0;
  const synth::SyntheticSource source(s.scene, s.breath);
  std::vector<tracker::TrackPoint> track;
  for (const auto& b : synth::ground_truth(s.scene, s.breath).roi_track) track.push_back({b, 1.0, false});
  std::ostringstream d;
  bool pass = true;
  for (const std::size_t overhead : {std::size_t{0}, std::size_t{64}}) {
    std::size_t bytes[2] = {};
    for (const auto mode : {pipeline::TransferMode::original, pipeline::TransferMode::nose}) {
      auto cfg = nose_config();
      cfg.mode = mode;
      cfg.track = track;
      cfg.cost.per_message_overhead_bytes = overhead;
      const auto r = pipeline::run_pipeline(source, s.scene.nose_roi0, cfg);
      bytes[mode == pipeline::TransferMode::nose] =
          r.ledger.totals(pipeline::Boundary::robot_cloud).bytes;
    }
    const double ratio = static_cast<double>(bytes[0]) / static_cast<double>(bytes[1]);
    const bool ok = ratio >= kMinTrafficRatio;
    pass = pass && ok;
    d << "overhead " << overhead << " B: " << bytes[0] << "/" << bytes[1] << " = "
      << fmt("%.6f", ratio) << (ok ? " ok" : " below 100") << "; ";
  }
  d << "every overhead <= 64 B must reach " << kMinTrafficRatio;
  report(4, pass, "traffic ratio original/nose", d.str());
}

// 5: verbatim rate formula against a brute-force evaluation, bitwise.
void criterion5() {
  std::mt19937_64 gen(5150);
  std::size_t mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t tf = std::uniform_int_distribution<std::size_t>(10, 6000)(gen);
    const double fs = std::uniform_real_distribution<double>(1.0, 60.0)(gen);
    const std::size_t pn =
        std::uniform_int_distribution<std::size_t>(2, std::min<std::size_t>(tf, 60))(gen);
    std::vector<std::size_t> idx;
    while (idx.size() < pn) {
      const std::size_t k = std::uniform_int_distribution<std::size_t>(0, tf - 1)(gen);
      if (std::find(idx.begin(), idx.end(), k) == idx.end()) idx.push_back(k);
    }
    std::sort(idx.begin(), idx.end());
    rr::PeakSet peaks;
    peaks.indices = idx;
    for (std::size_t i = 0; i < pn; ++i) {
      peaks.amplitudes.push_back(std::uniform_real_distribution<double>(0.1, 3.0)(gen));
    }
    peaks.source_len = tf;
    peaks.fs = fs;
    const auto est = rr::respiration_rate(peaks);
    const auto ref = oracle::eq5(idx, tf, fs);
    if (std::bit_cast<std::uint64_t>(est.rr_raw) != std::bit_cast<std::uint64_t>(ref.raw) ||
        std::bit_cast<std::uint64_t>(est.rr_bpm) != std::bit_cast<std::uint64_t>(ref.scaled) ||
        est.pn != ref.pn) {
      ++mismatches;
    }
  }
  report(5, mismatches == 0, "rate formula oracle equivalence",
         "1000 random peak trains, " + std::to_string(mismatches) + " bitwise mismatches");
}

// 6: filter properties.
void criterion6() {
  const double fs = 25.0;
  const dsp::FilterConfig cfg;
  double worst_pass_db = 0.0;
  double worst_stop_db = INFINITY;
  for (const auto method : {dsp::FilterMethod::butterworth, dsp::FilterMethod::fft_mask}) {
    dsp::FilterConfig c = cfg;
    c.method = method;
    const auto pass_out = dsp::band_filter(Signal(tone(0.30, fs, 60.0), fs, Stage::rs_n), c);
    const auto stop_out = dsp::band_filter(Signal(tone(1.20, fs, 60.0), fs, Stage::rs_n), c);
    const std::vector<double> p(pass_out.samples().begin(), pass_out.samples().end());
    const std::vector<double> q(stop_out.samples().begin(), stop_out.samples().end());
    worst_pass_db = std::max(worst_pass_db, -20.0 * std::log10(oracle::tone_amplitude(p, 0.30, fs)));
    worst_stop_db = std::min(worst_stop_db, -20.0 * std::log10(oracle::tone_amplitude(q, 1.20, fs)));
  }
  // Phase is judged where the padding transient has decayed: farther than
  // the pad (3 settling lengths) from either end. The edge zone is reported.
  const std::size_t margin = 3 * dsp::settling_length(
      dsp::butterworth_bandpass(cfg.butterworth_order, cfg.band_low, cfg.band_high, fs));
  long worst_shift = 0;
  long worst_edge_shift = 0;
  for (double f = 0.16; f <= 0.401; f += 0.02) {
    for (const double phase : {0.0, 0.9, 2.1, 3.7, 5.2}) {
      const auto x = tone(f, fs, 60.0, phase);
      const auto out = dsp::band_filter(Signal(x, fs, Stage::rs_n), cfg);
      for (std::size_t i = 6; i + 6 < x.size(); ++i) {
        if (!(x[i] > x[i - 1] && x[i] >= x[i + 1])) continue;
        std::size_t best = i - 5;
        for (std::size_t j = i - 5; j <= i + 5; ++j) {
          if (out[j] > out[best]) best = j;
        }
        const long shift = std::labs(static_cast<long>(best) - static_cast<long>(i));
        const bool steady = i >= margin && i + margin < x.size();
        long& worst = steady ? worst_shift : worst_edge_shift;
        worst = std::max(worst, shift);
      }
    }
  }
  double worst_idem = 0.0;
  dsp::FilterConfig mask = cfg;
  mask.method = dsp::FilterMethod::fft_mask;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    std::vector<double> x(1000 + 37 * seed);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng::standard_normal(rng::derive(seed, i));
    const auto once = dsp::band_filter(Signal(x, fs, Stage::rs_n), mask);
    const auto twice = dsp::band_filter(once, mask);
    for (std::size_t i = 0; i < x.size(); ++i) worst_idem = std::max(worst_idem, std::abs(once[i] - twice[i]));
  }
  std::ostringstream d;
  d << "0.30 Hz loss " << fmt("%.4f", worst_pass_db) << " dB (<= " << kMaxPassLossDb
    << "), 1.20 Hz attenuation " << fmt("%.2f", worst_stop_db) << " dB (>= "
    << kMinStopAttenuationDb << "), peak shift " << worst_shift << " (<= " << kMaxPeakShift
    << ") beyond " << margin << " samples from the ends (" << worst_edge_shift
    << " inside), fft-mask idempotence " << fmt("%.2e", worst_idem) << " (<= " << kIdempotenceTol << ")";
  report(6,
         worst_pass_db <= kMaxPassLossDb && worst_stop_db >= kMinStopAttenuationDb &&
             worst_shift <= kMaxPeakShift && worst_idem <= kIdempotenceTol,
         "filter properties", d.str());
}

// 7: detrend and normalize.
void criterion7() {
  double worst_line = 0.0;
  for (int k = 0; k < 50; ++k) {
    const double a = rng::uniform01(rng::derive(7, k, 0)) * 4e4 - 2e4;
    const double b = rng::uniform01(rng::derive(7, k, 1)) * 20.0 - 10.0;
    const std::size_t n = 2 + static_cast<std::size_t>(k) * 31;
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = a + b * static_cast<double>(i);
    const auto y = dsp::detrend(Signal(x, 25.0, Stage::irs), 1e6);
    for (const double v : y.samples()) worst_line = std::max(worst_line, std::abs(v));
  }
  double worst_mean = 0.0;
  double worst_sd = 0.0;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    const std::size_t n = 3 + seed * 13;
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = 20000.0 + 0.2 * static_cast<double>(i) + 40.0 * rng::standard_normal(rng::derive(seed, i));
    }
    const auto y = dsp::normalize(dsp::detrend(Signal(x, 25.0, Stage::irs), 4.0));
    long double mean = 0.0L;
    for (const double v : y.samples()) mean += v;
    mean /= static_cast<long double>(n);
    long double ss = 0.0L;
    for (const double v : y.samples()) ss += (v - mean) * (v - mean);
    worst_mean = std::max(worst_mean, std::abs(static_cast<double>(mean)));
    worst_sd = std::max(worst_sd, std::abs(std::sqrt(static_cast<double>(ss / n)) - 1.0));
  }
  std::ostringstream d;
  d << "line residual " << fmt("%.2e", worst_line) << " (<= " << kDetrendTol << "), |mean| "
    << fmt("%.2e", worst_mean) << " (<= " << kMeanTol << "), |sd - 1| " << fmt("%.2e", worst_sd)
    << " (<= " << kSdTol << ")";
  report(7, worst_line <= kDetrendTol && worst_mean <= kMeanTol && worst_sd <= kSdTol,
         "detrend and normalize", d.str());
}

// 8: tracker shapes, IoU on drifting scenes, exact equivariance.
void criterion8(const std::vector<double>& corpus_iou) {
  const auto spec = tracker::FeatureNetSpec::standard(1);
  const auto ex = tracker::feature_shapes(spec, 127).back();
  const auto se = tracker::feature_shapes(spec, 255).back();
  const tracker::FeatureNet net(spec);
  const auto ef = net.embed(tracker::prepare_crop(textured_frame(127, 127, 0, 0, 1), 127, 127));
  const auto sf = net.embed(tracker::prepare_crop(textured_frame(255, 255, 0, 0, 2), 255, 255));
  const auto map = tracker::cross_correlate(ef, sf);
  const bool shapes = ex.h == 6 && ex.w == 6 && ex.c == 256 && se.h == 22 && se.w == 22 &&
                      se.c == 256 && ef.h == 6 && ef.c == 256 && sf.h == 22 && map.h == 17 &&
                      map.w == 17;

  Scene s;
  s.scene.duration_s = 12.0;
  s.scene.nose_roi0 = {300, 200, 64, 48};
  s.scene.motion.drift_x = 0.5;
  s.breath.amplitude = 60.0;
  s.scene.noise_sd = 0.01 * s.breath.amplitude;
  const synth::SyntheticSource source(s.scene, s.breath);
  const auto track = tracker::track_sequence(source, s.scene.nose_roi0, {});
  const double drift_iou = mean_iou(track, synth::ground_truth(s.scene, s.breath).roi_track);
  double min_iou = drift_iou;
  for (const double v : corpus_iou) min_iou = std::min(min_iou, v);

  std::size_t violations = 0;
  std::size_t checks = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const io::RoiBox roi{100, 80, 32, 24};
    const io::Frame f0 = textured_frame(240, 180, 0, 0, seed);
    const auto state = tracker::init_tracker(f0, roi, {});
    const auto base = tracker::score_map(state, f0);
    for (int dx = -16; dx <= 16; dx += 2) {
      for (int dy = -12; dy <= 12; dy += 3) {
        const auto m = tracker::score_map(state, textured_frame(240, 180, dx, dy, seed));
        ++checks;
        if (m.argmax_col - base.argmax_col != dx || m.argmax_row - base.argmax_row != dy) ++violations;
      }
    }
  }
  std::ostringstream d;
  d << "shapes 127->" << ex.h << "x" << ex.w << "x" << ex.c << ", 255->" << se.h << "x" << se.w
    << "x" << se.c << ", map " << map.h << "x" << map.w << "; mean IoU drift-0.5 scene "
    << fmt("%.4f", drift_iou) << ", worst over " << corpus_iou.size() + 1 << " drifting scenes "
    << fmt("%.4f", min_iou) << " (>= " << kMinIou << "); equivariance " << violations << "/" << checks
    << " violations";
  report(8, shapes && min_iou >= kMinIou && violations == 0, "tracker geometry and accuracy", d.str());
}

// 9: Bland-Altman against independently computed values and CSV regeneration.
void criterion9() {
  struct Case {
    std::vector<double> truth, pred;
    double mean, sd, low, high;
  };
  // Reference values from Python's statistics module.
  const std::vector<Case> cases{
      {{10, 12, 14}, {11, 11, 15}, 0.3333333333333333, 1.1547005383792515, -1.9298797218899997,
       2.5965463885566664},
      {{15, 18, 20, 22}, {16, 17, 21, 25}, 1.0, 1.632993161855452, -2.200666597236686,
       4.200666597236686},
      {{12.5, 16.0, 20.25, 24.0, 30.0}, {13.0, 15.5, 21.0, 25.5, 28.75}, 0.2, 1.0810874155219827,
       -1.918931334423086, 2.318931334423086},
  };
  double worst = 0.0;
  bool csv_ok = true;
  for (const auto& c : cases) {
    eval::PairedResults p;
    p.truth = c.truth;
    p.predicted = c.pred;
    const auto ba = eval::bland_altman(p);
    const auto ref = oracle::bland_altman(c.truth, c.pred);
    for (const double e : {ba.mean_diff - c.mean, ba.sd_diff - c.sd, ba.loa_low - c.low,
                           ba.loa_high - c.high, ba.mean_diff - ref.mean, ba.sd_diff - ref.sd}) {
      worst = std::max(worst, std::abs(e));
    }
    std::istringstream in(eval::bland_altman_csv(ba));
    std::string line;
    std::getline(in, line);
    csv_ok = csv_ok && line == "id,mean,diff";
    std::size_t i = 0;
    while (std::getline(in, line)) {
      const auto a = line.find(',');
      const auto b = line.find(',', a + 1);
      const double mean = std::stod(line.substr(a + 1, b - a - 1));
      const double diff = std::stod(line.substr(b + 1));
      csv_ok = csv_ok && i < c.truth.size() &&
               std::abs(mean - 0.5 * (c.truth[i] + c.pred[i])) <= kBaTol &&
               std::abs(diff - (c.pred[i] - c.truth[i])) <= kBaTol;
      ++i;
    }
    csv_ok = csv_ok && i == c.truth.size();
  }
  std::ostringstream d;
  d << "3 datasets, worst deviation " << fmt("%.2e", worst) << " (<= " << kBaTol << "), scatter CSV "
    << (csv_ok ? "regenerates every (mean, diff) point" : "mismatch");
  report(9, worst <= kBaTol && csv_ok, "Bland-Altman agreement", d.str());
}

// 10: concurrency harness on 10 corpora and cross-mode identity.
void criterion10() {
  std::size_t equivalent = 0;
  std::size_t with_drops = 0;
  std::string first_divergence;
  for (std::size_t i = 0; i < 10; ++i) {
    Scene s = corpus_scene(3000 + i, i % 3 == 2);
    if (i % 2 == 1) {
      for (std::size_t k = 11 * i % 20; k < s.scene.frame_count(); k += 20) s.scene.occluded_frames.push_back(k);
    }
    const synth::SyntheticSource source(s.scene, s.breath);
    auto cfg = nose_config();
    cfg.channel_capacity = 4;
    const auto rep = pipeline::concurrency_harness(source, s.scene.nose_roi0, cfg);
    nose_costs.push_back(rep.sequential.cost);
    nose_costs.push_back(rep.concurrent.cost);
    if (rep.sequential.ledger.totals(pipeline::Boundary::robot_cloud).dropped_frames > 0) ++with_drops;
    if (rep.equivalent) {
      ++equivalent;
    } else if (first_divergence.empty()) {
      first_divergence = rep.description;
    }
  }

  Scene s = corpus_scene(3100, false);
  s.scene.duration_s = 20.0;
  s.scene.motion = {};
  s.scene.nose_roi0 = {304, 228, 32, 24};
  const synth::SyntheticSource source(s.scene, s.breath);
  auto nose = nose_config();
  auto original = nose_config();
  original.mode = pipeline::TransferMode::original;
  const auto rn = pipeline::run_pipeline(source, s.scene.nose_roi0, nose);
  const auto ro = pipeline::run_pipeline(source, s.scene.nose_roi0, original);
  nose_costs.push_back(rn.cost);
  const std::size_t drops = rn.ledger.totals(pipeline::Boundary::robot_cloud).dropped_frames +
                            ro.ledger.totals(pipeline::Boundary::robot_cloud).dropped_frames;
  const bool cross = rn.estimate && ro.estimate && drops == 0 &&
                     std::bit_cast<std::uint64_t>(rn.estimate->rr_bpm) ==
                         std::bit_cast<std::uint64_t>(ro.estimate->rr_bpm) &&
                     rn.track == ro.track;
  std::ostringstream d;
  d << equivalent << "/10 equivalent (" << with_drops << " with dropped frames)";
  if (!first_divergence.empty()) d << ", first divergence: " << first_divergence;
  d << "; original vs nose rr_bpm "
    << (rn.estimate ? fmt("%.6f", rn.estimate->rr_bpm) : std::string("n/a")) << " vs "
    << (ro.estimate ? fmt("%.6f", ro.estimate->rr_bpm) : std::string("n/a"))
    << (cross ? " identical" : " differ") << ", " << drops << " drops";
  report(10, equivalent == 10 && with_drops > 0 && cross, "pipeline determinism", d.str());
}

// 11: real-time cost model.
void criterion11() {
  Scene s;
  s.scene.width = 160;
  s.scene.height = 120;
  s.scene.bit_depth = 8;
  s.scene.baseline.level = 100.0;
  s.scene.texture_amplitude = 25.0;
  s.scene.nose_roi0 = {48, 36, 64, 48};
  s.breath.amplitude = 20.0;
  const synth::SyntheticSource source(s.scene, s.breath);
  auto cfg = nose_config();
  std::vector<tracker::TrackPoint> track;
  for (const auto& b : synth::ground_truth(s.scene, s.breath).roi_track) track.push_back({b, 1.0, false});
  cfg.track = track;
  const auto ref = pipeline::run_pipeline(source, s.scene.nose_roi0, cfg);
  const bool calibrated =
      std::abs(ref.cost.comm_seconds - pipeline::kReferenceCommSeconds) <= kCalibrationTol &&
      std::abs(ref.cost.comp_seconds - pipeline::kReferenceCompSeconds) <= kCalibrationTol;
  double worst = ref.cost.total();
  for (const auto& c : nose_costs) worst = std::max(worst, c.total());
  std::ostringstream d;
  d << "reference run comm " << fmt("%.4f", ref.cost.comm_seconds) << " s comp "
    << fmt("%.4f", ref.cost.comp_seconds) << " s; worst comm+comp over " << nose_costs.size() + 1
    << " nose-mode runs " << fmt("%.3f", worst) << " s (< " << kRealTimeSeconds << ")";
  report(11, calibrated && worst < kRealTimeSeconds, "real-time cost model", d.str());
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  try {
    std::vector<double> corpus_iou;
    criterion1(corpus_iou);
    criteria2and3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8(corpus_iou);
    criterion9();
    criterion10();
    criterion11();
  } catch (const Error& e) {
    std::printf("[FAIL] aborted: %s: %s\n", std::string(to_string(e.code())).c_str(), e.what());
    return 1;
  }
  std::printf("%d of 11 criteria failed, %.1f s\n", failures, seconds_since(t0));
  return failures == 0 ? 0 : 1;
}
