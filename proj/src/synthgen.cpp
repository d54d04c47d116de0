#include "thermoresp/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <string>

#include <nlohmann/json.hpp>

#include "thermoresp/error.hpp"
#include "thermoresp/parallel.hpp"
#include "thermoresp/rng.hpp"

namespace thermoresp::synth {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::uint64_t kTextureStream = 0x7465787475726531ULL;
constexpr std::uint64_t kNoiseStream = 0x6E6F697365303031ULL;

struct Offset {
  int dx = 0;
  int dy = 0;
};

Offset motion_offset(const SceneConfig& scene, std::size_t n) noexcept {
  const double k = static_cast<double>(n);
  const double jitter_phase = kTwoPi * k / (scene.fps * scene.motion.jitter_period_s);
  const double ox = scene.motion.drift_x * k + scene.motion.jitter_x * std::sin(jitter_phase);
  const double oy = scene.motion.drift_y * k + scene.motion.jitter_y * std::sin(jitter_phase);
  return {static_cast<int>(std::lround(ox)), static_cast<int>(std::lround(oy))};
}

io::RoiBox shifted(const io::RoiBox& box, Offset off) noexcept {
  return {box.x_min + off.dx, box.y_min + off.dy, box.w, box.h};
}

// Fraction of the breath cycle where the waveform is quiet.
double quiet_phase(const BreathingModel& breath) noexcept {
  return breath.waveform == Waveform::paused_sinusoid
             ? 0.5 * (breath.active_fraction + 1.0)
             : 0.75;
}

// Fraction of the breath cycle at which the exhalation peak sits.
double peak_phase(const BreathingModel& breath) noexcept {
  return breath.waveform == Waveform::paused_sinusoid ? 0.25 * breath.active_fraction
                                                      : 0.25;
}

double base_waveform(const BreathingModel& breath, double theta) noexcept {
  switch (breath.waveform) {
    case Waveform::sinusoid:
      return std::sin(theta);
    case Waveform::clipped_sinusoid: {
      const double c = breath.clip_level;
      return std::clamp(std::sin(theta), -c, c) / c;
    }
    case Waveform::paused_sinusoid: {
      double cycle = std::fmod(theta / kTwoPi, 1.0);
      if (cycle < 0.0) cycle += 1.0;
      const double d = breath.active_fraction;
      return cycle < d ? std::sin(kTwoPi * cycle / d) : 0.0;
    }
  }
  return 0.0;
}

// Breath-cycle index that tick k snaps to.
long long snapped_cycle(const BreathingModel& breath, const SpuriousBumps& bumps,
                        long long k) noexcept {
  const double omega = kTwoPi * breath.rr_bpm / 60.0;
  const double tick = (static_cast<double>(k) + 0.5) / bumps.rate_hz;
  return std::llround((omega * tick + breath.phase) / kTwoPi - quiet_phase(breath));
}

double cycle_time(const BreathingModel& breath, double cycles) noexcept {
  const double omega = kTwoPi * breath.rr_bpm / 60.0;
  return (kTwoPi * cycles - breath.phase) / omega;
}

double bump_sum(const BreathingModel& breath, double t) noexcept {
  const SpuriousBumps& b = *breath.bumps;
  const double period = 60.0 / breath.rr_bpm;
  const double reach = 6.0 * b.width_s + period;
  const long long k_lo = std::max<long long>(
      0, static_cast<long long>(std::floor((t - reach) * b.rate_hz - 0.5)));
  const long long k_hi = static_cast<long long>(std::ceil((t + reach) * b.rate_hz - 0.5));
  double sum = 0.0;
  for (long long k = k_lo; k <= k_hi; ++k) {
    const long long cycle = snapped_cycle(breath, b, k);
    if (k > 0 && snapped_cycle(breath, b, k - 1) == cycle) continue;  // one bump per cycle
    const double centre = cycle_time(breath, static_cast<double>(cycle) + quiet_phase(breath));
    const double z = (t - centre) / b.width_s;
    sum += b.amplitude_ratio * std::exp(-0.5 * z * z);
  }
  return sum;
}

bool contains(const io::RoiBox& box, int x, int y) noexcept {
  return x >= box.x_min && x < box.x_max() && y >= box.y_min && y < box.y_max();
}

std::vector<double> make_texture(const SceneConfig& scene) {
  const int w = scene.nose_roi0.w;
  const int h = scene.nose_roi0.h;
  std::vector<double> tex(static_cast<std::size_t>(w) * h, 0.0);
  rng::SplitMix64 stream(rng::derive(scene.seed, kTextureStream));
  constexpr int kComponents = 6;
  for (int c = 0; c < kComponents; ++c) {
    const double fx = stream.uniform(1.0, 3.5) * (stream.uniform() < 0.5 ? -1.0 : 1.0);
    const double fy = stream.uniform(1.0, 3.5);
    const double amp = stream.uniform(0.5, 1.0);
    const double ph = stream.uniform(0.0, kTwoPi);
    for (int v = 0; v < h; ++v) {
      for (int u = 0; u < w; ++u) {
        tex[static_cast<std::size_t>(v) * w + u] +=
            amp * std::cos(kTwoPi * (fx * u / w + fy * v / h) + ph);
      }
    }
  }
  double mean = 0.0;
  for (double v : tex) mean += v;
  mean /= static_cast<double>(tex.size());
  double ss = 0.0;
  for (double& v : tex) {
    v -= mean;
    ss += v * v;
  }
  const double rms = std::sqrt(ss / static_cast<double>(tex.size()));
  const double scale = rms > 0.0 ? scene.texture_amplitude / rms : 0.0;
  for (double& v : tex) v *= scale;
  return tex;
}

}  // namespace

std::size_t SceneConfig::frame_count() const noexcept {
  const double n = std::llround(duration_s * fps);
  return n > 0 ? static_cast<std::size_t>(n) : 0;
}

void validate(const SceneConfig& scene, const BreathingModel& breath) {
  if (!(scene.fps > 0.0)) fail(ErrorCode::sampling_inadequate, "fps must be positive");
  if (!(scene.duration_s > 0.0) || scene.frame_count() == 0) {
    fail(ErrorCode::invalid_argument, "duration must cover at least one frame");
  }
  if (scene.width <= 0 || scene.height <= 0) {
    fail(ErrorCode::invalid_argument, "frame size must be positive");
  }
  if (scene.bit_depth != 8 && scene.bit_depth != 16) {
    fail(ErrorCode::invalid_argument, "bit depth must be 8 or 16");
  }
  if (!(scene.band_low_hz > 0.0 && scene.band_low_hz < scene.band_high_hz)) {
    fail(ErrorCode::invalid_argument, "generation band must satisfy 0 < low < high");
  }
  if (scene.fps < 2.0 * scene.band_high_hz) {
    fail(ErrorCode::sampling_inadequate,
         "fps " + std::to_string(scene.fps) + " below twice the band upper edge " +
             std::to_string(scene.band_high_hz) + " Hz");
  }
  if (scene.distractor && scene.fps < 2.0 * scene.distractor->frequency_hz) {
    fail(ErrorCode::sampling_inadequate, "fps too low for the distractor frequency");
  }
  if (!(breath.rr_bpm >= 6.0 && breath.rr_bpm <= 42.0)) {
    fail(ErrorCode::invalid_argument, "rr_bpm must lie in [6, 42]");
  }
  const double f = breath.rr_bpm / 60.0;
  if (f < scene.band_low_hz || f > scene.band_high_hz) {
    fail(ErrorCode::sampling_inadequate,
         "breathing frequency " + std::to_string(f) + " Hz outside the generation band");
  }
  if (breath.amplitude < 0.0) fail(ErrorCode::invalid_argument, "amplitude must be >= 0");
  if (scene.noise_sd < 0.0) fail(ErrorCode::invalid_argument, "noise_sd must be >= 0");
  if (breath.waveform == Waveform::clipped_sinusoid &&
      !(breath.clip_level > 0.0 && breath.clip_level <= 1.0)) {
    fail(ErrorCode::invalid_argument, "clip_level must be in (0, 1]");
  }
  if (breath.waveform == Waveform::paused_sinusoid &&
      !(breath.active_fraction > 0.0 && breath.active_fraction <= 1.0)) {
    fail(ErrorCode::invalid_argument, "active_fraction must be in (0, 1]");
  }
  if (breath.bumps && !(breath.bumps->rate_hz > 0.0 && breath.bumps->width_s > 0.0)) {
    fail(ErrorCode::invalid_argument, "bump rate and width must be positive");
  }
  if (scene.nose_roi0.w < 1 || scene.nose_roi0.h < 1) {
    fail(ErrorCode::invalid_argument, "nose roi must be non-empty");
  }
  const std::size_t m = scene.frame_count();
  for (std::size_t n = 0; n < m; ++n) {
    const Offset off = motion_offset(scene, n);
    if (!io::fits(shifted(scene.nose_roi0, off), scene.width, scene.height)) {
      fail(ErrorCode::motion_excursion,
           "nose roi leaves the frame at frame " + std::to_string(n));
    }
    if (scene.distractor &&
        !io::fits(shifted(scene.distractor->box, off), scene.width, scene.height)) {
      fail(ErrorCode::motion_excursion,
           "distractor leaves the frame at frame " + std::to_string(n));
    }
  }
  for (std::size_t idx : scene.occluded_frames) {
    if (idx >= m) fail(ErrorCode::out_of_bounds, "occluded frame index past end");
  }
}

double breath_waveform(const BreathingModel& breath, double t) {
  const double theta = kTwoPi * breath.rr_bpm / 60.0 * t + breath.phase;
  double v = base_waveform(breath, theta);
  if (breath.bumps) v += bump_sum(breath, t);
  return v;
}

io::RoiBox nose_box(const SceneConfig& scene, std::size_t frame_index) noexcept {
  return shifted(scene.nose_roi0, motion_offset(scene, frame_index));
}

GroundTruth ground_truth(const SceneConfig& scene, const BreathingModel& breath) {
  validate(scene, breath);
  GroundTruth gt;
  gt.rr_bpm = breath.rr_bpm;
  const std::size_t m = scene.frame_count();
  gt.roi_track.reserve(m);
  for (std::size_t n = 0; n < m; ++n) gt.roi_track.push_back(nose_box(scene, n));
  gt.occluded.assign(m, false);
  for (std::size_t idx : scene.occluded_frames) gt.occluded[idx] = true;

  const double duration = static_cast<double>(m) / scene.fps;
  const double first = std::ceil(breath.phase / kTwoPi - peak_phase(breath));
  for (double j = first;; j += 1.0) {
    const double t = cycle_time(breath, j + peak_phase(breath));
    if (t >= duration) break;
    if (t >= 0.0) gt.breath_event_times.push_back(t);
  }
  return gt;
}

Signal ideal_irs(const SceneConfig& scene, const BreathingModel& breath) {
  validate(scene, breath);
  const std::size_t m = scene.frame_count();
  std::vector<bool> occluded(m, false);
  for (std::size_t idx : scene.occluded_frames) occluded[idx] = true;
  std::vector<double> out(m);
  for (std::size_t n = 0; n < m; ++n) {
    const double t = static_cast<double>(n) / scene.fps;
    const io::RoiBox box = nose_box(scene, n);
    // Mean of a linear ramp over an integer grid is its value at the centre.
    double v = scene.baseline.level +
               scene.baseline.gradient_x * (box.x_min + 0.5 * (box.w - 1)) +
               scene.baseline.gradient_y * (box.y_min + 0.5 * (box.h - 1)) +
               scene.trend_slope * static_cast<double>(n);
    if (!occluded[n]) {
      v += breath.amplitude * breath_waveform(breath, t);
      if (scene.distractor) {
        const io::RoiBox d = shifted(scene.distractor->box, motion_offset(scene, n));
        const int ix = std::max(0, std::min(d.x_max(), box.x_max()) - std::max(d.x_min, box.x_min));
        const int iy = std::max(0, std::min(d.y_max(), box.y_max()) - std::max(d.y_min, box.y_min));
        const double overlap = static_cast<double>(ix) * iy / static_cast<double>(box.area());
        v += overlap * scene.distractor->amplitude *
             std::sin(kTwoPi * scene.distractor->frequency_hz * t);
      }
    }
    out[n] = v;
  }
  return Signal(std::move(out), scene.fps, Stage::irs);
}

SyntheticSource::SyntheticSource(SceneConfig scene, BreathingModel breath)
    : scene_(std::move(scene)), breath_(std::move(breath)) {
  validate(scene_, breath_);
  count_ = scene_.frame_count();
  texture_ = make_texture(scene_);
  occluded_.assign(count_, false);
  for (std::size_t idx : scene_.occluded_frames) occluded_[idx] = true;
}

io::Frame SyntheticSource::frame(std::size_t index) const {
  return region(index, {0, 0, scene_.width, scene_.height});
}

io::Frame SyntheticSource::region(std::size_t index, const io::RoiBox& box) const {
  if (index >= count_) fail(ErrorCode::out_of_bounds, "frame index past end");
  if (!io::fits(box, scene_.width, scene_.height)) {
    fail(ErrorCode::out_of_bounds, "requested region outside the frame");
  }
  const double t = static_cast<double>(index) / scene_.fps;
  const Offset off = motion_offset(scene_, index);
  const io::RoiBox nose = shifted(scene_.nose_roi0, off);
  const bool face = !occluded_[index];
  const double breath_term = face ? breath_.amplitude * breath_waveform(breath_, t) : 0.0;
  std::optional<io::RoiBox> distractor;
  double distractor_term = 0.0;
  if (face && scene_.distractor) {
    distractor = shifted(scene_.distractor->box, off);
    distractor_term = scene_.distractor->amplitude *
                      std::sin(kTwoPi * scene_.distractor->frequency_hz * t);
  }
  const double trend = scene_.trend_slope * static_cast<double>(index);
  const double max_value = scene_.bit_depth == 8 ? 255.0 : 65535.0;
  const std::uint64_t frame_key = rng::derive(scene_.seed, kNoiseStream, index);

  std::vector<std::uint16_t> pixels;
  pixels.reserve(static_cast<std::size_t>(box.area()));
  for (int y = box.y_min; y < box.y_max(); ++y) {
    for (int x = box.x_min; x < box.x_max(); ++x) {
      double v = scene_.baseline.level + scene_.baseline.gradient_x * x +
                 scene_.baseline.gradient_y * y + trend;
      if (face && contains(nose, x, y)) {
        v += texture_[static_cast<std::size_t>(y - nose.y_min) * nose.w + (x - nose.x_min)] +
             breath_term;
      }
      if (distractor && contains(*distractor, x, y)) v += distractor_term;
      if (scene_.noise_sd > 0.0) {
        const auto pixel = static_cast<std::uint64_t>(y) * scene_.width + x;
        v += scene_.noise_sd * rng::standard_normal(rng::mix64(frame_key ^ pixel));
      }
      pixels.push_back(static_cast<std::uint16_t>(std::clamp(std::round(v), 0.0, max_value)));
    }
  }
  return io::Frame(box.w, box.h, scene_.bit_depth, std::move(pixels));
}

Generated generate(const SceneConfig& scene, const BreathingModel& breath,
                   const std::filesystem::path& out_dir, unsigned jobs) {
  const SyntheticSource source(scene, breath);
  std::filesystem::create_directories(out_dir);
  Generated out;
  out.truth = ground_truth(scene, breath);
  out.manifest.fps = scene.fps;
  out.manifest.bit_depth = scene.bit_depth;
  out.manifest.base_dir = out_dir;
  out.manifest.ground_truth = "ground_truth.json";
  const std::size_t m = source.size();
  out.manifest.frame_paths.resize(m);
  for (std::size_t n = 0; n < m; ++n) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%05zu.pgm", n);
    out.manifest.frame_paths[n] = name;
  }
  parallel_for(m, jobs, [&](std::size_t n) {
    io::write_frame(source.frame(n), out_dir / out.manifest.frame_paths[n]);
  });
  io::write_manifest(out.manifest, out_dir / "manifest.json");
  write_ground_truth(out.truth, out_dir / "ground_truth.json");
  return out;
}

void write_ground_truth(const GroundTruth& truth, const std::filesystem::path& path) {
  nlohmann::json doc;
  doc["rr_bpm"] = truth.rr_bpm;
  doc["roi_track"] = nlohmann::json::array();
  for (const auto& r : truth.roi_track) {
    doc["roi_track"].push_back({r.x_min, r.y_min, r.w, r.h});
  }
  doc["breath_event_times"] = truth.breath_event_times;
  nlohmann::json occluded = nlohmann::json::array();
  for (std::size_t i = 0; i < truth.occluded.size(); ++i) {
    if (truth.occluded[i]) occluded.push_back(i);
  }
  doc["occluded_frames"] = occluded;
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::io_failure, "cannot write " + path.string());
  out << doc.dump(1) << '\n';
}

GroundTruth read_ground_truth(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io_failure, "cannot open " + path.string());
  GroundTruth gt;
  try {
    nlohmann::json doc;
    in >> doc;
    gt.rr_bpm = doc.at("rr_bpm").get<double>();
    for (const auto& r : doc.at("roi_track")) {
      gt.roi_track.push_back({r.at(0).get<int>(), r.at(1).get<int>(), r.at(2).get<int>(),
                              r.at(3).get<int>()});
    }
    gt.breath_event_times = doc.at("breath_event_times").get<std::vector<double>>();
    gt.occluded.assign(gt.roi_track.size(), false);
    if (doc.contains("occluded_frames")) {
      for (const auto& i : doc["occluded_frames"]) {
        const auto idx = i.get<std::size_t>();
        if (idx < gt.occluded.size()) gt.occluded[idx] = true;
      }
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::invariant_violation, "bad ground truth " + path.string() + ": " + e.what());
  }
  return gt;
}

}  // namespace thermoresp::synth
