#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "thermoresp/frame_source.hpp"
#include "thermoresp/imaging_io.hpp"
#include "thermoresp/respsig.hpp"

// Deterministic synthetic thermal video with exact ground truth.
//
// Pixel (x, y) of frame n, t = n / fps:
//   baseline(x, y) + trend_slope * n + noise
//   + texture(x - nose.x, y - nose.y) + amplitude * breath(t)   inside the nose box
//   + distractor.amplitude * sin(2 pi f t)                       inside the distractor box
// then rounded to nearest and clamped to the bit depth. The texture is exactly
// zero-mean over the nose box, so the box mean carries only the breathing,
// baseline, trend and noise terms. Noise is N(0, noise_sd) per pixel keyed on
// (seed, frame, pixel) through the counter-based generator in rng.hpp.

namespace thermoresp::synth {

enum class Waveform {
  sinusoid,
  /// sin clipped at +/- clip_level and rescaled to unit peak.
  clipped_sinusoid,
  /// One sine period squeezed into active_fraction of each breath cycle, zero
  /// for the rest (post-expiratory pause).
  paused_sinusoid,
};

/// Narrow Gaussian bumps added to the breathing waveform. Ticks fall at
/// `rate_hz`; each tick is moved to the nearest instant of the breath cycle at
/// the waveform's quiet phase (trough, or mid-pause for paused_sinusoid), so a
/// bump forms its own small local maximum rather than riding a breath.
struct SpuriousBumps {
  double rate_hz = 0.22;
  double amplitude_ratio = 0.3;
  double width_s = 0.3;  // Gaussian sigma
};

struct BreathingModel {
  double rr_bpm = 18.0;
  double amplitude = 1.0;
  Waveform waveform = Waveform::sinusoid;
  double phase = 0.0;  // radians
  double clip_level = 0.7;
  double active_fraction = 0.6;
  std::optional<SpuriousBumps> bumps;
};

struct Baseline {
  double level = 20000.0;
  double gradient_x = 0.0;  // intensity per pixel
  double gradient_y = 0.0;
};

struct Motion {
  double drift_x = 0.0;  // px per frame
  double drift_y = 0.0;
  double jitter_x = 0.0;  // px amplitude
  double jitter_y = 0.0;
  double jitter_period_s = 4.0;
};

/// Independently oscillating rectangle (eyes, mouth). Its box is given in
/// frame-0 coordinates and follows the head motion.
struct Distractor {
  io::RoiBox box;
  double amplitude = 0.0;
  double frequency_hz = 1.2;
};

struct SceneConfig {
  double duration_s = 60.0;
  double fps = 25.0;
  int width = 640;
  int height = 480;
  int bit_depth = 16;
  Baseline baseline;
  io::RoiBox nose_roi0{304, 228, 32, 24};
  Motion motion;
  double trend_slope = 0.0;  // intensity per frame
  double noise_sd = 0.0;
  double texture_amplitude = 600.0;  // RMS of the nose texture
  std::optional<Distractor> distractor;
  /// Frames in which the face is absent: only baseline, trend and noise.
  std::vector<std::size_t> occluded_frames;
  std::uint64_t seed = 1;
  double band_low_hz = 0.1;  // admissible breathing frequencies
  double band_high_hz = 0.7;

  std::size_t frame_count() const noexcept;
};

struct GroundTruth {
  double rr_bpm = 0.0;
  std::vector<io::RoiBox> roi_track;
  std::vector<double> breath_event_times;
  std::vector<bool> occluded;
};

/// Throws motion_excursion, sampling_inadequate or invalid_argument.
void validate(const SceneConfig& scene, const BreathingModel& breath);

/// Unit-amplitude breathing waveform plus bumps at time t (seconds).
double breath_waveform(const BreathingModel& breath, double t);

io::RoiBox nose_box(const SceneConfig& scene, std::size_t frame_index) noexcept;

GroundTruth ground_truth(const SceneConfig& scene, const BreathingModel& breath);

/// Noise-free box mean under perfect tracking (closed form, no quantization).
Signal ideal_irs(const SceneConfig& scene, const BreathingModel& breath);

/// Renders frames on demand. region() synthesizes only the requested pixels
/// and agrees bit-for-bit with crop(frame()).
class SyntheticSource final : public io::FrameSource {
 public:
  SyntheticSource(SceneConfig scene, BreathingModel breath);

  std::size_t size() const override { return count_; }
  double fps() const override { return scene_.fps; }
  io::FrameGeometry geometry() const override {
    return {scene_.width, scene_.height, scene_.bit_depth};
  }
  io::Frame frame(std::size_t index) const override;
  io::Frame region(std::size_t index, const io::RoiBox& box) const override;

  const SceneConfig& scene() const noexcept { return scene_; }
  const BreathingModel& breath() const noexcept { return breath_; }
  const std::vector<double>& texture() const noexcept { return texture_; }

 private:
  SceneConfig scene_;
  BreathingModel breath_;
  std::size_t count_;
  std::vector<double> texture_;
  std::vector<bool> occluded_;
};

struct Generated {
  io::VideoManifest manifest;
  GroundTruth truth;
};

/// Writes frame_NNNNN.pgm, manifest.json and ground_truth.json into out_dir.
Generated generate(const SceneConfig& scene, const BreathingModel& breath,
                   const std::filesystem::path& out_dir, unsigned jobs = 0);

void write_ground_truth(const GroundTruth& truth, const std::filesystem::path& path);
GroundTruth read_ground_truth(const std::filesystem::path& path);

}  // namespace thermoresp::synth
