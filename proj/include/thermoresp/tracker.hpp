#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "thermoresp/featurenet.hpp"
#include "thermoresp/frame_source.hpp"
#include "thermoresp/imaging_io.hpp"

// Template tracker: the exemplar cut from frame 0 is matched against a search
// window around the previous ROI, and the score-map argmax becomes the new
// ROI. Two similarity back ends: dense normalized cross-correlation of raw
// pixels, and cross-correlation of embeddings from the convolutional stack in
// featurenet.hpp.

namespace thermoresp::tracker {

enum class TrackerMode { pixel_ncc, featurenet };

std::string_view to_string(TrackerMode mode) noexcept;
TrackerMode tracker_mode_from_string(std::string_view text);

struct TrackerConfig {
  TrackerMode mode = TrackerMode::pixel_ncc;
  std::uint64_t seed = 0;
  /// pixel_ncc search window is the ROI scaled by this factor about its centre.
  double search_inflation = 2.0;
  /// Frames whose best score is below the floor are dropped. Unset: 0.3 for
  /// pixel_ncc, 10th percentile of the frame-0 score map for featurenet.
  std::optional<double> confidence_floor;
  /// Exponential template update after each accepted frame; 0 keeps the
  /// frame-0 exemplar.
  double template_update_rate = 0.0;
  int exemplar_side = 127;
  int search_side = 255;
};

struct ScoreMap {
  int width = 0;
  int height = 0;
  std::vector<double> scores;  // row-major
  int argmax_row = 0;
  int argmax_col = 0;
  double argmax_value = 0.0;

  double at(int row, int col) const noexcept {
    return scores[static_cast<std::size_t>(row) * width + col];
  }
};

struct ExemplarState {
  io::Frame exemplar;  // frame-0 crop, dimensions of roi0
  io::RoiBox last_roi;
  double search_inflation = 2.0;
  TrackerConfig config;
  int frame_width = 0;
  int frame_height = 0;
  /// Current template in pixel units (differs from exemplar once updated).
  std::vector<double> template_values;
  std::shared_ptr<const FeatureNet> net;
  Tensor exemplar_features;
};

/// Throws roi_too_small (below 8x8), out_of_bounds, input_too_small.
ExemplarState init_tracker(const io::Frame& first_frame, const io::RoiBox& roi0,
                           const TrackerConfig& config);

/// Region of the frame the next score map is computed over.
io::RoiBox search_window(const ExemplarState& state);

/// Score map over `window`, whose pixels are supplied in `window_pixels`.
ScoreMap score_map(const ExemplarState& state, const io::Frame& window_pixels,
                   const io::RoiBox& window);
ScoreMap score_map(const ExemplarState& state, const io::Frame& frame);

/// Frame-coordinate ROI for score-map position (row, col).
io::RoiBox locate(const ExemplarState& state, const io::RoiBox& window, int row, int col);

struct TrackPoint {
  io::RoiBox roi;
  double score = 0.0;
  bool dropped = false;
  bool operator==(const TrackPoint&) const = default;
};

/// Sequential tracker over a frame source. step() must be called with
/// consecutive indices starting at 0.
class Tracker {
 public:
  Tracker(const io::FrameSource& source, const io::RoiBox& roi0, TrackerConfig config);

  TrackPoint step(std::size_t index);
  double confidence_floor() const noexcept { return floor_; }
  const ExemplarState& state() const noexcept { return state_; }

 private:
  const io::FrameSource& source_;
  ExemplarState state_;
  double floor_ = 0.0;
  double first_score_ = 1.0;
  std::size_t next_ = 0;
};

std::vector<TrackPoint> track_sequence(const io::FrameSource& source,
                                       const io::RoiBox& roi0,
                                       const TrackerConfig& config);
std::vector<TrackPoint> track_sequence(const io::VideoManifest& manifest,
                                       const io::RoiBox& roi0,
                                       const TrackerConfig& config);

std::vector<io::RoiBox> rois(std::span<const TrackPoint> track);
std::vector<bool> dropped_flags(std::span<const TrackPoint> track);

/// CSV: frame_index,x_min,y_min,w,h,score,dropped
std::string track_csv(std::span<const TrackPoint> track);
void write_track_csv(std::span<const TrackPoint> track, const std::filesystem::path& path);
std::vector<TrackPoint> read_track_csv(const std::filesystem::path& path);

/// Bilinear resample to out_w x out_h, then zero mean and unit variance
/// (zero variance leaves all zeros). Output is a 1-channel tensor.
Tensor prepare_crop(const io::Frame& crop, int out_w, int out_h);

}  // namespace thermoresp::tracker
