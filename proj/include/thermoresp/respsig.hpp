#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "thermoresp/frame_source.hpp"
#include "thermoresp/imaging_io.hpp"

namespace thermoresp {

/// Processing stage a respiration signal has reached.
enum class Stage { irs, rs_d, rs_n, rs_bf };

std::string_view to_string(Stage stage) noexcept;
Stage stage_from_string(std::string_view text);

/// Uniformly sampled real sequence. All samples finite, fs > 0, length >= 1.
class Signal {
 public:
  Signal(std::vector<double> samples, double fs, Stage stage);

  std::span<const double> samples() const noexcept { return samples_; }
  double operator[](std::size_t i) const noexcept { return samples_[i]; }
  std::size_t size() const noexcept { return samples_.size(); }
  double fs() const noexcept { return fs_; }
  Stage stage() const noexcept { return stage_; }
  double duration() const noexcept { return static_cast<double>(size()) / fs_; }

  Signal with_samples(std::vector<double> samples, Stage stage) const {
    return Signal(std::move(samples), fs_, stage);
  }

  bool operator==(const Signal&) const = default;

 private:
  std::vector<double> samples_;
  double fs_;
  Stage stage_;
};

namespace respsig {

/// Mean intensity of all pixels (AP_t), accumulated in 64-bit integers.
double pixel_average(const io::Frame& frame) noexcept;

/// Reconstructs a fully sampled sequence from samples that arrive in
/// increasing index order, some indices missing. Interior gaps are filled by
/// linear interpolation between the neighbouring received samples; leading
/// and trailing gaps hold the nearest received value. Samples become final
/// as soon as their value can no longer change, which lets a streaming
/// consumer forward them early.
class GapFiller {
 public:
  explicit GapFiller(std::size_t total);

  /// `index` must exceed every previously pushed index.
  void push(std::size_t index, double value);
  /// Fills the trailing gap. Throws all_frames_dropped if nothing was pushed.
  void finish();

  std::size_t finalized() const noexcept { return finalized_; }
  std::size_t total() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }

 private:
  std::vector<double> values_;
  std::size_t finalized_ = 0;
  bool have_last_ = false;
  std::size_t last_index_ = 0;
};

/// Initial respiration signal: sample t is the pixel average of frame t
/// cropped to track[t]. Frames flagged in `dropped` are interpolated.
Signal extract_irs(const io::FrameSource& source,
                   std::span<const io::RoiBox> track,
                   const std::vector<bool>& dropped);

Signal extract_irs(const io::VideoManifest& manifest,
                   std::span<const io::RoiBox> track,
                   const std::vector<bool>& dropped);

/// CSV with header "index,value,fs,stage"; values round-trip exactly.
std::string signal_csv(const Signal& signal);
void write_signal_csv(const Signal& signal, const std::filesystem::path& path);
Signal read_signal_csv(const std::filesystem::path& path);

}  // namespace respsig
}  // namespace thermoresp
