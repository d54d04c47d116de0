#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace thermoresp::io {

/// Grayscale intensity image, row-major. Depth is 8 or 16 bits per sample.
class Frame {
 public:
  Frame() = default;
  /// Throws invariant_violation if the pixel count or any sample value does
  /// not match the declared geometry and depth.
  Frame(int width, int height, int bit_depth, std::vector<std::uint16_t> pixels);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int bit_depth() const noexcept { return bit_depth_; }
  std::uint16_t max_value() const noexcept {
    return bit_depth_ == 8 ? 255 : 65535;
  }

  std::span<const std::uint16_t> pixels() const noexcept { return pixels_; }
  std::uint16_t at(int x, int y) const noexcept {
    return pixels_[static_cast<std::size_t>(y) * width_ + x];
  }
  std::span<const std::uint16_t> row(int y) const noexcept {
    return std::span<const std::uint16_t>(pixels_).subspan(
        static_cast<std::size_t>(y) * width_, width_);
  }

  bool operator==(const Frame&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int bit_depth_ = 8;
  std::vector<std::uint16_t> pixels_;
};

struct RoiBox {
  int x_min = 0;
  int y_min = 0;
  int w = 0;
  int h = 0;

  int x_max() const noexcept { return x_min + w; }  // exclusive
  int y_max() const noexcept { return y_min + h; }  // exclusive
  long long area() const noexcept { return static_cast<long long>(w) * h; }

  bool operator==(const RoiBox&) const = default;
};

/// True when the box is non-degenerate and lies entirely inside a
/// width x height image.
bool fits(const RoiBox& box, int width, int height) noexcept;

/// `inner` is expressed relative to `outer`'s origin.
RoiBox compose(const RoiBox& outer, const RoiBox& inner) noexcept;

double iou(const RoiBox& a, const RoiBox& b) noexcept;

/// Binary PGM (P5), maxval 255 or 65535. 16-bit samples are big-endian.
Frame read_frame(const std::filesystem::path& path);
void write_frame(const Frame& frame, const std::filesystem::path& path);

/// In-memory PGM codec, shared by the file functions.
std::vector<std::uint8_t> encode_pgm(const Frame& frame);
Frame decode_pgm(std::span<const std::uint8_t> bytes);

Frame crop(const Frame& frame, const RoiBox& roi);

/// Payload-only size: width * height * bit_depth / 8.
std::size_t frame_bytes(const Frame& frame) noexcept;
std::size_t frame_bytes(int width, int height, int bit_depth) noexcept;

struct VideoManifest {
  double fps = 0.0;
  int bit_depth = 16;
  /// Absolute, or relative to `base_dir`.
  std::vector<std::filesystem::path> frame_paths;
  std::optional<std::filesystem::path> ground_truth;
  std::filesystem::path base_dir;

  std::filesystem::path resolve(const std::filesystem::path& p) const {
    return p.is_absolute() ? p : base_dir / p;
  }
};

/// JSON: {"fps": .., "bit_depth": .., "frames": [..], "ground_truth": ".."}.
VideoManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const VideoManifest& manifest,
                    const std::filesystem::path& path);

}  // namespace thermoresp::io
