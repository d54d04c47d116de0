#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "thermoresp/imaging_io.hpp"

namespace thermoresp::io {

struct FrameGeometry {
  int width = 0;
  int height = 0;
  int bit_depth = 16;
  bool operator==(const FrameGeometry&) const = default;
};

/// Random-access, read-only frame sequence. Implementations must be safe to
/// call concurrently from several threads.
class FrameSource {
 public:
  virtual ~FrameSource() = default;

  virtual std::size_t size() const = 0;
  virtual double fps() const = 0;
  virtual FrameGeometry geometry() const = 0;
  virtual Frame frame(std::size_t index) const = 0;

  /// Equivalent to crop(frame(index), box); sources that can render a
  /// sub-rectangle directly override this.
  virtual Frame region(std::size_t index, const RoiBox& box) const;
};

/// Frames loaded lazily from a manifest's PGM files. Every decoded frame is
/// checked against the geometry of the first one.
class ManifestSource final : public FrameSource {
 public:
  explicit ManifestSource(VideoManifest manifest);

  std::size_t size() const override { return manifest_.frame_paths.size(); }
  double fps() const override { return manifest_.fps; }
  FrameGeometry geometry() const override { return geometry_; }
  Frame frame(std::size_t index) const override;

  const VideoManifest& manifest() const noexcept { return manifest_; }

 private:
  VideoManifest manifest_;
  FrameGeometry geometry_;
};

class MemorySource final : public FrameSource {
 public:
  MemorySource(std::vector<Frame> frames, double fps);

  std::size_t size() const override { return frames_.size(); }
  double fps() const override { return fps_; }
  FrameGeometry geometry() const override { return geometry_; }
  Frame frame(std::size_t index) const override;
  Frame region(std::size_t index, const RoiBox& box) const override;

 private:
  std::vector<Frame> frames_;
  double fps_;
  FrameGeometry geometry_;
};

}  // namespace thermoresp::io
