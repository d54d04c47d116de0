#include "thermoresp/frame_source.hpp"

#include <string>

#include "thermoresp/error.hpp"

namespace thermoresp::io {

Frame FrameSource::region(std::size_t index, const RoiBox& box) const {
  return crop(frame(index), box);
}

ManifestSource::ManifestSource(VideoManifest manifest)
    : manifest_(std::move(manifest)) {
  if (manifest_.frame_paths.empty()) {
    fail(ErrorCode::empty_input, "manifest lists no frames");
  }
  const Frame first = read_frame(manifest_.resolve(manifest_.frame_paths.front()));
  if (first.bit_depth() != manifest_.bit_depth) {
    fail(ErrorCode::invariant_violation,
         "first frame depth " + std::to_string(first.bit_depth()) +
             " differs from manifest bit_depth " +
             std::to_string(manifest_.bit_depth));
  }
  geometry_ = {first.width(), first.height(), first.bit_depth()};
}

Frame ManifestSource::frame(std::size_t index) const {
  if (index >= size()) fail(ErrorCode::out_of_bounds, "frame index past end");
  Frame f = read_frame(manifest_.resolve(manifest_.frame_paths[index]));
  if (FrameGeometry{f.width(), f.height(), f.bit_depth()} != geometry_) {
    fail(ErrorCode::invariant_violation,
         "frame " + std::to_string(index) + " geometry differs from frame 0");
  }
  return f;
}

MemorySource::MemorySource(std::vector<Frame> frames, double fps)
    : frames_(std::move(frames)), fps_(fps) {
  if (frames_.empty()) fail(ErrorCode::empty_input, "no frames");
  if (!(fps_ > 0.0)) fail(ErrorCode::invariant_violation, "fps must be > 0");
  const Frame& f = frames_.front();
  geometry_ = {f.width(), f.height(), f.bit_depth()};
  for (const Frame& other : frames_) {
    if (FrameGeometry{other.width(), other.height(), other.bit_depth()} != geometry_) {
      fail(ErrorCode::invariant_violation, "frames do not share one geometry");
    }
  }
}

Frame MemorySource::frame(std::size_t index) const {
  if (index >= size()) fail(ErrorCode::out_of_bounds, "frame index past end");
  return frames_[index];
}

Frame MemorySource::region(std::size_t index, const RoiBox& box) const {
  if (index >= size()) fail(ErrorCode::out_of_bounds, "frame index past end");
  return crop(frames_[index], box);
}

}  // namespace thermoresp::io
