#include "thermoresp/imaging_io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iterator>

#include <nlohmann/json.hpp>

#include "thermoresp/error.hpp"

namespace thermoresp::io {

namespace fs = std::filesystem;

Frame::Frame(int width, int height, int bit_depth,
             std::vector<std::uint16_t> pixels)
    : width_(width), height_(height), bit_depth_(bit_depth),
      pixels_(std::move(pixels)) {
  if (width_ <= 0 || height_ <= 0) {
    fail(ErrorCode::invariant_violation, "frame dimensions must be positive");
  }
  if (bit_depth_ != 8 && bit_depth_ != 16) {
    fail(ErrorCode::invariant_violation, "bit depth must be 8 or 16");
  }
  if (pixels_.size() != static_cast<std::size_t>(width_) * height_) {
    fail(ErrorCode::invariant_violation,
         "pixel count " + std::to_string(pixels_.size()) + " does not match " +
             std::to_string(width_) + "x" + std::to_string(height_));
  }
  if (bit_depth_ == 8 &&
      std::any_of(pixels_.begin(), pixels_.end(),
                  [](std::uint16_t v) { return v > 255; })) {
    fail(ErrorCode::invariant_violation, "sample exceeds 8-bit range");
  }
}

bool fits(const RoiBox& box, int width, int height) noexcept {
  return box.w >= 1 && box.h >= 1 && box.x_min >= 0 && box.y_min >= 0 &&
         box.x_max() <= width && box.y_max() <= height;
}

RoiBox compose(const RoiBox& outer, const RoiBox& inner) noexcept {
  return {outer.x_min + inner.x_min, outer.y_min + inner.y_min, inner.w,
          inner.h};
}

double iou(const RoiBox& a, const RoiBox& b) noexcept {
  const int ix = std::max(0, std::min(a.x_max(), b.x_max()) -
                                 std::max(a.x_min, b.x_min));
  const int iy = std::max(0, std::min(a.y_max(), b.y_max()) -
                                 std::max(a.y_min, b.y_min));
  const double inter = static_cast<double>(ix) * iy;
  const double uni = static_cast<double>(a.area() + b.area()) - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

namespace {

// Reads one whitespace-delimited header token, skipping '#' comments.
std::optional<std::string> next_token(std::span<const std::uint8_t> bytes,
                                      std::size_t& pos) {
  while (pos < bytes.size()) {
    if (bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(bytes[pos])) {
      ++pos;
    } else {
      break;
    }
  }
  std::string token;
  while (pos < bytes.size() && !std::isspace(bytes[pos]) && bytes[pos] != '#') {
    token.push_back(static_cast<char>(bytes[pos++]));
  }
  if (token.empty()) return std::nullopt;
  return token;
}

int parse_header_int(const std::optional<std::string>& token) {
  if (!token || token->size() > 9 ||
      !std::all_of(token->begin(), token->end(),
                   [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
    fail(ErrorCode::malformed_header, "malformed header");
  }
  return std::stoi(*token);
}

}  // namespace

Frame decode_pgm(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  const auto magic = next_token(bytes, pos);
  if (!magic || *magic != "P5") {
    fail(ErrorCode::malformed_header, "malformed header: expected P5 magic");
  }
  const int width = parse_header_int(next_token(bytes, pos));
  const int height = parse_header_int(next_token(bytes, pos));
  const int maxval = parse_header_int(next_token(bytes, pos));
  if (width <= 0 || height <= 0) {
    fail(ErrorCode::malformed_header, "malformed header: zero dimension");
  }
  if (maxval != 255 && maxval != 65535) {
    fail(ErrorCode::bad_maxval,
         "maxval " + std::to_string(maxval) + " not in {255, 65535}");
  }
  // Exactly one whitespace byte separates maxval from the raster.
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) {
    fail(ErrorCode::malformed_header, "malformed header: missing raster");
  }
  ++pos;

  const int depth = maxval == 255 ? 8 : 16;
  const std::size_t count = static_cast<std::size_t>(width) * height;
  const std::size_t need = count * (depth / 8);
  if (bytes.size() - pos < need) {
    fail(ErrorCode::short_payload, "pixel payload shorter than " +
                                       std::to_string(need) + " bytes");
  }
  std::vector<std::uint16_t> pixels(count);
  const std::uint8_t* raster = bytes.data() + pos;
  if (depth == 8) {
    std::copy(raster, raster + count, pixels.begin());
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      pixels[i] = static_cast<std::uint16_t>((raster[2 * i] << 8) | raster[2 * i + 1]);
    }
  }
  return Frame(width, height, depth, std::move(pixels));
}

std::vector<std::uint8_t> encode_pgm(const Frame& frame) {
  const std::string header = "P5\n" + std::to_string(frame.width()) + " " +
                             std::to_string(frame.height()) + "\n" +
                             std::to_string(frame.max_value()) + "\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(header.size() + frame_bytes(frame));
  for (const std::uint16_t v : frame.pixels()) {
    if (frame.bit_depth() == 16) out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  }
  return out;
}

Frame read_frame(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io_failure, "cannot open " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  return decode_pgm(bytes);
}

void write_frame(const Frame& frame, const fs::path& path) {
  const auto bytes = encode_pgm(frame);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::io_failure, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::io_failure, "short write to " + path.string());
}

Frame crop(const Frame& frame, const RoiBox& roi) {
  if (!fits(roi, frame.width(), frame.height())) {
    fail(ErrorCode::out_of_bounds,
         "roi (" + std::to_string(roi.x_min) + "," + std::to_string(roi.y_min) +
             "," + std::to_string(roi.w) + "," + std::to_string(roi.h) +
             ") outside " + std::to_string(frame.width()) + "x" +
             std::to_string(frame.height()) + " frame");
  }
  std::vector<std::uint16_t> out;
  out.reserve(static_cast<std::size_t>(roi.area()));
  for (int y = roi.y_min; y < roi.y_max(); ++y) {
    const auto r = frame.row(y).subspan(roi.x_min, roi.w);
    out.insert(out.end(), r.begin(), r.end());
  }
  return Frame(roi.w, roi.h, frame.bit_depth(), std::move(out));
}

std::size_t frame_bytes(int width, int height, int bit_depth) noexcept {
  return static_cast<std::size_t>(width) * height * (bit_depth / 8);
}

std::size_t frame_bytes(const Frame& frame) noexcept {
  return frame_bytes(frame.width(), frame.height(), frame.bit_depth());
}

VideoManifest read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io_failure, "cannot open manifest " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::invariant_violation,
         "manifest " + path.string() + " is not valid JSON: " + e.what());
  }
  VideoManifest m;
  m.base_dir = path.parent_path();
  try {
    m.fps = doc.at("fps").get<double>();
    m.bit_depth = doc.at("bit_depth").get<int>();
    for (const auto& f : doc.at("frames")) m.frame_paths.emplace_back(f.get<std::string>());
    if (doc.contains("ground_truth") && !doc["ground_truth"].is_null()) {
      m.ground_truth = doc["ground_truth"].get<std::string>();
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::invariant_violation,
         "manifest " + path.string() + " missing or mistyped key: " + e.what());
  }
  if (!(m.fps > 0.0)) fail(ErrorCode::invariant_violation, "manifest fps must be > 0");
  if (m.bit_depth != 8 && m.bit_depth != 16) {
    fail(ErrorCode::invariant_violation, "manifest bit_depth must be 8 or 16");
  }
  if (m.frame_paths.empty()) fail(ErrorCode::empty_input, "manifest lists no frames");
  return m;
}

void write_manifest(const VideoManifest& manifest, const fs::path& path) {
  nlohmann::json doc;
  doc["fps"] = manifest.fps;
  doc["bit_depth"] = manifest.bit_depth;
  doc["frames"] = nlohmann::json::array();
  for (const auto& p : manifest.frame_paths) doc["frames"].push_back(p.generic_string());
  if (manifest.ground_truth) doc["ground_truth"] = manifest.ground_truth->generic_string();
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::io_failure, "cannot write manifest " + path.string());
  out << doc.dump(2) << '\n';
}

}  // namespace thermoresp::io
