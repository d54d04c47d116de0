#include "thermoresp/respsig.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "thermoresp/error.hpp"

namespace thermoresp {

std::string_view to_string(Stage stage) noexcept {
  switch (stage) {
    case Stage::irs: return "IRS";
    case Stage::rs_d: return "RS_D";
    case Stage::rs_n: return "RS_N";
    case Stage::rs_bf: return "RS_BF";
  }
  return "IRS";
}

Stage stage_from_string(std::string_view text) {
  if (text == "IRS") return Stage::irs;
  if (text == "RS_D") return Stage::rs_d;
  if (text == "RS_N") return Stage::rs_n;
  if (text == "RS_BF") return Stage::rs_bf;
  fail(ErrorCode::invalid_argument, "unknown signal stage '" + std::string(text) + "'");
}

Signal::Signal(std::vector<double> samples, double fs, Stage stage)
    : samples_(std::move(samples)), fs_(fs), stage_(stage) {
  if (!(fs_ > 0.0) || !std::isfinite(fs_)) {
    fail(ErrorCode::invariant_violation, "signal fs must be positive");
  }
  if (samples_.empty()) fail(ErrorCode::empty_input, "signal has no samples");
  for (const double v : samples_) {
    if (!std::isfinite(v)) fail(ErrorCode::invariant_violation, "non-finite signal sample");
  }
}

namespace respsig {

double pixel_average(const io::Frame& frame) noexcept {
  std::uint64_t sum = 0;
  for (const std::uint16_t v : frame.pixels()) sum += v;
  return static_cast<double>(sum) /
         (static_cast<double>(frame.width()) * frame.height());
}

GapFiller::GapFiller(std::size_t total) : values_(total, 0.0) {
  if (total == 0) fail(ErrorCode::empty_input, "gap filler needs at least one slot");
}

void GapFiller::push(std::size_t index, double value) {
  if (index >= values_.size()) fail(ErrorCode::out_of_bounds, "sample index past end");
  if (have_last_ && index <= last_index_) {
    fail(ErrorCode::invalid_argument, "samples must arrive in increasing index order");
  }
  if (!have_last_) {
    for (std::size_t k = 0; k < index; ++k) values_[k] = value;
  } else {
    const double a = values_[last_index_];
    const double span = static_cast<double>(index - last_index_);
    for (std::size_t k = last_index_ + 1; k < index; ++k) {
      values_[k] = a + (value - a) * (static_cast<double>(k - last_index_) / span);
    }
  }
  values_[index] = value;
  have_last_ = true;
  last_index_ = index;
  finalized_ = index + 1;
}

void GapFiller::finish() {
  if (!have_last_) fail(ErrorCode::all_frames_dropped, "every frame was dropped");
  for (std::size_t k = last_index_ + 1; k < values_.size(); ++k) {
    values_[k] = values_[last_index_];
  }
  finalized_ = values_.size();
}

Signal extract_irs(const io::FrameSource& source,
                   std::span<const io::RoiBox> track,
                   const std::vector<bool>& dropped) {
  const std::size_t m = source.size();
  if (track.size() != m || dropped.size() != m) {
    fail(ErrorCode::track_length_mismatch,
         "track length " + std::to_string(track.size()) + " != frame count " +
             std::to_string(m));
  }
  const auto geo = source.geometry();
  GapFiller filler(m);
  for (std::size_t t = 0; t < m; ++t) {
    if (dropped[t]) continue;
    if (!io::fits(track[t], geo.width, geo.height)) {
      fail(ErrorCode::out_of_bounds, "roi of frame " + std::to_string(t) + " out of bounds");
    }
    filler.push(t, pixel_average(source.region(t, track[t])));
  }
  filler.finish();
  const auto v = filler.values();
  return Signal(std::vector<double>(v.begin(), v.end()), source.fps(), Stage::irs);
}

Signal extract_irs(const io::VideoManifest& manifest,
                   std::span<const io::RoiBox> track,
                   const std::vector<bool>& dropped) {
  return extract_irs(io::ManifestSource(manifest), track, dropped);
}

std::string signal_csv(const Signal& signal) {
  std::ostringstream out;
  out << "index,value,fs,stage\n";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", signal.fs());
  const std::string fs_text = buf;
  const std::string stage_text(to_string(signal.stage()));
  for (std::size_t i = 0; i < signal.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", signal[i]);
    out << i << ',' << buf << ',' << fs_text << ',' << stage_text << '\n';
  }
  return out.str();
}

void write_signal_csv(const Signal& signal, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::io_failure, "cannot write " + path.string());
  out << signal_csv(signal);
  if (!out) fail(ErrorCode::io_failure, "write failed for " + path.string());
}

Signal read_signal_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io_failure, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "index,value,fs,stage") {
    fail(ErrorCode::malformed_header, "signal CSV header must be index,value,fs,stage");
  }
  std::vector<double> values;
  double fs = 0.0;
  Stage stage = Stage::irs;
  std::size_t expect = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string idx, val, fs_text, stage_text;
    if (!std::getline(row, idx, ',') || !std::getline(row, val, ',') ||
        !std::getline(row, fs_text, ',') || !std::getline(row, stage_text)) {
      fail(ErrorCode::malformed_header, "bad signal CSV row: " + line);
    }
    try {
      if (std::stoull(idx) != expect) {
        fail(ErrorCode::invalid_argument, "signal CSV indices must be 0,1,2,...");
      }
      values.push_back(std::stod(val));
      fs = std::stod(fs_text);
    } catch (const std::logic_error&) {
      fail(ErrorCode::malformed_header, "bad number in signal CSV row: " + line);
    }
    stage = stage_from_string(stage_text);
    ++expect;
  }
  return Signal(std::move(values), fs, stage);
}

}  // namespace respsig
}  // namespace thermoresp
