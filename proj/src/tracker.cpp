#include "thermoresp/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "thermoresp/error.hpp"

namespace thermoresp::tracker {

namespace {

constexpr int kMinRoiSide = 8;
constexpr double kDefaultNccFloor = 0.3;
constexpr double kFeatureFloorPercentile = 0.10;

int clamp_origin(int origin, int size, int limit) noexcept {
  return std::clamp(origin, 0, std::max(0, limit - size));
}

io::RoiBox intersect(const io::RoiBox& box, int width, int height) noexcept {
  const int x0 = std::max(box.x_min, 0);
  const int y0 = std::max(box.y_min, 0);
  const int x1 = std::min(box.x_max(), width);
  const int y1 = std::min(box.y_max(), height);
  return {x0, y0, std::max(0, x1 - x0), std::max(0, y1 - y0)};
}

ScoreMap finish_map(int width, int height, std::vector<double> scores) {
  ScoreMap map{width, height, std::move(scores), 0, 0, 0.0};
  map.argmax_value = map.scores.front();
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const double v = map.at(r, c);
      if (v > map.argmax_value) {
        map.argmax_value = v;
        map.argmax_row = r;
        map.argmax_col = c;
      }
    }
  }
  return map;
}

ScoreMap ncc_map(const ExemplarState& state, const io::Frame& win) {
  const int tw = state.last_roi.w;
  const int th = state.last_roi.h;
  const int mw = win.width() - tw + 1;
  const int mh = win.height() - th + 1;
  const double n = static_cast<double>(tw) * th;

  const auto& t = state.template_values;
  double t_mean = 0.0;
  for (const double v : t) t_mean += v;
  t_mean /= n;
  std::vector<double> tz(t.size());
  double t_ss = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    tz[i] = t[i] - t_mean;
    t_ss += tz[i] * tz[i];
  }
  if (!(t_ss > 1e-12 * std::max(1.0, t_mean * t_mean * n))) {
    fail(ErrorCode::zero_variance, "template has zero variance; ncc undefined");
  }
  const double t_norm = std::sqrt(t_ss);

  // Integral images of I and I^2. Pixels are integers below 2^16 so every
  // prefix sum is exact in double precision.
  const int W = win.width();
  const int H = win.height();
  std::vector<double> s1(static_cast<std::size_t>(W + 1) * (H + 1), 0.0);
  std::vector<double> s2(s1.size(), 0.0);
  auto idx = [W](int x, int y) { return static_cast<std::size_t>(y) * (W + 1) + x; };
  for (int y = 0; y < H; ++y) {
    double row1 = 0.0;
    double row2 = 0.0;
    for (int x = 0; x < W; ++x) {
      const double v = win.at(x, y);
      row1 += v;
      row2 += v * v;
      s1[idx(x + 1, y + 1)] = s1[idx(x + 1, y)] + row1;
      s2[idx(x + 1, y + 1)] = s2[idx(x + 1, y)] + row2;
    }
  }

  std::vector<double> scores(static_cast<std::size_t>(mw) * mh, 0.0);
  for (int v = 0; v < mh; ++v) {
    for (int u = 0; u < mw; ++u) {
      const double sum = s1[idx(u + tw, v + th)] - s1[idx(u, v + th)] -
                         s1[idx(u + tw, v)] + s1[idx(u, v)];
      const double sq = s2[idx(u + tw, v + th)] - s2[idx(u, v + th)] -
                        s2[idx(u + tw, v)] + s2[idx(u, v)];
      const double var = sq - sum * sum / n;
      if (!(var > 1e-9 * std::max(1.0, sq))) continue;  // flat patch scores 0
      double num = 0.0;
      for (int j = 0; j < th; ++j) {
        const auto row = win.row(v + j);
        const double* tr = &tz[static_cast<std::size_t>(j) * tw];
        for (int i = 0; i < tw; ++i) num += tr[i] * row[u + i];
      }
      scores[static_cast<std::size_t>(v) * mw + u] =
          std::clamp(num / (t_norm * std::sqrt(var)), -1.0, 1.0);
    }
  }
  return finish_map(mw, mh, std::move(scores));
}

ScoreMap feature_map(const ExemplarState& state, const io::Frame& win) {
  const int side = state.config.search_side;
  const Tensor search = state.net->embed(prepare_crop(win, side, side));
  const Tensor corr = cross_correlate(state.exemplar_features, search);
  return finish_map(corr.w, corr.h, std::vector<double>(corr.data.begin(), corr.data.end()));
}

double percentile(std::vector<double> values, double p) {
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

void update_template(ExemplarState& state, const io::Frame& patch) {
  const double r = state.config.template_update_rate;
  if (r <= 0.0) return;
  const auto px = patch.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) {
    state.template_values[i] = (1.0 - r) * state.template_values[i] + r * px[i];
  }
  if (state.config.mode == TrackerMode::featurenet) {
    const int side = state.config.exemplar_side;
    const Tensor fresh = state.net->embed(prepare_crop(patch, side, side));
    for (std::size_t i = 0; i < fresh.data.size(); ++i) {
      state.exemplar_features.data[i] = static_cast<float>(
          (1.0 - r) * state.exemplar_features.data[i] + r * fresh.data[i]);
    }
  }
}

}  // namespace

std::string_view to_string(TrackerMode mode) noexcept {
  return mode == TrackerMode::featurenet ? "featurenet" : "pixel-ncc";
}

TrackerMode tracker_mode_from_string(std::string_view text) {
  if (text == "pixel-ncc" || text == "ncc") return TrackerMode::pixel_ncc;
  if (text == "featurenet") return TrackerMode::featurenet;
  fail(ErrorCode::invalid_argument, "unknown tracker mode '" + std::string(text) + "'");
}

Tensor prepare_crop(const io::Frame& crop, int out_w, int out_h) {
  Tensor t{1, out_h, out_w, std::vector<float>(static_cast<std::size_t>(out_w) * out_h)};
  const double sx = static_cast<double>(crop.width()) / out_w;
  const double sy = static_cast<double>(crop.height()) / out_h;
  std::vector<double> values(t.data.size());
  double mean = 0.0;
  for (int y = 0; y < out_h; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, crop.height() - 1.0);
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, crop.height() - 1);
    const double wy = fy - y0;
    for (int x = 0; x < out_w; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, crop.width() - 1.0);
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, crop.width() - 1);
      const double wx = fx - x0;
      const double top = (1.0 - wx) * crop.at(x0, y0) + wx * crop.at(x1, y0);
      const double bottom = (1.0 - wx) * crop.at(x0, y1) + wx * crop.at(x1, y1);
      const double v = (1.0 - wy) * top + wy * bottom;
      values[static_cast<std::size_t>(y) * out_w + x] = v;
      mean += v;
    }
  }
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (const double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(values.size()));
  const double scale = sd > 1e-12 ? 1.0 / sd : 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    t.data[i] = static_cast<float>((values[i] - mean) * scale);
  }
  return t;
}

ExemplarState init_tracker(const io::Frame& first_frame, const io::RoiBox& roi0,
                           const TrackerConfig& config) {
  if (roi0.w < kMinRoiSide || roi0.h < kMinRoiSide) {
    fail(ErrorCode::roi_too_small, "roi " + std::to_string(roi0.w) + "x" +
                                       std::to_string(roi0.h) + " is below the 8x8 floor");
  }
  if (!io::fits(roi0, first_frame.width(), first_frame.height())) {
    fail(ErrorCode::out_of_bounds, "initial roi outside the first frame");
  }
  if (!(config.search_inflation >= 1.0)) {
    fail(ErrorCode::invalid_argument, "search inflation must be >= 1");
  }
  if (config.template_update_rate < 0.0 || config.template_update_rate > 1.0) {
    fail(ErrorCode::invalid_argument, "template update rate must lie in [0, 1]");
  }

  ExemplarState state;
  state.exemplar = io::crop(first_frame, roi0);
  state.last_roi = roi0;
  state.search_inflation = config.search_inflation;
  state.config = config;
  state.frame_width = first_frame.width();
  state.frame_height = first_frame.height();
  const auto px = state.exemplar.pixels();
  state.template_values.assign(px.begin(), px.end());

  if (config.mode == TrackerMode::featurenet) {
    auto net = std::make_shared<FeatureNet>(FeatureNetSpec::standard(config.seed));
    const auto ex_shape = feature_shapes(net->spec(), config.exemplar_side).back();
    const auto se_shape = feature_shapes(net->spec(), config.search_side).back();
    if (se_shape.h < ex_shape.h || se_shape.w < ex_shape.w) {
      fail(ErrorCode::search_window_too_small, "search input smaller than exemplar input");
    }
    state.exemplar_features =
        net->embed(prepare_crop(state.exemplar, config.exemplar_side, config.exemplar_side));
    state.net = std::move(net);
  }
  return state;
}

io::RoiBox search_window(const ExemplarState& state) {
  const io::RoiBox& roi = state.last_roi;
  if (state.config.mode == TrackerMode::pixel_ncc) {
    const int sw = static_cast<int>(std::lround(roi.w * state.search_inflation));
    const int sh = static_cast<int>(std::lround(roi.h * state.search_inflation));
    const io::RoiBox inflated{roi.x_min - (sw - roi.w) / 2, roi.y_min - (sh - roi.h) / 2, sw, sh};
    return intersect(inflated, state.frame_width, state.frame_height);
  }
  // Context box with the exemplar-to-search input ratio, shifted into frame.
  const double ratio = static_cast<double>(state.config.search_side) / state.config.exemplar_side;
  const int sw = std::min(state.frame_width, static_cast<int>(std::lround(roi.w * ratio)));
  const int sh = std::min(state.frame_height, static_cast<int>(std::lround(roi.h * ratio)));
  const int x0 = clamp_origin(roi.x_min - (sw - roi.w) / 2, sw, state.frame_width);
  const int y0 = clamp_origin(roi.y_min - (sh - roi.h) / 2, sh, state.frame_height);
  return {x0, y0, sw, sh};
}

ScoreMap score_map(const ExemplarState& state, const io::Frame& window_pixels,
                   const io::RoiBox& window) {
  if (window_pixels.width() != window.w || window_pixels.height() != window.h) {
    fail(ErrorCode::invariant_violation, "window pixels do not match the window box");
  }
  if (window.w < state.last_roi.w || window.h < state.last_roi.h) {
    fail(ErrorCode::search_window_too_small,
         "search window " + std::to_string(window.w) + "x" + std::to_string(window.h) +
             " smaller than template " + std::to_string(state.last_roi.w) + "x" +
             std::to_string(state.last_roi.h));
  }
  return state.config.mode == TrackerMode::pixel_ncc ? ncc_map(state, window_pixels)
                                                     : feature_map(state, window_pixels);
}

ScoreMap score_map(const ExemplarState& state, const io::Frame& frame) {
  if (frame.width() != state.frame_width || frame.height() != state.frame_height) {
    fail(ErrorCode::invariant_violation, "frame geometry differs from the first frame");
  }
  const io::RoiBox window = search_window(state);
  if (window.w < state.last_roi.w || window.h < state.last_roi.h) {
    fail(ErrorCode::search_window_too_small, "search window smaller than template");
  }
  return score_map(state, io::crop(frame, window), window);
}

io::RoiBox locate(const ExemplarState& state, const io::RoiBox& window, int row, int col) {
  const int w = state.last_roi.w;
  const int h = state.last_roi.h;
  if (state.config.mode == TrackerMode::pixel_ncc) {
    return {window.x_min + col, window.y_min + row, w, h};
  }
  const int stride = state.net->spec().total_stride();
  const double side = state.config.search_side;
  const int x = window.x_min + static_cast<int>(std::lround(stride * col * window.w / side));
  const int y = window.y_min + static_cast<int>(std::lround(stride * row * window.h / side));
  return {clamp_origin(x, w, state.frame_width), clamp_origin(y, h, state.frame_height), w, h};
}

Tracker::Tracker(const io::FrameSource& source, const io::RoiBox& roi0, TrackerConfig config)
    : source_(source) {
  if (source.size() == 0) fail(ErrorCode::empty_input, "no frames to track");
  const io::Frame first = source.frame(0);
  state_ = init_tracker(first, roi0, config);
  if (config.mode == TrackerMode::pixel_ncc) {
    floor_ = config.confidence_floor.value_or(kDefaultNccFloor);
    first_score_ = 1.0;
  } else {
    const ScoreMap calib = score_map(state_, first);
    floor_ = config.confidence_floor.value_or(percentile(calib.scores, kFeatureFloorPercentile));
    first_score_ = calib.argmax_value;
  }
}

TrackPoint Tracker::step(std::size_t index) {
  if (index != next_) fail(ErrorCode::invalid_argument, "tracker steps must be consecutive");
  ++next_;
  if (index == 0) return {state_.last_roi, first_score_, false};

  const io::RoiBox window = search_window(state_);
  if (window.w < state_.last_roi.w || window.h < state_.last_roi.h) {
    fail(ErrorCode::search_window_too_small, "search window smaller than template");
  }
  const ScoreMap map = score_map(state_, source_.region(index, window), window);
  if (map.argmax_value < floor_) return {state_.last_roi, map.argmax_value, true};

  state_.last_roi = locate(state_, window, map.argmax_row, map.argmax_col);
  if (state_.config.template_update_rate > 0.0) {
    update_template(state_, source_.region(index, state_.last_roi));
  }
  return {state_.last_roi, map.argmax_value, false};
}

std::vector<TrackPoint> track_sequence(const io::FrameSource& source, const io::RoiBox& roi0,
                                       const TrackerConfig& config) {
  Tracker tracker(source, roi0, config);
  std::vector<TrackPoint> track;
  track.reserve(source.size());
  for (std::size_t i = 0; i < source.size(); ++i) track.push_back(tracker.step(i));
  return track;
}

std::vector<TrackPoint> track_sequence(const io::VideoManifest& manifest,
                                       const io::RoiBox& roi0, const TrackerConfig& config) {
  const io::ManifestSource source(manifest);
  return track_sequence(source, roi0, config);
}

std::vector<io::RoiBox> rois(std::span<const TrackPoint> track) {
  std::vector<io::RoiBox> out;
  out.reserve(track.size());
  for (const auto& p : track) out.push_back(p.roi);
  return out;
}

std::vector<bool> dropped_flags(std::span<const TrackPoint> track) {
  std::vector<bool> out;
  out.reserve(track.size());
  for (const auto& p : track) out.push_back(p.dropped);
  return out;
}

std::string track_csv(std::span<const TrackPoint> track) {
  std::ostringstream out;
  out << "frame_index,x_min,y_min,w,h,score,dropped\n";
  char buf[64];
  for (std::size_t i = 0; i < track.size(); ++i) {
    const auto& p = track[i];
    std::snprintf(buf, sizeof buf, "%.17g", p.score);
    out << i << ',' << p.roi.x_min << ',' << p.roi.y_min << ',' << p.roi.w << ',' << p.roi.h
        << ',' << buf << ',' << (p.dropped ? 1 : 0) << '\n';
  }
  return out.str();
}

void write_track_csv(std::span<const TrackPoint> track, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::io_failure, "cannot write " + path.string());
  out << track_csv(track);
  if (!out) fail(ErrorCode::io_failure, "write failed for " + path.string());
}

std::vector<TrackPoint> read_track_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io_failure, "cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("frame_index,", 0) != 0) {
    fail(ErrorCode::malformed_header, path.string() + ": missing track header");
  }
  std::vector<TrackPoint> track;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    std::vector<std::string> f;
    while (std::getline(row, field, ',')) f.push_back(field);
    if (f.size() != 7) fail(ErrorCode::malformed_header, "track row needs 7 fields: " + line);
    if (std::stoul(f[0]) != track.size()) {
      fail(ErrorCode::invariant_violation, "track rows out of order");
    }
    TrackPoint p;
    p.roi = {std::stoi(f[1]), std::stoi(f[2]), std::stoi(f[3]), std::stoi(f[4])};
    p.score = std::stod(f[5]);
    p.dropped = f[6] == "1";
    track.push_back(p);
  }
  return track;
}

}  // namespace thermoresp::tracker
