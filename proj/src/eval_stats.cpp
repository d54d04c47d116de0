#include "thermoresp/eval_stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "thermoresp/error.hpp"
#include "thermoresp/parallel.hpp"

namespace thermoresp::eval {

namespace {

constexpr double kLoaZ = 1.96;

std::string fmt(double v, const char* spec = "%.4f") {
  char buf[48];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (const double x : v) s += x;
  return s / static_cast<double>(v.size());
}

std::string cell_text(const SweepCell& cell, bool rmse) {
  const auto& value = rmse ? cell.rmse : cell.mae;
  if (!value) {
    for (const auto& r : cell.results) {
      if (!r.error_code.empty()) return r.error_code;
    }
    return "n/a";
  }
  std::string s = fmt(*value);
  if (cell.errors > 0) s += " (" + std::to_string(cell.errors) + " err)";
  return s;
}

}  // namespace

void PairedResults::validate() const {
  if (truth.empty()) fail(ErrorCode::empty_input, "no paired results");
  if (truth.size() != predicted.size() || (!ids.empty() && ids.size() != truth.size())) {
    fail(ErrorCode::invariant_violation, "paired result lists differ in length");
  }
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (!std::isfinite(truth[i]) || !std::isfinite(predicted[i])) {
      fail(ErrorCode::invariant_violation, "non-finite paired result");
    }
  }
}

double mae(const PairedResults& results) {
  results.validate();
  double s = 0.0;
  for (std::size_t i = 0; i < results.truth.size(); ++i) {
    s += std::abs(results.truth[i] - results.predicted[i]);
  }
  return s / static_cast<double>(results.truth.size());
}

double rmse(const PairedResults& results) {
  results.validate();
  double s = 0.0;
  for (std::size_t i = 0; i < results.truth.size(); ++i) {
    const double d = results.truth[i] - results.predicted[i];
    s += d * d;
  }
  return std::sqrt(s / static_cast<double>(results.truth.size()));
}

BlandAltman bland_altman(const PairedResults& results) {
  results.validate();
  const std::size_t n = results.truth.size();
  if (n < 2) fail(ErrorCode::empty_input, "bland-altman needs at least 2 pairs");
  std::vector<double> d(n);
  BlandAltman ba;
  ba.n = n;
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = results.predicted[i] - results.truth[i];
    ba.points.emplace_back((results.truth[i] + results.predicted[i]) / 2.0, d[i]);
  }
  ba.mean_diff = mean_of(d);
  double ss = 0.0;
  for (const double x : d) ss += (x - ba.mean_diff) * (x - ba.mean_diff);
  ba.sd_diff = std::sqrt(ss / static_cast<double>(n - 1));
  ba.loa_low = ba.mean_diff - kLoaZ * ba.sd_diff;
  ba.loa_high = ba.mean_diff + kLoaZ * ba.sd_diff;
  return ba;
}

std::string bland_altman_csv(const BlandAltman& ba, std::span<const std::string> ids) {
  std::ostringstream out;
  out << "id,mean,diff\n";
  for (std::size_t i = 0; i < ba.points.size(); ++i) {
    out << (i < ids.size() ? ids[i] : std::to_string(i)) << ','
        << fmt(ba.points[i].first, "%.10g") << ',' << fmt(ba.points[i].second, "%.10g") << '\n';
  }
  return out.str();
}

std::string bland_altman_gnuplot(const BlandAltman& ba, const std::string& data_file,
                                 const std::string& title) {
  std::ostringstream out;
  out << "set datafile separator ','\n"
      << "set title '" << title << "'\n"
      << "set xlabel 'Mean of true and predicted RR (bpm)'\n"
      << "set ylabel 'Predicted - true RR (bpm)'\n"
      << "set key outside\n"
      << "mean_diff = " << fmt(ba.mean_diff, "%.10g") << '\n'
      << "loa_low = " << fmt(ba.loa_low, "%.10g") << '\n'
      << "loa_high = " << fmt(ba.loa_high, "%.10g") << '\n'
      << "plot '" << data_file << "' every ::1 using 2:3 with points pt 7 title 'pairs', \\\n"
      << "     mean_diff with lines dt 1 title 'mean', \\\n"
      << "     loa_low with lines dt 2 title '-1.96 SD', \\\n"
      << "     loa_high with lines dt 2 title '+1.96 SD'\n";
  return out.str();
}

std::size_t SweepTable::total_errors() const noexcept {
  std::size_t n = 0;
  for (const auto& row : cells) {
    for (const auto& c : row) n += c.errors;
  }
  return n;
}

std::optional<std::size_t> SweepTable::min_mae_column(std::size_t row) const {
  std::optional<std::size_t> best;
  for (std::size_t c = 0; c < cells[row].size(); ++c) {
    const auto& m = cells[row][c].mae;
    if (m && (!best || *m < *cells[row][*best].mae)) best = c;
  }
  return best;
}

std::string SweepTable::csv() const {
  std::ostringstream out;
  out << "variant,metric";
  for (const auto& c : column_labels) out << ',' << c;
  out << '\n';
  for (std::size_t r = 0; r < row_labels.size(); ++r) {
    for (const bool use_rmse : {false, true}) {
      out << row_labels[r] << ',' << (use_rmse ? "RMSE" : "MAE");
      for (const auto& cell : cells[r]) {
        const auto& v = use_rmse ? cell.rmse : cell.mae;
        out << ',' << (v ? fmt(*v, "%.6f") : cell_text(cell, use_rmse));
      }
      out << '\n';
    }
  }
  return out.str();
}

std::string SweepTable::text() const {
  std::vector<std::vector<std::string>> grid;
  std::vector<std::string> header{"variant", "metric"};
  header.insert(header.end(), column_labels.begin(), column_labels.end());
  grid.push_back(header);
  for (std::size_t r = 0; r < row_labels.size(); ++r) {
    for (const bool use_rmse : {false, true}) {
      std::vector<std::string> line{row_labels[r], use_rmse ? "RMSE" : "MAE"};
      for (const auto& cell : cells[r]) line.push_back(cell_text(cell, use_rmse));
      grid.push_back(line);
    }
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& line : grid) {
    for (std::size_t i = 0; i < line.size(); ++i) width[i] = std::max(width[i], line[i].size());
  }
  std::ostringstream out;
  for (const auto& line : grid) {
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (i > 0) out << "  ";
      out << line[i];
      if (i + 1 < line.size()) out << std::string(width[i] - line[i].size(), ' ');
    }
    out << '\n';
  }
  return out.str();
}

std::string SweepTable::results_csv() const {
  std::vector<rr::ResultRow> rows;
  for (const auto& row : cells) {
    for (const auto& cell : row) rows.insert(rows.end(), cell.results.begin(), cell.results.end());
  }
  return rr::results_csv(rows);
}

SweepTable sweep(std::span<const SweepVariant> variants, std::span<const SweepColumn> columns,
                 const rr::RrOptions& options, unsigned jobs) {
  if (variants.empty() || columns.empty()) fail(ErrorCode::empty_input, "empty sweep grid");
  SweepTable table;
  for (const auto& v : variants) {
    if (v.videos.empty()) fail(ErrorCode::empty_input, "variant '" + v.label + "' has no videos");
    table.row_labels.push_back(v.label);
  }
  for (const auto& c : columns) table.column_labels.push_back(c.label);

  struct Task {
    std::size_t row, col, video;
  };
  std::vector<Task> tasks;
  table.cells.resize(variants.size());
  for (std::size_t r = 0; r < variants.size(); ++r) {
    table.cells[r].resize(columns.size());
    for (std::size_t c = 0; c < columns.size(); ++c) {
      table.cells[r][c].results.resize(variants[r].videos.size());
      for (std::size_t v = 0; v < variants[r].videos.size(); ++v) tasks.push_back({r, c, v});
    }
  }
  parallel_for(tasks.size(), jobs, [&](std::size_t i) {
    const Task& t = tasks[i];
    const auto& video = variants[t.row].videos[t.video];
    table.cells[t.row][t.col].results[t.video] =
        rr::evaluate(video.id, video.irs, columns[t.col].run, options);
  });

  for (std::size_t r = 0; r < variants.size(); ++r) {
    for (auto& cell : table.cells[r]) {
      PairedResults paired;
      for (std::size_t v = 0; v < cell.results.size(); ++v) {
        const auto& res = cell.results[v];
        if (res.estimate) {
          paired.truth.push_back(variants[r].videos[v].truth_bpm);
          paired.predicted.push_back(res.estimate->rr_bpm);
        } else {
          ++cell.errors;
        }
      }
      if (!paired.truth.empty()) {
        cell.mae = mae(paired);
        cell.rmse = rmse(paired);
      }
    }
  }
  return table;
}

std::vector<std::filesystem::path> find_manifests(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> found;
  std::error_code ec;
  if (std::filesystem::is_regular_file(dir, ec) && dir.filename() == "manifest.json") {
    found.push_back(dir);
  } else if (std::filesystem::is_directory(dir, ec)) {
    for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
      if (entry.is_regular_file() && entry.path().filename() == "manifest.json") {
        found.push_back(entry.path());
      }
    }
  }
  if (found.empty()) fail(ErrorCode::no_manifests, "no manifests found under " + dir.string());
  std::sort(found.begin(), found.end());
  return found;
}

io::RoiBox scale_roi(const io::RoiBox& roi, double scale, int width, int height) {
  const int w = std::clamp(static_cast<int>(std::lround(roi.w * scale)), 1, width);
  const int h = std::clamp(static_cast<int>(std::lround(roi.h * scale)), 1, height);
  const int x = std::clamp(roi.x_min - (w - roi.w) / 2, 0, width - w);
  const int y = std::clamp(roi.y_min - (h - roi.h) / 2, 0, height - h);
  return {x, y, w, h};
}

Signal track_and_extract(const io::FrameSource& source, const io::RoiBox& roi0,
                         const tracker::TrackerConfig& config) {
  const auto track = tracker::track_sequence(source, roi0, config);
  const auto boxes = tracker::rois(track);
  return respsig::extract_irs(source, boxes, tracker::dropped_flags(track));
}

}  // namespace thermoresp::eval
