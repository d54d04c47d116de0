#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "thermoresp/frame_source.hpp"
#include "thermoresp/respsig.hpp"
#include "thermoresp/rr_estimation.hpp"
#include "thermoresp/tracker.hpp"

namespace thermoresp::eval {

struct PairedResults {
  std::vector<double> truth;
  std::vector<double> predicted;
  std::vector<std::string> ids;  // optional; empty or one per pair

  /// Throws empty_input or invariant_violation.
  void validate() const;
};

double mae(const PairedResults& results);
double rmse(const PairedResults& results);

struct BlandAltman {
  double mean_diff = 0.0;
  double sd_diff = 0.0;  // sample (n - 1) standard deviation
  double loa_low = 0.0;
  double loa_high = 0.0;
  std::size_t n = 0;
  /// ((truth + predicted) / 2, predicted - truth) per pair.
  std::vector<std::pair<double, double>> points;
};

/// Throws empty_input when fewer than two pairs are given.
BlandAltman bland_altman(const PairedResults& results);

/// CSV "id,mean,diff" with one row per pair.
std::string bland_altman_csv(const BlandAltman& ba, std::span<const std::string> ids = {});
/// gnuplot script plotting `data_file` (the CSV above) with mean and LoA lines.
std::string bland_altman_gnuplot(const BlandAltman& ba, const std::string& data_file,
                                 const std::string& title);

/// One video ready for evaluation: its respiration signal and true rate.
struct PreparedVideo {
  std::string id;
  Signal irs;
  double truth_bpm = 0.0;
};

/// A table row: one ROI (or other) variant of the whole corpus.
struct SweepVariant {
  std::string label;
  std::vector<PreparedVideo> videos;
};

/// A table column: one method and parameter value.
struct SweepColumn {
  std::string label;
  rr::MethodRun run;
};

struct SweepCell {
  std::vector<rr::ResultRow> results;  // one per video, corpus order
  std::optional<double> mae;           // over successful videos
  std::optional<double> rmse;
  std::size_t errors = 0;
};

struct SweepTable {
  std::vector<std::string> row_labels;
  std::vector<std::string> column_labels;
  std::vector<std::vector<SweepCell>> cells;  // [row][column]

  const SweepCell& at(std::size_t row, std::size_t col) const { return cells[row][col]; }
  std::size_t total_errors() const noexcept;
  /// Column with the smallest MAE in `row`; nullopt if every cell failed.
  std::optional<std::size_t> min_mae_column(std::size_t row) const;

  /// "variant,metric,<columns...>" with MAE and RMSE rows per variant.
  std::string csv() const;
  /// Same table, aligned for reading.
  std::string text() const;
  /// Every per-video row in the rr results CSV format.
  std::string results_csv() const;
};

/// Evaluates every (variant, column, video) combination. Per-video failures
/// are recorded in the cell and never abort the sweep. Output is identical
/// for any `jobs`.
SweepTable sweep(std::span<const SweepVariant> variants, std::span<const SweepColumn> columns,
                 const rr::RrOptions& options, unsigned jobs = 1);

/// manifest.json files under `dir` (recursively), sorted by path. Throws
/// no_manifests when there are none.
std::vector<std::filesystem::path> find_manifests(const std::filesystem::path& dir);

/// roi scaled about its centre by `scale`, shifted to lie inside the frame.
io::RoiBox scale_roi(const io::RoiBox& roi, double scale, int width, int height);

/// Track from roi0 and extract the IRS (dropped frames interpolated).
Signal track_and_extract(const io::FrameSource& source, const io::RoiBox& roi0,
                         const tracker::TrackerConfig& config);

}  // namespace thermoresp::eval
