#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "thermoresp/frame_source.hpp"
#include "thermoresp/imaging_io.hpp"
#include "thermoresp/rr_estimation.hpp"
#include "thermoresp/tracker.hpp"

// Robot -> cloud -> terminal dataflow. The robot tracks the face and ships
// image data, the cloud turns it into the respiration signal, the terminal
// conditions the signal and estimates RR, and the result goes on to the
// clinician. Every boundary crossing is recorded in a traffic ledger.

namespace thermoresp::pipeline {

enum class TransferMode { original, face, nose };
enum class MessageKind { full_frame, roi_patch, signal_chunk, result };
enum class Tier { robot, cloud, terminal, clinician };
enum class Boundary { robot_cloud, cloud_terminal, terminal_clinician };

inline constexpr std::array<Boundary, 3> kBoundaries{
    Boundary::robot_cloud, Boundary::cloud_terminal, Boundary::terminal_clinician};

std::string_view to_string(TransferMode mode) noexcept;
std::string_view to_string(MessageKind kind) noexcept;
std::string_view to_string(Tier tier) noexcept;
std::string_view to_string(Boundary boundary) noexcept;
TransferMode transfer_mode_from_string(std::string_view text);

/// Boundary crossed by a message from `origin`.
Boundary boundary_from(Tier origin);
bool kind_allowed(Boundary boundary, MessageKind kind) noexcept;

/// Serialized size of a result message body.
inline constexpr std::size_t kResultBytes = 80;
inline constexpr std::size_t kSampleBytes = sizeof(double);

/// What the ledger sees of a message.
struct MessageRecord {
  MessageKind kind = MessageKind::roi_patch;
  std::size_t payload_bytes = 0;
  Tier origin = Tier::robot;
  Tier destination = Tier::cloud;
  std::size_t frame_index = 0;  // image messages
  std::size_t sample_begin = 0;  // signal chunks: [begin, end)
  std::size_t sample_end = 0;

  bool operator==(const MessageRecord&) const = default;
};

struct StageMessage {
  MessageRecord header;
  io::Frame image;      // full_frame / roi_patch
  io::RoiBox roi;       // nose ROI relative to `image`
  std::vector<double> samples;  // signal_chunk
  std::optional<rr::RrEstimate> estimate;  // result
  std::string error_code;                  // result of a failed estimate
};

struct KindTotals {
  std::size_t bytes = 0;
  std::size_t messages = 0;
  bool operator==(const KindTotals&) const = default;
};

struct BoundaryTotals {
  std::size_t bytes = 0;
  std::size_t messages = 0;
  std::size_t dropped_frames = 0;
  std::array<KindTotals, 4> per_kind{};  // indexed by MessageKind
  bool operator==(const BoundaryTotals&) const = default;
};

class TrafficLedger {
 public:
  /// Throws invariant_violation for an empty payload or a kind the boundary
  /// does not carry.
  void record(const MessageRecord& message);
  void note_dropped(Boundary boundary);

  const BoundaryTotals& totals(Boundary boundary) const noexcept;
  const std::vector<MessageRecord>& log(Boundary boundary) const noexcept;
  std::size_t total_bytes() const noexcept;
  std::size_t total_messages() const noexcept;

  /// "boundary,kind,messages,bytes,dropped_frames"; one row per boundary
  /// and kind with traffic, plus a total row per boundary.
  std::string csv() const;
  std::string summary() const;

  bool operator==(const TrafficLedger&) const = default;

 private:
  std::array<BoundaryTotals, 3> totals_{};
  std::array<std::vector<MessageRecord>, 3> logs_{};
};

struct CostModel {
  double bandwidth = 0.0;  // bytes per second, every boundary
  std::size_t per_message_overhead_bytes = 64;
  double per_message_latency = 0.010;  // seconds
  double tracker_rate = 0.0150;  // seconds per tracked frame
  double extract_rate = 0.0010;  // seconds per received frame
  double dsp_rate = 0.0;         // seconds per signal sample

  void validate() const;

  /// Bandwidth and dsp rate back-solved so that the reference run (60 s at
  /// 25 fps, nose mode, 64x48 8-bit patches, no drops, default overhead,
  /// latency and chunking) costs 23.50 s of communication and 25.30 s of
  /// computation.
  static CostModel calibrated();
};

inline constexpr double kReferenceCommSeconds = 23.50;
inline constexpr double kReferenceCompSeconds = 25.30;

struct CostReport {
  double comm_seconds = 0.0;
  double comp_seconds = 0.0;
  std::array<double, 3> comm_by_boundary{};
  double total() const noexcept { return comm_seconds + comp_seconds; }
  bool operator==(const CostReport&) const = default;
};

struct WorkCounts {
  std::size_t tracked_frames = 0;
  std::size_t received_frames = 0;
  std::size_t signal_samples = 0;
  bool operator==(const WorkCounts&) const = default;
};

CostReport cost_report(const TrafficLedger& ledger, const WorkCounts& work,
                       const CostModel& cost);

enum class Execution { sequential, concurrent };

/// Called by the sending stage for every message before it is ledgered.
using MessageTap = std::function<void(Execution, StageMessage&)>;

struct PipelineConfig {
  TransferMode mode = TransferMode::nose;
  tracker::TrackerConfig tracker;
  /// Use this track instead of running the tracker (one point per frame).
  std::optional<std::vector<tracker::TrackPoint>> track;
  rr::MethodRun method;
  rr::RrOptions options;
  int face_width = 320;
  int face_height = 240;
  std::size_t chunk_samples = 25;
  std::size_t channel_capacity = 8;
  CostModel cost = CostModel::calibrated();
  MessageTap tap;
};

struct PipelineResult {
  std::optional<rr::RrEstimate> estimate;
  std::string error_code;  // empty on success
  std::string error_message;
  TrafficLedger ledger;
  WorkCounts work;
  CostReport cost;
  std::vector<tracker::TrackPoint> track;
  std::vector<double> irs;  // signal as assembled at the terminal
};

/// Face box: face_width x face_height centred on the nose ROI, clamped to the
/// frame and shifted to lie inside it.
io::RoiBox face_box(const io::RoiBox& nose, int face_width, int face_height, int frame_width,
                    int frame_height) noexcept;

/// Errors inside a stage are reported in the result; the ledger covers
/// everything sent up to that point.
PipelineResult run_pipeline(const io::FrameSource& source, const io::RoiBox& roi0,
                            const PipelineConfig& config,
                            Execution execution = Execution::sequential);

struct EquivalenceReport {
  bool equivalent = false;
  std::string description;  // "equivalent" or the first difference
  std::optional<Boundary> boundary;
  std::optional<std::size_t> message_index;
  std::optional<std::size_t> frame_index;
  PipelineResult sequential;
  PipelineResult concurrent;
};

/// Runs the pipeline sequentially and with one thread per stage, then
/// compares results, ledgers and per-boundary message logs.
EquivalenceReport concurrency_harness(const io::FrameSource& source, const io::RoiBox& roi0,
                                      const PipelineConfig& config);

}  // namespace thermoresp::pipeline
