#include "thermoresp/tiered_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>

#include "thermoresp/channel.hpp"
#include "thermoresp/error.hpp"
#include "thermoresp/respsig.hpp"

namespace thermoresp::pipeline {

namespace {

std::size_t index_of(Boundary b) noexcept { return static_cast<std::size_t>(b); }
std::size_t index_of(MessageKind k) noexcept { return static_cast<std::size_t>(k); }

using Emit = std::function<void(StageMessage)>;

struct StageError {
  std::string code;
  std::string message;
  bool set() const noexcept { return !code.empty(); }
  void capture(const Error& e) {
    if (set()) return;
    code = std::string(to_string(e.code()));
    message = e.what();
  }
};

class RobotStage {
 public:
  RobotStage(const io::FrameSource& source, const io::RoiBox& roi0, const PipelineConfig& config)
      : source_(source), config_(config) {
    if (config.track) {
      if (config.track->size() != source.size()) {
        fail(ErrorCode::track_length_mismatch, "supplied track length differs from frame count");
      }
    } else {
      tracker_.emplace(source, roi0, config.tracker);
    }
  }

  void run(const Emit& emit, TrafficLedger& ledger, std::vector<tracker::TrackPoint>& track,
           WorkCounts& work, StageError& error) {
    try {
      const auto geom = source_.geometry();
      for (std::size_t i = 0; i < source_.size(); ++i) {
        const tracker::TrackPoint p = config_.track ? (*config_.track)[i] : tracker_->step(i);
        track.push_back(p);
        ++work.tracked_frames;
        if (p.dropped) {
          ledger.note_dropped(Boundary::robot_cloud);
          continue;
        }
        StageMessage msg;
        msg.header.origin = Tier::robot;
        msg.header.destination = Tier::cloud;
        msg.header.frame_index = i;
        switch (config_.mode) {
          case TransferMode::original:
            msg.header.kind = MessageKind::full_frame;
            msg.image = source_.frame(i);
            msg.roi = p.roi;
            break;
          case TransferMode::face: {
            const io::RoiBox box =
                face_box(p.roi, config_.face_width, config_.face_height, geom.width, geom.height);
            msg.header.kind = MessageKind::roi_patch;
            msg.image = source_.region(i, box);
            msg.roi = {p.roi.x_min - box.x_min, p.roi.y_min - box.y_min, p.roi.w, p.roi.h};
            break;
          }
          case TransferMode::nose:
            msg.header.kind = MessageKind::roi_patch;
            msg.image = source_.region(i, p.roi);
            msg.roi = {0, 0, p.roi.w, p.roi.h};
            break;
        }
        msg.header.payload_bytes = io::frame_bytes(msg.image) + config_.cost.per_message_overhead_bytes;
        emit(std::move(msg));
      }
    } catch (const Error& e) {
      error.capture(e);
    }
  }

 private:
  const io::FrameSource& source_;
  const PipelineConfig& config_;
  std::optional<tracker::Tracker> tracker_;
};

class CloudStage {
 public:
  CloudStage(std::size_t total, const PipelineConfig& config)
      : filler_(total), config_(config) {}

  void on_message(const StageMessage& msg, const Emit& emit, WorkCounts& work) {
    if (error_.set()) return;
    try {
      ++work.received_frames;
      filler_.push(msg.header.frame_index, respsig::pixel_average(io::crop(msg.image, msg.roi)));
      flush(emit, false);
    } catch (const Error& e) {
      error_.capture(e);
    }
  }

  void on_close(const Emit& emit) {
    if (error_.set()) return;
    try {
      filler_.finish();
      flush(emit, true);
    } catch (const Error& e) {
      error_.capture(e);
    }
  }

  StageError& error() noexcept { return error_; }

 private:
  void flush(const Emit& emit, bool all) {
    const std::size_t chunk = std::max<std::size_t>(1, config_.chunk_samples);
    while (sent_ < filler_.finalized() && (all || filler_.finalized() - sent_ >= chunk)) {
      const std::size_t end = std::min(sent_ + chunk, filler_.finalized());
      StageMessage msg;
      msg.header.kind = MessageKind::signal_chunk;
      msg.header.origin = Tier::cloud;
      msg.header.destination = Tier::terminal;
      msg.header.sample_begin = sent_;
      msg.header.sample_end = end;
      const auto values = filler_.values();
      msg.samples.assign(values.begin() + static_cast<std::ptrdiff_t>(sent_),
                         values.begin() + static_cast<std::ptrdiff_t>(end));
      msg.header.payload_bytes =
          msg.samples.size() * kSampleBytes + config_.cost.per_message_overhead_bytes;
      sent_ = end;
      emit(std::move(msg));
    }
  }

  respsig::GapFiller filler_;
  const PipelineConfig& config_;
  std::size_t sent_ = 0;
  StageError error_;
};

class TerminalStage {
 public:
  TerminalStage(std::size_t total, double fs, const PipelineConfig& config)
      : total_(total), fs_(fs), config_(config) {}

  void on_message(const StageMessage& msg, WorkCounts& work) {
    if (msg.header.sample_begin != samples_.size()) {
      error_.capture(Error(ErrorCode::invariant_violation, "signal chunk out of order"));
      return;
    }
    samples_.insert(samples_.end(), msg.samples.begin(), msg.samples.end());
    work.signal_samples += msg.samples.size();
  }

  void on_close(const Emit& emit, std::optional<rr::RrEstimate>& estimate) {
    if (samples_.empty()) return;  // upstream failed; nothing to report
    StageMessage msg;
    msg.header.kind = MessageKind::result;
    msg.header.origin = Tier::terminal;
    msg.header.destination = Tier::clinician;
    msg.header.sample_end = samples_.size();
    msg.header.payload_bytes = kResultBytes + config_.cost.per_message_overhead_bytes;
    try {
      if (samples_.size() != total_) {
        fail(ErrorCode::invariant_violation, "terminal received an incomplete signal");
      }
      const Signal irs(samples_, fs_, Stage::irs);
      estimate = rr::run_method(irs, config_.method, config_.options);
      msg.estimate = estimate;
    } catch (const Error& e) {
      error_.capture(e);
      msg.error_code = error_.code;
    }
    emit(std::move(msg));
  }

  StageError& error() noexcept { return error_; }
  const std::vector<double>& samples() const noexcept { return samples_; }

 private:
  std::size_t total_;
  double fs_;
  const PipelineConfig& config_;
  std::vector<double> samples_;
  StageError error_;
};

}  // namespace

std::string_view to_string(TransferMode mode) noexcept {
  switch (mode) {
    case TransferMode::original: return "original";
    case TransferMode::face: return "face";
    case TransferMode::nose: return "nose";
  }
  return "nose";
}

std::string_view to_string(MessageKind kind) noexcept {
  switch (kind) {
    case MessageKind::full_frame: return "full_frame";
    case MessageKind::roi_patch: return "roi_patch";
    case MessageKind::signal_chunk: return "signal_chunk";
    case MessageKind::result: return "result";
  }
  return "roi_patch";
}

std::string_view to_string(Tier tier) noexcept {
  switch (tier) {
    case Tier::robot: return "robot";
    case Tier::cloud: return "cloud";
    case Tier::terminal: return "terminal";
    case Tier::clinician: return "clinician";
  }
  return "robot";
}

std::string_view to_string(Boundary boundary) noexcept {
  switch (boundary) {
    case Boundary::robot_cloud: return "robot->cloud";
    case Boundary::cloud_terminal: return "cloud->terminal";
    case Boundary::terminal_clinician: return "terminal->clinician";
  }
  return "robot->cloud";
}

TransferMode transfer_mode_from_string(std::string_view text) {
  if (text == "original") return TransferMode::original;
  if (text == "face") return TransferMode::face;
  if (text == "nose") return TransferMode::nose;
  fail(ErrorCode::invalid_argument, "unknown transfer mode '" + std::string(text) + "'");
}

Boundary boundary_from(Tier origin) {
  switch (origin) {
    case Tier::robot: return Boundary::robot_cloud;
    case Tier::cloud: return Boundary::cloud_terminal;
    case Tier::terminal: return Boundary::terminal_clinician;
    case Tier::clinician: break;
  }
  fail(ErrorCode::invariant_violation, "the clinician tier sends no messages");
}

bool kind_allowed(Boundary boundary, MessageKind kind) noexcept {
  switch (boundary) {
    case Boundary::robot_cloud:
      return kind == MessageKind::full_frame || kind == MessageKind::roi_patch;
    case Boundary::cloud_terminal:
      return kind == MessageKind::signal_chunk;
    case Boundary::terminal_clinician:
      return kind == MessageKind::result;
  }
  return false;
}

void TrafficLedger::record(const MessageRecord& message) {
  const Boundary b = boundary_from(message.origin);
  if (message.payload_bytes == 0) fail(ErrorCode::invariant_violation, "empty message payload");
  if (!kind_allowed(b, message.kind)) {
    fail(ErrorCode::invariant_violation, std::string(to_string(message.kind)) +
                                             " may not cross " + std::string(to_string(b)));
  }
  auto& t = totals_[index_of(b)];
  t.bytes += message.payload_bytes;
  ++t.messages;
  t.per_kind[index_of(message.kind)].bytes += message.payload_bytes;
  ++t.per_kind[index_of(message.kind)].messages;
  logs_[index_of(b)].push_back(message);
}

void TrafficLedger::note_dropped(Boundary boundary) { ++totals_[index_of(boundary)].dropped_frames; }

const BoundaryTotals& TrafficLedger::totals(Boundary boundary) const noexcept {
  return totals_[index_of(boundary)];
}

const std::vector<MessageRecord>& TrafficLedger::log(Boundary boundary) const noexcept {
  return logs_[index_of(boundary)];
}

std::size_t TrafficLedger::total_bytes() const noexcept {
  std::size_t n = 0;
  for (const auto& t : totals_) n += t.bytes;
  return n;
}

std::size_t TrafficLedger::total_messages() const noexcept {
  std::size_t n = 0;
  for (const auto& t : totals_) n += t.messages;
  return n;
}

std::string TrafficLedger::csv() const {
  std::ostringstream out;
  out << "boundary,kind,messages,bytes,dropped_frames\n";
  for (const Boundary b : kBoundaries) {
    const auto& t = totals(b);
    for (std::size_t k = 0; k < t.per_kind.size(); ++k) {
      if (t.per_kind[k].messages == 0) continue;
      out << to_string(b) << ',' << to_string(static_cast<MessageKind>(k)) << ','
          << t.per_kind[k].messages << ',' << t.per_kind[k].bytes << ",\n";
    }
    out << to_string(b) << ",total," << t.messages << ',' << t.bytes << ',' << t.dropped_frames
        << '\n';
  }
  return out.str();
}

std::string TrafficLedger::summary() const {
  std::ostringstream out;
  for (const Boundary b : kBoundaries) {
    const auto& t = totals(b);
    char line[160];
    std::snprintf(line, sizeof line, "%-20s %8zu msgs %12zu bytes %6zu dropped\n",
                  std::string(to_string(b)).c_str(), t.messages, t.bytes, t.dropped_frames);
    out << line;
  }
  return out.str();
}

void CostModel::validate() const {
  if (!(bandwidth > 0.0 && per_message_latency > 0.0 && tracker_rate > 0.0 &&
        extract_rate > 0.0 && dsp_rate > 0.0)) {
    fail(ErrorCode::flag_range, "cost model rates must all be positive");
  }
}

CostModel CostModel::calibrated() {
  CostModel model;
  constexpr std::size_t frames = 1500;
  constexpr std::size_t chunk = 25;
  const std::size_t overhead = model.per_message_overhead_bytes;
  const std::size_t chunks = (frames + chunk - 1) / chunk;
  const std::size_t bytes = frames * (io::frame_bytes(64, 48, 8) + overhead) +
                            frames * kSampleBytes + chunks * overhead + kResultBytes + overhead;
  const std::size_t messages = frames + chunks + 1;
  model.bandwidth = static_cast<double>(bytes) /
                    (kReferenceCommSeconds - static_cast<double>(messages) * model.per_message_latency);
  model.dsp_rate = (kReferenceCompSeconds -
                    static_cast<double>(frames) * (model.tracker_rate + model.extract_rate)) /
                   static_cast<double>(frames);
  return model;
}

CostReport cost_report(const TrafficLedger& ledger, const WorkCounts& work,
                       const CostModel& cost) {
  cost.validate();
  CostReport r;
  for (const Boundary b : kBoundaries) {
    const auto& t = ledger.totals(b);
    const double s = static_cast<double>(t.bytes) / cost.bandwidth +
                     static_cast<double>(t.messages) * cost.per_message_latency;
    r.comm_by_boundary[index_of(b)] = s;
    r.comm_seconds += s;
  }
  r.comp_seconds = cost.tracker_rate * static_cast<double>(work.tracked_frames) +
                   cost.extract_rate * static_cast<double>(work.received_frames) +
                   cost.dsp_rate * static_cast<double>(work.signal_samples);
  return r;
}

io::RoiBox face_box(const io::RoiBox& nose, int face_width, int face_height, int frame_width,
                    int frame_height) noexcept {
  const int w = std::clamp(face_width, 1, frame_width);
  const int h = std::clamp(face_height, 1, frame_height);
  const int cx = nose.x_min + nose.w / 2;
  const int cy = nose.y_min + nose.h / 2;
  return {std::clamp(cx - w / 2, 0, frame_width - w), std::clamp(cy - h / 2, 0, frame_height - h),
          w, h};
}

PipelineResult run_pipeline(const io::FrameSource& source, const io::RoiBox& roi0,
                            const PipelineConfig& config, Execution execution) {
  PipelineResult result;
  std::optional<RobotStage> robot;
  try {
    config.cost.validate();
    if (source.size() == 0) fail(ErrorCode::empty_input, "no frames");
    robot.emplace(source, roi0, config);
  } catch (const Error& e) {
    result.error_code = std::string(to_string(e.code()));
    result.error_message = e.what();
    return result;
  }
  CloudStage cloud(source.size(), config);
  TerminalStage terminal(source.size(), source.fps(), config);
  StageError robot_error;

  auto send = [&](StageMessage& msg) {
    if (config.tap) config.tap(execution, msg);
    result.ledger.record(msg.header);
  };
  const Emit to_clinician = [&](StageMessage msg) { send(msg); };

  if (execution == Execution::sequential) {
    const Emit to_terminal = [&](StageMessage msg) {
      send(msg);
      terminal.on_message(msg, result.work);
    };
    const Emit to_cloud = [&](StageMessage msg) {
      send(msg);
      cloud.on_message(msg, to_terminal, result.work);
    };
    robot->run(to_cloud, result.ledger, result.track, result.work, robot_error);
    cloud.on_close(to_terminal);
    terminal.on_close(to_clinician, result.estimate);
  } else {
    BoundedChannel<StageMessage> robot_cloud(config.channel_capacity);
    BoundedChannel<StageMessage> cloud_terminal(config.channel_capacity);
    // Each thread writes only its own counters and its own boundary's log.
    WorkCounts cloud_work;
    WorkCounts terminal_work;
    std::thread cloud_thread([&] {
      const Emit to_terminal = [&](StageMessage msg) {
        send(msg);
        cloud_terminal.push(std::move(msg));
      };
      while (auto msg = robot_cloud.pop()) cloud.on_message(*msg, to_terminal, cloud_work);
      cloud.on_close(to_terminal);
      cloud_terminal.close();
    });
    std::thread terminal_thread([&] {
      while (auto msg = cloud_terminal.pop()) terminal.on_message(*msg, terminal_work);
      terminal.on_close(to_clinician, result.estimate);
    });
    const Emit to_cloud = [&](StageMessage msg) {
      send(msg);
      robot_cloud.push(std::move(msg));
    };
    WorkCounts robot_work;
    robot->run(to_cloud, result.ledger, result.track, robot_work, robot_error);
    robot_cloud.close();
    cloud_thread.join();
    terminal_thread.join();
    result.work = {robot_work.tracked_frames, cloud_work.received_frames,
                   terminal_work.signal_samples};
  }

  for (const StageError* e : {&robot_error, &cloud.error(), &terminal.error()}) {
    if (e->set()) {
      result.error_code = e->code;
      result.error_message = e->message;
      result.estimate.reset();
      break;
    }
  }
  result.irs = terminal.samples();
  result.cost = cost_report(result.ledger, result.work, config.cost);
  return result;
}

EquivalenceReport concurrency_harness(const io::FrameSource& source, const io::RoiBox& roi0,
                                      const PipelineConfig& config) {
  EquivalenceReport report;
  report.sequential = run_pipeline(source, roi0, config, Execution::sequential);
  report.concurrent = run_pipeline(source, roi0, config, Execution::concurrent);
  const auto& a = report.sequential;
  const auto& b = report.concurrent;

  for (const Boundary boundary : kBoundaries) {
    const auto& la = a.ledger.log(boundary);
    const auto& lb = b.ledger.log(boundary);
    const std::size_t n = std::min(la.size(), lb.size());
    std::optional<std::size_t> diff;
    for (std::size_t i = 0; i < n && !diff; ++i) {
      if (!(la[i] == lb[i])) diff = i;
    }
    if (!diff && la.size() != lb.size()) diff = n;
    if (diff) {
      report.boundary = boundary;
      report.message_index = *diff;
      const auto& rec = *diff < la.size() ? la[*diff] : lb[*diff];
      if (boundary == Boundary::robot_cloud) report.frame_index = rec.frame_index;
      std::ostringstream d;
      d << "divergent on " << to_string(boundary) << " at message " << *diff;
      if (report.frame_index) d << " (frame " << *report.frame_index << ")";
      if (*diff < la.size() && *diff < lb.size()) {
        d << ": sequential " << to_string(la[*diff].kind) << " " << la[*diff].payload_bytes
          << " B vs concurrent " << to_string(lb[*diff].kind) << " " << lb[*diff].payload_bytes
          << " B";
      } else {
        d << ": message count " << la.size() << " vs " << lb.size();
      }
      report.description = d.str();
      return report;
    }
  }
  if (!(a.ledger == b.ledger)) {
    report.description = "divergent ledger totals";
    return report;
  }
  if (a.estimate != b.estimate || a.error_code != b.error_code || a.irs != b.irs) {
    report.description = "divergent estimate";
    return report;
  }
  if (!(a.track == b.track) || !(a.work == b.work) || !(a.cost == b.cost)) {
    report.description = "divergent track or cost";
    return report;
  }
  report.equivalent = true;
  report.description = "equivalent";
  return report;
}

}  // namespace thermoresp::pipeline
