// thermoresp: command-line driver for synthetic generation, tracking,
// signal extraction, RR estimation, the tiered pipeline and evaluation.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "thermoresp/dsp.hpp"
#include "thermoresp/error.hpp"
#include "thermoresp/eval_stats.hpp"
#include "thermoresp/imaging_io.hpp"
#include "thermoresp/parallel.hpp"
#include "thermoresp/respsig.hpp"
#include "thermoresp/rr_estimation.hpp"
#include "thermoresp/synthgen.hpp"
#include "thermoresp/tiered_pipeline.hpp"
#include "thermoresp/tracker.hpp"

namespace fs = std::filesystem;
using namespace thermoresp;

namespace {

struct SignalFlags {
  double band_low = 0.15;
  double band_high = 0.40;
  std::string filter = "butterworth";
  int order = 4;
  double segment_seconds = dsp::kDefaultSegmentSeconds;
  std::optional<std::size_t> min_sep;
  bool interior_intervals = false;
};

struct MethodFlags {
  std::string method = "nrrm";
  double xi = rr::kDefaultXi;
  int width = 131;
};

struct TrackFlags {
  std::string roi;
  std::string tracker = "pixel-ncc";
  std::uint64_t seed = 0;
  bool gt_track = false;
  std::optional<double> floor;
};

struct CostFlags {
  std::optional<double> bandwidth;
  std::size_t overhead = 64;
  double latency = 0.010;
  std::optional<double> rate_tracker;
  std::optional<double> rate_extract;
  std::optional<double> rate_dsp;
};

void add_signal_flags(CLI::App* app, SignalFlags& f) {
  app->add_option("--band-low", f.band_low, "Band lower edge (Hz)");
  app->add_option("--band-high", f.band_high, "Band upper edge (Hz)");
  app->add_option("--filter", f.filter, "butterworth | fft-mask");
  app->add_option("--order", f.order, "Butterworth prototype order");
  app->add_option("--segment-seconds", f.segment_seconds, "Detrend segment length (s)");
  app->add_option("--min-sep", f.min_sep, "Minimum peak separation (samples)");
  app->add_flag("--interior-intervals", f.interior_intervals,
                "Count PN-1 intervals in the edge term instead of PN");
}

void add_method_flags(CLI::App* app, MethodFlags& f) {
  app->add_option("--method", f.method, "nrrm | nrrm-eep | fdam | gw");
  app->add_option("--xi", f.xi, "Relative peak threshold, 0 <= xi < 1");
  app->add_option("--width", f.width, "Gaussian window width in samples (gw)");
}

void add_track_flags(CLI::App* app, TrackFlags& f) {
  app->add_option("--roi", f.roi, "Initial ROI x,y,w,h (default: ground-truth frame 0)");
  app->add_option("--tracker", f.tracker, "pixel-ncc | featurenet");
  app->add_option("--seed", f.seed, "Feature network weight seed");
  app->add_flag("--gt-track", f.gt_track, "Use the ground-truth track instead of tracking");
  app->add_option("--floor", f.floor, "Tracker confidence floor");
}

void add_cost_flags(CLI::App* app, CostFlags& f) {
  app->add_option("--bandwidth", f.bandwidth, "Bytes per second on every boundary");
  app->add_option("--msg-overhead", f.overhead, "Header bytes per message");
  app->add_option("--msg-latency", f.latency, "Seconds per message");
  app->add_option("--comp-rate-tracker", f.rate_tracker, "Seconds per tracked frame");
  app->add_option("--comp-rate-extract", f.rate_extract, "Seconds per received frame");
  app->add_option("--comp-rate-dsp", f.rate_dsp, "Seconds per signal sample");
}

rr::RrOptions make_options(const SignalFlags& f) {
  rr::RrOptions o;
  o.filter.band_low = f.band_low;
  o.filter.band_high = f.band_high;
  o.filter.method = dsp::filter_method_from_string(f.filter);
  o.filter.butterworth_order = f.order;
  o.segment_seconds = f.segment_seconds;
  o.min_separation = f.min_sep;
  o.edge = f.interior_intervals ? rr::EdgeRule::interior_intervals : rr::EdgeRule::verbatim;
  return o;
}

void check_xi(double xi) {
  if (!(xi >= 0.0 && xi < 1.0)) fail(ErrorCode::flag_range, "--xi must lie in [0, 1)");
}

rr::MethodRun make_run(const MethodFlags& f) {
  rr::MethodRun run;
  run.method = rr::method_from_string(f.method);
  if (run.method == rr::Method::nrrm) {
    check_xi(f.xi);
    run.parameter = f.xi;
  } else if (run.method == rr::Method::gw) {
    if (f.width < 3) fail(ErrorCode::flag_range, "--width must be >= 3");
    run.parameter = f.width;
  }
  return run;
}

pipeline::CostModel make_cost(const CostFlags& f) {
  pipeline::CostModel c = pipeline::CostModel::calibrated();
  if (f.bandwidth) c.bandwidth = *f.bandwidth;
  c.per_message_overhead_bytes = f.overhead;
  c.per_message_latency = f.latency;
  if (f.rate_tracker) c.tracker_rate = *f.rate_tracker;
  if (f.rate_extract) c.extract_rate = *f.rate_extract;
  if (f.rate_dsp) c.dsp_rate = *f.rate_dsp;
  c.validate();
  return c;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      fail(ErrorCode::flag_range, "not a number: '" + item + "'");
    }
  }
  if (out.empty()) fail(ErrorCode::flag_range, "empty list");
  return out;
}

std::vector<std::string> parse_words(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

io::RoiBox parse_roi(const std::string& text) {
  const auto v = parse_list(text);
  if (v.size() != 4) fail(ErrorCode::flag_range, "--roi needs x,y,w,h");
  return {static_cast<int>(v[0]), static_cast<int>(v[1]), static_cast<int>(v[2]),
          static_cast<int>(v[3])};
}

fs::path manifest_path(const fs::path& p) {
  return fs::is_directory(p) ? p / "manifest.json" : p;
}

std::optional<synth::GroundTruth> load_truth(const io::VideoManifest& m) {
  if (!m.ground_truth) return std::nullopt;
  return synth::read_ground_truth(m.resolve(*m.ground_truth));
}

io::RoiBox initial_roi(const TrackFlags& f, const std::optional<synth::GroundTruth>& truth) {
  if (!f.roi.empty()) return parse_roi(f.roi);
  if (truth && !truth->roi_track.empty()) return truth->roi_track.front();
  fail(ErrorCode::invalid_argument, "no --roi given and the manifest has no ground truth");
}

tracker::TrackerConfig make_tracker(const TrackFlags& f) {
  tracker::TrackerConfig c;
  c.mode = tracker::tracker_mode_from_string(f.tracker);
  c.seed = f.seed;
  c.confidence_floor = f.floor;
  return c;
}

std::vector<tracker::TrackPoint> truth_track(const synth::GroundTruth& truth) {
  std::vector<tracker::TrackPoint> t;
  for (std::size_t i = 0; i < truth.roi_track.size(); ++i) {
    const bool occluded = i < truth.occluded.size() && truth.occluded[i];
    t.push_back({truth.roi_track[i], occluded ? 0.0 : 1.0, occluded});
  }
  return t;
}

std::vector<tracker::TrackPoint> obtain_track(const io::FrameSource& source,
                                              const TrackFlags& f,
                                              const std::optional<synth::GroundTruth>& truth) {
  if (f.gt_track) {
    if (!truth) fail(ErrorCode::invalid_argument, "--gt-track needs a ground-truth file");
    return truth_track(*truth);
  }
  return tracker::track_sequence(source, initial_roi(f, truth), make_tracker(f));
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) fail(ErrorCode::io_failure, "cannot write " + path.string());
  out << text;
}

void emit(const std::optional<fs::path>& path, const std::string& text) {
  if (path) {
    write_text(*path, text);
  } else {
    std::cout << text;
  }
}

std::string video_id(const fs::path& manifest) {
  return manifest.parent_path().filename().string();
}

// Track (or read the ground-truth track) and extract the IRS of every
// manifest in the corpus, scaled ROI variants included.
std::vector<eval::SweepVariant> prepare_corpus(const std::vector<fs::path>& manifests,
                                               const std::vector<double>& roi_scales,
                                               const TrackFlags& tf, unsigned jobs) {
  struct Slot {
    std::optional<eval::PreparedVideo> video;
  };
  std::vector<eval::SweepVariant> variants;
  for (const double scale : roi_scales) {
    char label[32];
    std::snprintf(label, sizeof label, "roi x%g", scale);
    std::vector<Slot> slots(manifests.size());
    parallel_for(manifests.size(), jobs, [&](std::size_t i) {
      const auto m = io::read_manifest(manifests[i]);
      const auto truth = load_truth(m);
      if (!truth) fail(ErrorCode::invalid_argument, manifests[i].string() + " has no ground truth");
      const io::ManifestSource source(m);
      const auto g = source.geometry();
      std::vector<tracker::TrackPoint> track;
      if (tf.gt_track) {
        track = truth_track(*truth);
        for (auto& p : track) p.roi = eval::scale_roi(p.roi, scale, g.width, g.height);
      } else {
        const io::RoiBox roi0 = eval::scale_roi(initial_roi(tf, truth), scale, g.width, g.height);
        track = tracker::track_sequence(source, roi0, make_tracker(tf));
      }
      const auto boxes = tracker::rois(track);
      Signal irs = respsig::extract_irs(source, boxes, tracker::dropped_flags(track));
      slots[i].video = eval::PreparedVideo{video_id(manifests[i]), std::move(irs), truth->rr_bpm};
    });
    eval::SweepVariant v{label, {}};
    for (auto& s : slots) v.videos.push_back(std::move(*s.video));
    variants.push_back(std::move(v));
  }
  return variants;
}

int report_error(const std::string& code, const std::string& message) {
  std::cerr << "error: " << code << ": " << message << '\n';
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thermal-video respiratory rate toolkit"};
  app.require_subcommand(1);
  unsigned jobs = 1;
  app.add_option("--jobs", jobs, "Worker threads (0 = all cores)");

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic thermal video");
  synth::SceneConfig scene;
  scene.width = 160;
  scene.height = 120;
  synth::BreathingModel breath;
  breath.amplitude = 60.0;
  std::string synth_roi;
  std::string waveform = "sinusoid";
  bool bumps = false;
  fs::path synth_out;
  std::vector<std::size_t> occluded;
  synth_cmd->add_option("--rr", breath.rr_bpm, "Breaths per minute");
  synth_cmd->add_option("--amplitude", breath.amplitude, "Breathing amplitude (intensity)");
  synth_cmd->add_option("--phase", breath.phase, "Breathing phase (rad)");
  synth_cmd->add_option("--waveform", waveform, "sinusoid | clipped | paused");
  synth_cmd->add_flag("--bumps", bumps, "Add sub-threshold bumps at 0.22 Hz, 0.3x amplitude");
  synth_cmd->add_option("--duration", scene.duration_s, "Seconds");
  synth_cmd->add_option("--fps", scene.fps, "Frames per second");
  synth_cmd->add_option("--frame-width", scene.width, "Frame width (px)");
  synth_cmd->add_option("--frame-height", scene.height, "Frame height (px)");
  synth_cmd->add_option("--depth", scene.bit_depth, "Bit depth (8 or 16)");
  synth_cmd->add_option("--baseline", scene.baseline.level, "Baseline intensity");
  synth_cmd->add_option("--texture", scene.texture_amplitude, "Nose texture RMS");
  synth_cmd->add_option("--roi", synth_roi, "Nose ROI in frame 0, x,y,w,h");
  synth_cmd->add_option("--drift-x", scene.motion.drift_x, "px/frame");
  synth_cmd->add_option("--drift-y", scene.motion.drift_y, "px/frame");
  synth_cmd->add_option("--jitter-x", scene.motion.jitter_x, "px");
  synth_cmd->add_option("--jitter-y", scene.motion.jitter_y, "px");
  synth_cmd->add_option("--trend", scene.trend_slope, "Intensity per frame");
  synth_cmd->add_option("--noise", scene.noise_sd, "Per-pixel noise sd");
  synth_cmd->add_option("--occlude", occluded, "Frame indices without a face");
  synth_cmd->add_option("--seed", scene.seed, "Noise and texture seed");
  synth_cmd->add_option("-o,--out", synth_out, "Output directory")->required();

  // track
  auto* track_cmd = app.add_subcommand("track", "Track the nose ROI through a video");
  fs::path track_in;
  std::optional<fs::path> track_out;
  TrackFlags track_flags;
  track_cmd->add_option("manifest", track_in, "Manifest file or directory")->required();
  add_track_flags(track_cmd, track_flags);
  track_cmd->add_option("-o,--out", track_out, "Track CSV (default stdout)");

  // extract
  auto* extract_cmd = app.add_subcommand("extract", "Extract the IRS along a track");
  fs::path extract_in;
  std::optional<fs::path> extract_track;
  std::optional<fs::path> extract_out;
  TrackFlags extract_flags;
  extract_cmd->add_option("manifest", extract_in, "Manifest file or directory")->required();
  extract_cmd->add_option("--track", extract_track, "Track CSV (default: track now)");
  add_track_flags(extract_cmd, extract_flags);
  extract_cmd->add_option("-o,--out", extract_out, "Signal CSV (default stdout)");

  // process
  auto* process_cmd = app.add_subcommand("process", "Detrend, normalize and band-filter a signal");
  fs::path process_in;
  std::optional<fs::path> process_out;
  std::string process_stage = "RS_BF";
  SignalFlags process_flags;
  process_cmd->add_option("signal", process_in, "IRS CSV")->required();
  process_cmd->add_option("--stage", process_stage, "RS_D | RS_N | RS_BF");
  add_signal_flags(process_cmd, process_flags);
  process_cmd->add_option("-o,--out", process_out, "Signal CSV (default stdout)");

  // rr
  auto* rr_cmd = app.add_subcommand("rr", "Estimate the respiratory rate of an IRS");
  fs::path rr_in;
  std::optional<fs::path> rr_out;
  SignalFlags rr_signal;
  MethodFlags rr_method;
  rr_cmd->add_option("signal", rr_in, "IRS CSV")->required();
  add_signal_flags(rr_cmd, rr_signal);
  add_method_flags(rr_cmd, rr_method);
  rr_cmd->add_option("-o,--out", rr_out, "Result CSV (default stdout)");

  // run
  auto* run_cmd = app.add_subcommand("run", "Run the robot/cloud/terminal pipeline");
  fs::path run_in;
  std::optional<fs::path> run_out;
  std::optional<fs::path> run_ledger;
  std::string run_mode = "nose";
  int face_w = 320;
  int face_h = 240;
  bool run_concurrent = false;
  SignalFlags run_signal;
  MethodFlags run_method;
  TrackFlags run_track;
  CostFlags run_cost;
  run_cmd->add_option("manifest", run_in, "Manifest file or directory")->required();
  run_cmd->add_option("--mode", run_mode, "original | face | nose");
  run_cmd->add_option("--face-width", face_w, "Face crop width (px)");
  run_cmd->add_option("--face-height", face_h, "Face crop height (px)");
  run_cmd->add_flag("--concurrent", run_concurrent, "One thread per tier");
  add_signal_flags(run_cmd, run_signal);
  add_method_flags(run_cmd, run_method);
  add_track_flags(run_cmd, run_track);
  add_cost_flags(run_cmd, run_cost);
  run_cmd->add_option("-o,--out", run_out, "Result CSV");
  run_cmd->add_option("--ledger", run_ledger, "Traffic ledger CSV");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "Parameter sweep over a corpus");
  fs::path sweep_in;
  std::string sweep_xi;
  std::string sweep_width;
  std::string sweep_scales = "1";
  std::optional<fs::path> sweep_out;
  SignalFlags sweep_signal;
  TrackFlags sweep_track;
  sweep_cmd->add_option("corpus", sweep_in, "Directory of synthetic videos")->required();
  sweep_cmd->add_option("--xi", sweep_xi, "Comma-separated xi values (NRRM)");
  sweep_cmd->add_option("--width", sweep_width, "Comma-separated Gaussian widths (GW)");
  sweep_cmd->add_option("--roi-scales", sweep_scales, "Comma-separated ROI scale variants");
  add_signal_flags(sweep_cmd, sweep_signal);
  add_track_flags(sweep_cmd, sweep_track);
  sweep_cmd->add_option("-o,--out", sweep_out, "Output prefix");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Method comparison with Bland-Altman output");
  fs::path eval_in;
  std::string eval_methods = "nrrm,nrrm-eep,fdam,gw";
  std::optional<fs::path> eval_out;
  SignalFlags eval_signal;
  MethodFlags eval_params;
  TrackFlags eval_track;
  eval_cmd->add_option("corpus", eval_in, "Directory of synthetic videos")->required();
  eval_cmd->add_option("--method,--methods", eval_methods, "Comma-separated methods");
  eval_cmd->add_option("--xi", eval_params.xi, "xi for NRRM");
  eval_cmd->add_option("--width", eval_params.width, "Width for GW");
  add_signal_flags(eval_cmd, eval_signal);
  add_track_flags(eval_cmd, eval_track);
  eval_cmd->add_option("-o,--out", eval_out, "Output prefix");

  // traffic
  auto* traffic_cmd = app.add_subcommand("traffic", "Traffic per transfer mode");
  fs::path traffic_in;
  std::string traffic_modes = "original,face,nose";
  std::optional<fs::path> traffic_out;
  TrackFlags traffic_track;
  CostFlags traffic_cost;
  SignalFlags traffic_signal;
  traffic_cmd->add_option("manifest", traffic_in, "Manifest file or directory")->required();
  traffic_cmd->add_option("--modes", traffic_modes, "Comma-separated transfer modes");
  traffic_cmd->add_option("--face-width", face_w, "Face crop width (px)");
  traffic_cmd->add_option("--face-height", face_h, "Face crop height (px)");
  add_track_flags(traffic_cmd, traffic_track);
  add_cost_flags(traffic_cmd, traffic_cost);
  add_signal_flags(traffic_cmd, traffic_signal);
  traffic_cmd->add_option("-o,--out", traffic_out, "Traffic CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("flag_range", e.what());
  }

  try {
    if (*synth_cmd) {
      if (!synth_roi.empty()) {
        scene.nose_roi0 = parse_roi(synth_roi);
      } else {
        scene.nose_roi0 = {scene.width / 2 - 16, scene.height / 2 - 12, 32, 24};
      }
      if (waveform == "sinusoid") {
        breath.waveform = synth::Waveform::sinusoid;
      } else if (waveform == "clipped") {
        breath.waveform = synth::Waveform::clipped_sinusoid;
      } else if (waveform == "paused") {
        breath.waveform = synth::Waveform::paused_sinusoid;
      } else {
        fail(ErrorCode::flag_range, "unknown waveform '" + waveform + "'");
      }
      if (bumps) breath.bumps = synth::SpuriousBumps{};
      scene.occluded_frames = occluded;
      const auto g = synth::generate(scene, breath, synth_out, jobs);
      std::cout << "wrote " << g.manifest.frame_paths.size() << " frames to "
                << synth_out.string() << '\n';
    } else if (*track_cmd) {
      const auto m = io::read_manifest(manifest_path(track_in));
      const io::ManifestSource source(m);
      const auto track = obtain_track(source, track_flags, load_truth(m));
      emit(track_out, tracker::track_csv(track));
    } else if (*extract_cmd) {
      const auto m = io::read_manifest(manifest_path(extract_in));
      const io::ManifestSource source(m);
      const auto track = extract_track ? tracker::read_track_csv(*extract_track)
                                       : obtain_track(source, extract_flags, load_truth(m));
      const auto boxes = tracker::rois(track);
      const Signal irs = respsig::extract_irs(source, boxes, tracker::dropped_flags(track));
      emit(extract_out, respsig::signal_csv(irs));
    } else if (*process_cmd) {
      const Signal irs = respsig::read_signal_csv(process_in);
      const auto opt = make_options(process_flags);
      const Stage stage = stage_from_string(process_stage);
      if (stage == Stage::irs) fail(ErrorCode::flag_range, "--stage must be RS_D, RS_N or RS_BF");
      Signal out = dsp::detrend(irs, opt.segment_seconds);
      if (stage != Stage::rs_d) out = dsp::normalize(out);
      if (stage == Stage::rs_bf) out = dsp::band_filter(out, opt.filter);
      emit(process_out, respsig::signal_csv(out));
    } else if (*rr_cmd) {
      const Signal irs = respsig::read_signal_csv(rr_in);
      const auto run = make_run(rr_method);
      const auto row = rr::evaluate(rr_in.stem().string(), irs, run, make_options(rr_signal));
      const std::vector<rr::ResultRow> rows{row};
      emit(rr_out, rr::results_csv(rows));
      if (!row.error_code.empty()) return report_error(row.error_code, "estimation failed");
    } else if (*run_cmd) {
      const fs::path mpath = manifest_path(run_in);
      const auto m = io::read_manifest(mpath);
      const auto truth = load_truth(m);
      const io::ManifestSource source(m);
      pipeline::PipelineConfig cfg;
      cfg.mode = pipeline::transfer_mode_from_string(run_mode);
      cfg.tracker = make_tracker(run_track);
      if (run_track.gt_track) {
        if (!truth) fail(ErrorCode::invalid_argument, "--gt-track needs a ground-truth file");
        cfg.track = truth_track(*truth);
      }
      cfg.method = make_run(run_method);
      cfg.options = make_options(run_signal);
      cfg.face_width = face_w;
      cfg.face_height = face_h;
      cfg.cost = make_cost(run_cost);
      const auto result = pipeline::run_pipeline(
          source, initial_roi(run_track, truth), cfg,
          run_concurrent ? pipeline::Execution::concurrent : pipeline::Execution::sequential);
      rr::ResultRow row;
      row.video_id = video_id(mpath);
      row.method = cfg.method.method;
      if (row.method == rr::Method::nrrm || row.method == rr::Method::gw) {
        row.xi_or_width = cfg.method.parameter;
      }
      row.estimate = result.estimate;
      if (row.estimate && row.estimate->width) row.xi_or_width = *row.estimate->width;
      row.error_code = result.error_code;
      const std::vector<rr::ResultRow> rows{row};
      if (run_out) write_text(*run_out, rr::results_csv(rows));
      if (run_ledger) write_text(*run_ledger, result.ledger.csv());
      if (result.estimate) {
        std::printf("method %s  rr_bpm %.4f  PN %zu\n", std::string(rr::to_string(row.method)).c_str(),
                    result.estimate->rr_bpm, result.estimate->pn);
      }
      std::cout << result.ledger.summary();
      std::printf("comm %.3f s  comp %.3f s  total %.3f s\n", result.cost.comm_seconds,
                  result.cost.comp_seconds, result.cost.total());
      if (!result.error_code.empty()) return report_error(result.error_code, result.error_message);
    } else if (*sweep_cmd) {
      const auto manifests = eval::find_manifests(sweep_in);
      std::vector<eval::SweepColumn> columns;
      if (!sweep_xi.empty()) {
        for (const double xi : parse_list(sweep_xi)) {
          check_xi(xi);
          char label[32];
          std::snprintf(label, sizeof label, "xi=%.2f", xi);
          columns.push_back({label, {rr::Method::nrrm, xi}});
        }
      }
      if (!sweep_width.empty()) {
        for (const double w : parse_list(sweep_width)) {
          if (w < 3) fail(ErrorCode::flag_range, "--width values must be >= 3");
          char label[32];
          std::snprintf(label, sizeof label, "w=%g", w);
          columns.push_back({label, {rr::Method::gw, w}});
        }
      }
      if (columns.empty()) columns.push_back({"xi=0.25", {rr::Method::nrrm, rr::kDefaultXi}});
      const auto variants = prepare_corpus(manifests, parse_list(sweep_scales), sweep_track, jobs);
      const auto table = eval::sweep(variants, columns, make_options(sweep_signal), jobs);
      std::cout << table.text();
      for (std::size_t r = 0; r < table.row_labels.size(); ++r) {
        if (const auto c = table.min_mae_column(r)) {
          std::cout << table.row_labels[r] << ": minimum MAE at " << table.column_labels[*c]
                    << '\n';
        }
      }
      if (sweep_out) {
        write_text(sweep_out->string() + "_table.csv", table.csv());
        write_text(sweep_out->string() + "_table.txt", table.text());
        write_text(sweep_out->string() + "_results.csv", table.results_csv());
      }
    } else if (*eval_cmd) {
      const auto manifests = eval::find_manifests(eval_in);
      check_xi(eval_params.xi);
      std::vector<eval::SweepColumn> columns;
      for (const auto& name : parse_words(eval_methods)) {
        const rr::Method method = rr::method_from_string(name);
        double param = 0.0;
        if (method == rr::Method::nrrm) param = eval_params.xi;
        if (method == rr::Method::gw) param = eval_params.width;
        columns.push_back({std::string(rr::to_string(method)), {method, param}});
      }
      const auto variants = prepare_corpus(manifests, {1.0}, eval_track, jobs);
      const auto table = eval::sweep(variants, columns, make_options(eval_signal), jobs);
      std::cout << table.text();
      if (eval_out) {
        write_text(eval_out->string() + "_table.csv", table.csv());
        write_text(eval_out->string() + "_results.csv", table.results_csv());
      }
      for (std::size_t c = 0; c < columns.size(); ++c) {
        eval::PairedResults paired;
        const auto& cell = table.at(0, c);
        for (std::size_t v = 0; v < cell.results.size(); ++v) {
          if (!cell.results[v].estimate) continue;
          paired.truth.push_back(variants[0].videos[v].truth_bpm);
          paired.predicted.push_back(cell.results[v].estimate->rr_bpm);
          paired.ids.push_back(cell.results[v].video_id);
        }
        if (paired.truth.size() < 2) continue;
        const auto ba = eval::bland_altman(paired);
        std::printf("%s  bland-altman mean %.4f  sd %.4f  LoA [%.4f, %.4f]\n",
                    columns[c].label.c_str(), ba.mean_diff, ba.sd_diff, ba.loa_low, ba.loa_high);
        if (eval_out) {
          const std::string base = eval_out->string() + "_ba_" + columns[c].label;
          write_text(base + ".csv", eval::bland_altman_csv(ba, paired.ids));
          write_text(base + ".gp",
                     eval::bland_altman_gnuplot(ba, fs::path(base + ".csv").filename().string(),
                                                columns[c].label + " Bland-Altman"));
        }
      }
    } else if (*traffic_cmd) {
      const auto m = io::read_manifest(manifest_path(traffic_in));
      const auto truth = load_truth(m);
      const io::ManifestSource source(m);
      pipeline::PipelineConfig cfg;
      cfg.tracker = make_tracker(traffic_track);
      cfg.track = obtain_track(source, traffic_track, truth);
      cfg.options = make_options(traffic_signal);
      cfg.face_width = face_w;
      cfg.face_height = face_h;
      cfg.cost = make_cost(traffic_cost);
      std::ostringstream out;
      out << "mode,robot_cloud_bytes,total_bytes,messages,dropped_frames,comm_s,comp_s\n";
      for (const auto& name : parse_words(traffic_modes)) {
        cfg.mode = pipeline::transfer_mode_from_string(name);
        const auto r = pipeline::run_pipeline(source, initial_roi(traffic_track, truth), cfg);
        const auto& rc = r.ledger.totals(pipeline::Boundary::robot_cloud);
        char line[200];
        std::snprintf(line, sizeof line, "%s,%zu,%zu,%zu,%zu,%.4f,%.4f\n", name.c_str(), rc.bytes,
                      r.ledger.total_bytes(), r.ledger.total_messages(), rc.dropped_frames,
                      r.cost.comm_seconds, r.cost.comp_seconds);
        out << line;
      }
      emit(traffic_out, out.str());
    }
  } catch (const Error& e) {
    return report_error(std::string(to_string(e.code())), e.what());
  } catch (const std::exception& e) {
    return report_error("io_failure", e.what());
  }
  return 0;
}
