#pragma once

// The generic PET control loop on a simulated clock, in Baseline, Collect
// and Replay modes, plus trial directory persistence.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "petbench/explicit_pet.hpp"
#include "petbench/implicit_pet.hpp"
#include "petbench/profile.hpp"
#include "petbench/recordreplay.hpp"
#include "petbench/scenario.hpp"
#include "petbench/sensorsim.hpp"

namespace petbench {

enum class RunMode { Baseline, Collect, Replay };
std::string_view to_string(RunMode m);
std::optional<RunMode> parse_run_mode(std::string_view s);

/// What a pluggable PET sees each frame.
struct FrameContext {
  const Scenario* scenario = nullptr;
  std::int64_t t_ms = 0;
  std::optional<GazeSample> gaze;
  const PerceptionConfig* perception = nullptr;
  const CameraView* view = nullptr;
};

/// Detector, decision and transformation hooks for a PET assembled from
/// parts. The default decision protects every detection.
struct PetComponents {
  std::function<std::vector<Detection>(const FrameContext&)> detector;
  std::function<bool(const Detection&, const FrameContext&)> decision;
  std::function<Box2D(const FrameContext&, const Box2D&)> transform;

  static PetComponents protect_all();
};

struct RunConfig {
  RunMode mode = RunMode::Baseline;
  PetKind pet = PetKind::Implicit;
  int sampling_interval = 0;
  ModelStack stack = ModelStack::High;
  std::uint64_t seed = 0;
  PerceptionConfig perception;
  AssociationPolicy policy;
  int ttl_init = 3;
  int gaze_window = 90;
  int subject_threshold = 30;
  ExplicitConfig explicit_cfg;
  /// Stimulus time at which logging starts.
  std::int64_t start_offset_ms = 0;
  /// Camera-pixel placement of the stimulus; empty means full frame.
  std::optional<CameraView> view;
  /// Replay-mode experimenter start, relative to the collection start pose.
  Vec3 replay_start_offset_m{0.3, 0.0, -0.2};
  double replay_start_yaw_deg = 10.0;
  ControllerStep controller;
  AlignmentTolerances tolerances;
  std::int64_t wall_clock_start_ms = 1700000000000;

  CameraView camera_view(const Scenario& s) const;
};

void validate(const RunConfig& cfg);

/// Text form of a RunConfig, in the sectioned profile/scenario dialect.
std::string write_run_config(const RunConfig& cfg);
RunConfig parse_run_config(std::string_view text);

struct TrialLog {
  std::vector<FrameLogEntry> frames;
  std::vector<EventRow> events;
  RunConfig config;
  std::string scenario_id;
  std::string profile_name;
  std::optional<CornerCalibration> reference_fov;
  /// Filled in Collect mode.
  std::optional<CollectionLog> collection;
};

/// Runs the PET selected by cfg.pet. Replay mode requires input_log.
TrialLog run_trial(const Scenario& s, const HeadsetProfile& profile, const RunConfig& cfg,
                   const CollectionLog* input_log = nullptr);

/// Same loop with a PET assembled from components.
TrialLog run_trial(const Scenario& s, const PetComponents& pet, const HeadsetProfile& profile,
                   const RunConfig& cfg, const CollectionLog* input_log = nullptr);

/// Writes frames.csv, detections.csv, trial.cfg, scenario.txt, and events.csv
/// (explicit PET) or collection.csv (Collect mode) when present.
void write_trial_dir(const TrialLog& log, const Scenario& s, const std::filesystem::path& dir);

struct LoadedTrial {
  TrialLog log;
  Scenario scenario;
};

LoadedTrial read_trial_dir(const std::filesystem::path& dir);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace petbench
