#pragma once

// Data collection and replay: time-stamped input logs, the elapsed-time
// replay rule, and the marker-guided viewpoint alignment.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "petbench/geometry.hpp"
#include "petbench/sensorsim.hpp"

namespace petbench {

struct CollectionEntry {
  std::int64_t timestamp_ms = 0;  // wall clock
  std::int64_t elapsed_ms = 0;    // since the recording toggle
  std::int64_t frame = 1;
  double fps = 0;
  Pose head;
  Vec3 marker_vec = Vec3::Zero();  // headset -> marker, marker frame
  GazeSample gaze;

  bool operator==(const CollectionEntry& o) const;
};

struct CollectionLog {
  std::vector<CollectionEntry> entries;
  Pose marker_pose_at_start;
};

/// Appends `entry`. Throws OrderingError unless elapsed time and frame
/// number both strictly increase.
void record(CollectionLog& log, const CollectionEntry& entry);

/// Most recent entry with elapsed_ms <= t. nullopt before the first entry;
/// the last entry is held once t passes it.
std::optional<CollectionEntry> replay_at(const CollectionLog& log, std::int64_t t_ms);

/// Start pose reconstructed from the current marker pose and the recorded
/// headset->marker vector (expressed in the marker frame). The recorded
/// head orientation relative to the marker defaults to identity.
Pose compute_target_pose(const Pose& marker_now, const Vec3& recorded_marker_vec,
                         const Quat& recorded_relative_orientation = Quat::Identity());

struct AlignmentTolerances {
  double pos_tol_m = 0.02;
  double ang_tol_deg = 2.0;
};

struct ControllerStep {
  double gain = 0.2;
  double jitter_m = 0.0;    // std-dev of positional jitter per step
  double jitter_deg = 0.0;  // std-dev of angular jitter per step
  std::uint64_t seed = 0;
  std::int64_t step_index = 0;
};

struct AlignmentState {
  Pose target;
  Pose current;
  bool aligned = false;
  bool marker_stage_enabled = true;
  bool reference_fov_captured = false;

  double position_error() const { return (current.position - target.position).norm(); }
  double angular_error_deg() const { return angular_distance_deg(current.orientation, target.orientation); }
};

/// One frame of the simulated experimenter walking back to the start pose.
/// Alignment latches: once aligned the reference view is captured and the
/// marker stage stays disabled.
AlignmentState step_alignment(const AlignmentState& state, const ControllerStep& step,
                              const AlignmentTolerances& tol = {});

/// Reference FoV record: where the stimulus corners appear in camera pixels.
struct CornerCalibration {
  Point2 stimulus_top_left;
  Point2 stimulus_bottom_right;
  Size2 stimulus_size;

  static CornerCalibration from_view(const CameraView& view, Size2 stimulus);
};

enum class Stage { Face, Hand, Gesture, Transform, Marker };
inline constexpr Stage kAllStages[] = {Stage::Face, Stage::Hand, Stage::Gesture, Stage::Transform, Stage::Marker};
std::string_view to_string(Stage s);

enum class FaceLabel { Subject, Bystander };
std::string_view to_string(FaceLabel l);

struct DetectionRow {
  std::int64_t frame = 0;
  int track_id = 0;
  Box2D box2d;
  double depth_z = 0;
  FaceLabel label = FaceLabel::Bystander;
  bool obfuscated = false;
  int gt_person_id = 0;

  bool operator==(const DetectionRow& o) const;
};

struct FrameLogEntry {
  std::int64_t frame = 0;
  std::int64_t elapsed_ms = 0;
  double fps = 0;
  std::map<Stage, double> module_times_ms;
  std::vector<DetectionRow> detection_rows;

  double module_time(Stage s) const;
  bool operator==(const FrameLogEntry& o) const;
};

/// One hand-face pairing observed by the explicit PET.
struct EventRow {
  std::int64_t frame = 0;
  int face_track_id = 0;
  Gesture gesture = Gesture::OpenPalm;
  double distance_px = 0;
  bool new_state = false;

  bool operator==(const EventRow& o) const = default;
};

}  // namespace petbench
