#include "petbench/recordreplay.hpp"

#include <algorithm>
#include <random>

#include "petbench/errors.hpp"

namespace petbench {

namespace {

bool same_pose(const Pose& a, const Pose& b) {
  return a.position == b.position && a.orientation.coeffs() == b.orientation.coeffs();
}

bool same_box(const Box2D& a, const Box2D& b) { return a.x == b.x && a.y == b.y && a.w == b.w && a.h == b.h; }

}  // namespace

bool CollectionEntry::operator==(const CollectionEntry& o) const {
  return timestamp_ms == o.timestamp_ms && elapsed_ms == o.elapsed_ms && frame == o.frame && fps == o.fps &&
         same_pose(head, o.head) && marker_vec == o.marker_vec && gaze.origin == o.gaze.origin &&
         gaze.direction == o.gaze.direction;
}

bool DetectionRow::operator==(const DetectionRow& o) const {
  return frame == o.frame && track_id == o.track_id && same_box(box2d, o.box2d) && depth_z == o.depth_z &&
         label == o.label && obfuscated == o.obfuscated && gt_person_id == o.gt_person_id;
}

CornerCalibration CornerCalibration::from_view(const CameraView& view, Size2 stimulus) {
  return {view.screen_top_left, view.screen_bottom_right, stimulus};
}

double FrameLogEntry::module_time(Stage s) const {
  auto it = module_times_ms.find(s);
  return it == module_times_ms.end() ? 0.0 : it->second;
}

bool FrameLogEntry::operator==(const FrameLogEntry& o) const {
  for (Stage s : kAllStages)
    if (module_time(s) != o.module_time(s)) return false;
  return frame == o.frame && elapsed_ms == o.elapsed_ms && fps == o.fps && detection_rows == o.detection_rows;
}

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::Face: return "face";
    case Stage::Hand: return "hand";
    case Stage::Gesture: return "gesture";
    case Stage::Transform: return "transform";
    case Stage::Marker: return "marker";
  }
  return "face";
}

std::string_view to_string(FaceLabel l) { return l == FaceLabel::Subject ? "subject" : "bystander"; }

void record(CollectionLog& log, const CollectionEntry& entry) {
  if (entry.elapsed_ms < 0) throw OrderingError("elapsed_ms must be non-negative");
  if (entry.frame < 1) throw OrderingError("frame numbers start at 1");
  if (!log.entries.empty()) {
    const auto& last = log.entries.back();
    if (entry.elapsed_ms <= last.elapsed_ms)
      throw OrderingError("elapsed_ms " + std::to_string(entry.elapsed_ms) + " does not follow " +
                          std::to_string(last.elapsed_ms));
    if (entry.frame <= last.frame) throw OrderingError("frame numbers must strictly increase");
  }
  log.entries.push_back(entry);
}

std::optional<CollectionEntry> replay_at(const CollectionLog& log, std::int64_t t_ms) {
  const auto& e = log.entries;
  auto it = std::upper_bound(e.begin(), e.end(), t_ms,
                             [](std::int64_t t, const CollectionEntry& c) { return t < c.elapsed_ms; });
  if (it == e.begin()) return std::nullopt;
  return *(it - 1);
}

Pose compute_target_pose(const Pose& marker_now, const Vec3& recorded_marker_vec,
                         const Quat& recorded_relative_orientation) {
  const Quat q = marker_now.orientation.normalized();
  Pose p;
  p.position = marker_now.position - q * recorded_marker_vec;
  p.orientation = (q * recorded_relative_orientation.normalized()).normalized();
  return p;
}

AlignmentState step_alignment(const AlignmentState& state, const ControllerStep& step,
                              const AlignmentTolerances& tol) {
  AlignmentState next = state;
  auto within = [&](const AlignmentState& s) {
    return s.position_error() <= tol.pos_tol_m && s.angular_error_deg() <= tol.ang_tol_deg;
  };
  if (!state.aligned && !within(state)) {
    next.current.position += step.gain * (state.target.position - state.current.position);
    next.current.orientation = state.current.orientation.slerp(step.gain, state.target.orientation).normalized();
    if (step.jitter_m > 0 || step.jitter_deg > 0) {
      std::mt19937_64 rng(hash_seed(step.seed, 0xa11, std::uint64_t(step.step_index)));
      std::normal_distribution<double> n(0.0, 1.0);
      next.current.position += step.jitter_m * Vec3(n(rng), n(rng), n(rng));
      const Vec3 axis = Vec3(n(rng), n(rng), n(rng)).normalized();
      const double angle = step.jitter_deg * n(rng) * M_PI / 180.0;
      next.current.orientation = (Quat(Eigen::AngleAxisd(angle, axis)) * next.current.orientation).normalized();
    }
  }
  if (state.aligned || within(next)) {
    next.aligned = true;
    next.reference_fov_captured = true;
    next.marker_stage_enabled = false;
  }
  return next;
}

}  // namespace petbench
