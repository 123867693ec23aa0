#pragma once

// Gaze-driven implicit PET: sampled face inference, TTL'd tracks, subject
// promotion from a sliding gaze window, and pluggable association policies.

#include <cstdint>
#include <deque>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "petbench/kalman.hpp"
#include "petbench/profile.hpp"
#include "petbench/recordreplay.hpp"
#include "petbench/sensorsim.hpp"

namespace petbench {

enum class PolicyKind { BaselineOverlap, NPP, KPP, CD, Hybrid };
std::string_view to_string(PolicyKind k);
std::optional<PolicyKind> parse_policy_kind(std::string_view s);

struct AssociationPolicy {
  PolicyKind kind = PolicyKind::BaselineOverlap;
  double hybrid_w_kpp = 0.2;
  double hybrid_w_cd = 0.8;
};

struct TrackedFace {
  int track_id = 0;
  Box3D box3d;
  Box2D box2d;
  FaceLabel label = FaceLabel::Bystander;
  int ttl_frames = 0;  // remaining missed inference rounds
  int gaze_hits = 0;
  std::deque<bool> gaze_history;
  std::optional<Vec3> prev_center;
  KalmanState kalman;
  bool obfuscated_last_frame = false;
  int gt_person_id = 0;
  double last_update_ms = 0;
};

struct ImplicitConfig {
  int sampling_interval = 0;
  int ttl_init = 3;
  int gaze_window = 90;
  int subject_threshold = 30;
  double kalman_q = 1e-2;
  double noise_sigma_px = 2.0;  // converted to meters for the Kalman R
  double image_width_px = 640;
  AssociationPolicy policy;
};

struct ImplicitState {
  std::vector<TrackedFace> tracks;  // kept in track_id order
  int next_track_id = 1;
  int frame_counter = 0;
};

struct Assignment {
  std::vector<std::pair<int, std::size_t>> matches;  // track_id, detection index
  std::vector<std::size_t> unmatched_detections;
  std::vector<int> unmatched_tracks;
};

/// p + (p - p_prev), or p when there is no previous center.
Vec3 npp_predict(const TrackedFace& track);

double hybrid_score(double d_kpp, double d_cd, const AssociationPolicy& policy = {});

/// Baseline: detections in arrival order take the first overlapping track in
/// id order. Other policies pick, over all overlapping (track, detection)
/// pairs, the lowest distance first; ties go to the lower track_id, then the
/// earlier detection.
Assignment associate(const std::vector<TrackedFace>& tracks, const std::vector<Detection>& detections,
                     const AssociationPolicy& policy, double t_ms = 0);

struct ImplicitFrameOutput {
  bool inference_ran = false;
  ExecutedStages executed;
  std::vector<DetectionRow> rows;  // one per live track, frame left at 0
};

ImplicitFrameOutput implicit_step(ImplicitState& state, double t_ms, const std::vector<Detection>& detections,
                                  const std::optional<GazeSample>& gaze, const ImplicitConfig& cfg);

}  // namespace petbench
