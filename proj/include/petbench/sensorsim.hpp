#pragma once

// Perception oracle: turns scenario ground truth into the gaze, face and hand
// streams a PET would get from the headset, with seeded imperfections.

#include <cstdint>
#include <vector>

#include "petbench/scenario.hpp"

namespace petbench {

struct GazeSample {
  Vec3 origin = Vec3::Zero();
  Vec3 direction = Vec3::UnitZ();
};

/// Where the stimulus screen sits in the headset camera image.
struct CameraView {
  Size2 camera_size{640, 360};
  Point2 screen_top_left{0, 0};
  Point2 screen_bottom_right{640, 360};

  /// Full-frame view matching the stimulus exactly.
  static CameraView identity(Size2 stimulus);
  Box2D to_camera(const Box2D& stimulus_box, Size2 stimulus) const;
};

struct PerceptionConfig {
  double noise_sigma_px = 2.0;
  double miss_prob = 0.02;
  bool drop_occluded = true;
  std::uint64_t seed = 0;
  /// Std-dev of a per-event horizontal hand offset. Zero disables it; large
  /// values make gestures land nearer the wrong face.
  double hand_jitter_px = 0.0;
  double occlusion_iou = kDefaultOcclusionIou;

  static PerceptionConfig perfect(std::uint64_t seed = 0);
};

struct Detection {
  int det_id = 0;
  Box3D box;
  Box2D box2d;  // camera pixels
  int gt_person_id = 0;
};

struct HandObservation {
  Box2D box2d;  // camera pixels
  Gesture gesture = Gesture::None;
  int gt_person_id = 0;
};

GazeSample gaze_at(const Scenario& s, std::int64_t t_ms, const Pose& head);

bool ray_hits_box(const GazeSample& g, const Box3D& b);

/// Detector output for the frame at t. Output order is a seeded shuffle,
/// standing in for a detector's unspecified output order.
std::vector<Detection> detect_faces(const Scenario& s, std::int64_t t_ms, const PerceptionConfig& cfg,
                                    const CameraView& view);

std::vector<HandObservation> detect_hands(const Scenario& s, std::int64_t t_ms, const PerceptionConfig& cfg,
                                          const CameraView& view);

/// Hand box placed directly below a face box, separated by a quarter of the
/// face height.
Box2D hand_box_below(const Box2D& face);

/// Deterministic 64-bit mix of the inputs (splitmix64 chain).
std::uint64_t hash_seed(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0, std::uint64_t d = 0);

}  // namespace petbench
