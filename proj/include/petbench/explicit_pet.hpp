#pragma once

// Gesture-driven explicit PET: per-frame face and hand perception, nearest
// hand-face pairing, and persistent per-face obfuscation state.

#include <cstdint>
#include <vector>

#include "petbench/profile.hpp"
#include "petbench/recordreplay.hpp"
#include "petbench/sensorsim.hpp"

namespace petbench {

struct ExplicitFaceState {
  int track_id = 0;
  Box2D box2d;
  double depth_z = 0;
  bool obfuscated = false;
  int gt_person_id = 0;  // analysis only
  int missed_frames = 0;
};

struct HandFacePair {
  int face_track_id = 0;
  Gesture gesture = Gesture::OpenPalm;
  double distance_px = 0;
  std::size_t hand_index = 0;
};

struct ExplicitConfig {
  double track_iou = 0.3;
  double pairing_factor = 2.0;  // times the face diagonal
  /// Frames an unmatched face keeps its id and state before being dropped.
  int face_keep_frames = 5;
};

struct ExplicitState {
  std::vector<ExplicitFaceState> faces;  // kept in track_id order
  int next_track_id = 1;
};

/// Each gesturing hand pairs to the face with the nearest center, within
/// pairing_factor x that face's diagonal. Ties go to the lowest track_id.
std::vector<HandFacePair> hand_face_map(const std::vector<ExplicitFaceState>& faces,
                                        const std::vector<HandObservation>& hands, double pairing_factor = 2.0);

struct ExplicitFrameOutput {
  std::vector<HandFacePair> pairs;
  std::vector<EventRow> events;  // frame left at 0
  bool transition = false;       // some face changed state this frame
  ExecutedStages executed;
  std::vector<DetectionRow> rows;  // faces seen this frame, frame left at 0
};

ExplicitFrameOutput explicit_step(ExplicitState& state, const std::vector<Detection>& faces,
                                  const std::vector<HandObservation>& hands, const ExplicitConfig& cfg = {});

/// t_face + t_hand + t_gesture + t_transform of a logged frame.
double intent_cost_proxy(const FrameLogEntry& entry);

}  // namespace petbench
