#include "petbench/explicit_pet.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace petbench {

std::vector<HandFacePair> hand_face_map(const std::vector<ExplicitFaceState>& faces,
                                        const std::vector<HandObservation>& hands, double pairing_factor) {
  std::vector<HandFacePair> out;
  for (std::size_t h = 0; h < hands.size(); ++h) {
    if (hands[h].gesture == Gesture::None) continue;
    const ExplicitFaceState* best = nullptr;
    double best_d = 0;
    for (const auto& f : faces) {
      const double d = std::hypot(f.box2d.cx() - hands[h].box2d.cx(), f.box2d.cy() - hands[h].box2d.cy());
      if (!best || d < best_d || (d == best_d && f.track_id < best->track_id)) {
        best = &f;
        best_d = d;
      }
    }
    if (best && best_d <= pairing_factor * best->box2d.diagonal())
      out.push_back({best->track_id, hands[h].gesture, best_d, h});
  }
  return out;
}

namespace {

// Greedy max-IoU matching of this frame's faces to known faces.
std::vector<int> match_faces(ExplicitState& state, const std::vector<Detection>& dets, const ExplicitConfig& cfg) {
  std::vector<std::tuple<double, int, std::size_t, std::size_t>> pairs;  // -iou, track_id, face idx, det idx
  for (std::size_t i = 0; i < state.faces.size(); ++i)
    for (std::size_t d = 0; d < dets.size(); ++d) {
      const double v = iou(state.faces[i].box2d, dets[d].box2d);
      if (v >= cfg.track_iou) pairs.emplace_back(-v, state.faces[i].track_id, i, d);
    }
  std::sort(pairs.begin(), pairs.end());
  std::vector<int> det_face(dets.size(), -1);
  std::vector<bool> face_used(state.faces.size(), false);
  for (const auto& [neg, id, i, d] : pairs) {
    if (face_used[i] || det_face[d] >= 0) continue;
    face_used[i] = true;
    det_face[d] = int(i);
  }
  return det_face;
}

}  // namespace

ExplicitFrameOutput explicit_step(ExplicitState& state, const std::vector<Detection>& dets,
                                  const std::vector<HandObservation>& hands, const ExplicitConfig& cfg) {
  ExplicitFrameOutput out;
  const std::vector<int> det_face = match_faces(state, dets, cfg);

  std::vector<bool> seen(state.faces.size(), false);
  std::vector<int> seen_ids;
  for (std::size_t d = 0; d < dets.size(); ++d) {
    if (det_face[d] >= 0) {
      auto& f = state.faces[det_face[d]];
      f.box2d = dets[d].box2d;
      f.depth_z = dets[d].box.center.z();
      f.gt_person_id = dets[d].gt_person_id;
      f.missed_frames = 0;
      seen[det_face[d]] = true;
      seen_ids.push_back(f.track_id);
    }
  }
  for (std::size_t i = 0; i < state.faces.size(); ++i)
    if (!seen[i]) ++state.faces[i].missed_frames;
  std::erase_if(state.faces, [&](const auto& f) { return f.missed_frames > cfg.face_keep_frames; });
  for (std::size_t d = 0; d < dets.size(); ++d) {
    if (det_face[d] >= 0) continue;
    ExplicitFaceState f;
    f.track_id = state.next_track_id++;
    f.box2d = dets[d].box2d;
    f.depth_z = dets[d].box.center.z();
    f.gt_person_id = dets[d].gt_person_id;
    seen_ids.push_back(f.track_id);
    state.faces.push_back(f);
  }

  std::vector<ExplicitFaceState> visible;
  for (const auto& f : state.faces)
    if (std::find(seen_ids.begin(), seen_ids.end(), f.track_id) != seen_ids.end()) visible.push_back(f);

  out.pairs = hand_face_map(visible, hands, cfg.pairing_factor);
  for (const auto& p : out.pairs) {
    auto it = std::find_if(state.faces.begin(), state.faces.end(),
                           [&](const auto& f) { return f.track_id == p.face_track_id; });
    const bool next = p.gesture == Gesture::OpenPalm;
    if (it->obfuscated != next) out.transition = true;
    it->obfuscated = next;
    out.events.push_back({0, p.face_track_id, p.gesture, p.distance_px, next});
  }

  int regions = 0;
  for (const auto& f : state.faces) {
    if (std::find(seen_ids.begin(), seen_ids.end(), f.track_id) == seen_ids.end()) continue;
    regions += f.obfuscated;
    DetectionRow row;
    row.track_id = f.track_id;
    row.box2d = f.box2d;
    row.depth_z = f.depth_z;
    row.label = FaceLabel::Bystander;
    row.obfuscated = f.obfuscated;
    row.gt_person_id = f.gt_person_id;
    out.rows.push_back(row);
  }
  out.executed[Stage::Face] = int(dets.size());
  out.executed[Stage::Hand] = int(hands.size());
  out.executed[Stage::Gesture] = int(hands.size());
  out.executed[Stage::Transform] = regions;
  return out;
}

double intent_cost_proxy(const FrameLogEntry& e) {
  return e.module_time(Stage::Face) + e.module_time(Stage::Hand) + e.module_time(Stage::Gesture) +
         e.module_time(Stage::Transform);
}

}  // namespace petbench
