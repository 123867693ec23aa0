#include "petbench/implicit_pet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

namespace petbench {

std::string_view to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::BaselineOverlap: return "baseline";
    case PolicyKind::NPP: return "npp";
    case PolicyKind::KPP: return "kpp";
    case PolicyKind::CD: return "cd";
    case PolicyKind::Hybrid: return "hybrid";
  }
  return "baseline";
}

std::optional<PolicyKind> parse_policy_kind(std::string_view s) {
  for (PolicyKind k : {PolicyKind::BaselineOverlap, PolicyKind::NPP, PolicyKind::KPP, PolicyKind::CD,
                       PolicyKind::Hybrid})
    if (to_string(k) == s) return k;
  if (s == "overlap") return PolicyKind::BaselineOverlap;
  return std::nullopt;
}

Vec3 npp_predict(const TrackedFace& track) {
  const Vec3 p = track.box3d.center;
  if (!track.prev_center) return p;
  return p + (p - *track.prev_center);
}

double hybrid_score(double d_kpp, double d_cd, const AssociationPolicy& policy) {
  return policy.hybrid_w_kpp * d_kpp + policy.hybrid_w_cd * d_cd;
}

namespace {

Vec3 kpp_predict(const TrackedFace& track, double t_ms) {
  const double dt = (t_ms - track.last_update_ms) / 1000.0;
  if (!(dt > 0)) return track.kalman.position();
  return kalman_peek(track.kalman, dt);
}

std::optional<Vec3> predicted_center(const TrackedFace& track, PolicyKind kind, double t_ms) {
  switch (kind) {
    case PolicyKind::NPP: return npp_predict(track);
    case PolicyKind::KPP:
    case PolicyKind::Hybrid: return kpp_predict(track, t_ms);
    default: return std::nullopt;
  }
}

// A track is a candidate when the detection overlaps its last box or that
// box moved to the predicted center.
bool is_candidate(const TrackedFace& track, const Detection& det, const std::optional<Vec3>& predicted) {
  if (overlaps(track.box3d, det.box)) return true;
  if (!predicted) return false;
  Box3D moved = track.box3d;
  moved.center = *predicted;
  return overlaps(moved, det.box);
}

double distance(const TrackedFace& track, const Detection& det, const AssociationPolicy& policy,
                const std::optional<Vec3>& predicted) {
  const double d_cd = std::abs(det.box.center.z() - track.box3d.center.z());
  switch (policy.kind) {
    case PolicyKind::NPP:
    case PolicyKind::KPP: return (det.box.center - *predicted).norm();
    case PolicyKind::CD: return d_cd;
    case PolicyKind::Hybrid: return hybrid_score((det.box.center - *predicted).norm(), d_cd, policy);
    case PolicyKind::BaselineOverlap: break;
  }
  return 0;
}

Assignment baseline_associate(const std::vector<TrackedFace>& tracks, const std::vector<Detection>& dets) {
  Assignment a;
  std::vector<bool> used(tracks.size(), false);
  for (std::size_t d = 0; d < dets.size(); ++d) {
    bool matched = false;
    for (std::size_t i = 0; i < tracks.size(); ++i) {
      if (used[i] || !overlaps(tracks[i].box3d, dets[d].box)) continue;
      used[i] = true;
      a.matches.emplace_back(tracks[i].track_id, d);
      matched = true;
      break;
    }
    if (!matched) a.unmatched_detections.push_back(d);
  }
  for (std::size_t i = 0; i < tracks.size(); ++i)
    if (!used[i]) a.unmatched_tracks.push_back(tracks[i].track_id);
  return a;
}

}  // namespace

Assignment associate(const std::vector<TrackedFace>& tracks_in, const std::vector<Detection>& dets,
                     const AssociationPolicy& policy, double t_ms) {
  std::vector<TrackedFace> tracks = tracks_in;
  std::sort(tracks.begin(), tracks.end(), [](const auto& a, const auto& b) { return a.track_id < b.track_id; });
  if (policy.kind == PolicyKind::BaselineOverlap) return baseline_associate(tracks, dets);

  std::vector<std::tuple<double, int, std::size_t, std::size_t>> pairs;  // score, track_id, track idx, det idx
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    const auto predicted = predicted_center(tracks[i], policy.kind, t_ms);
    for (std::size_t d = 0; d < dets.size(); ++d) {
      if (!is_candidate(tracks[i], dets[d], predicted)) continue;
      pairs.emplace_back(distance(tracks[i], dets[d], policy, predicted), tracks[i].track_id, i, d);
    }
  }
  std::sort(pairs.begin(), pairs.end());

  Assignment a;
  std::vector<bool> track_used(tracks.size(), false), det_used(dets.size(), false);
  for (const auto& [score, id, i, d] : pairs) {
    if (track_used[i] || det_used[d]) continue;
    track_used[i] = det_used[d] = true;
    a.matches.emplace_back(id, d);
  }
  std::sort(a.matches.begin(), a.matches.end(), [](const auto& x, const auto& y) { return x.second < y.second; });
  for (std::size_t d = 0; d < dets.size(); ++d)
    if (!det_used[d]) a.unmatched_detections.push_back(d);
  for (std::size_t i = 0; i < tracks.size(); ++i)
    if (!track_used[i]) a.unmatched_tracks.push_back(tracks[i].track_id);
  return a;
}

namespace {

void update_gaze(ImplicitState& state, const std::optional<GazeSample>& gaze, const ImplicitConfig& cfg) {
  TrackedFace* nearest = nullptr;
  double best = std::numeric_limits<double>::infinity();
  if (gaze) {
    for (auto& tr : state.tracks) {
      auto s = ray_box_entry(gaze->origin, gaze->direction, tr.box3d);
      if (s && *s < best) {
        best = *s;
        nearest = &tr;
      }
    }
  }
  for (auto& tr : state.tracks) {
    const bool hit = &tr == nearest;
    tr.gaze_history.push_back(hit);
    tr.gaze_hits += hit;
    while (int(tr.gaze_history.size()) > cfg.gaze_window) {
      tr.gaze_hits -= tr.gaze_history.front();
      tr.gaze_history.pop_front();
    }
    tr.label = tr.gaze_hits > cfg.subject_threshold ? FaceLabel::Subject : FaceLabel::Bystander;
  }
}

double measurement_noise_m(const ImplicitConfig& cfg, double depth) {
  const double r = cfg.image_width_px > 0 ? cfg.noise_sigma_px * depth / cfg.image_width_px : 0.0;
  return std::max(r, 1e-3);
}

void run_inference(ImplicitState& state, double t_ms, const std::vector<Detection>& dets, const ImplicitConfig& cfg) {
  const Assignment a = associate(state.tracks, dets, cfg.policy, t_ms);
  auto find = [&](int id) {
    return std::find_if(state.tracks.begin(), state.tracks.end(), [&](const auto& t) { return t.track_id == id; });
  };
  for (const auto& [id, d] : a.matches) {
    auto& tr = *find(id);
    const Detection& det = dets[d];
    tr.prev_center = tr.box3d.center;
    const double dt = (t_ms - tr.last_update_ms) / 1000.0;
    if (dt > 0) kalman_predict(tr.kalman, dt);
    kalman_update(tr.kalman, det.box.center);
    tr.box3d = det.box;
    tr.box2d = det.box2d;
    tr.gt_person_id = det.gt_person_id;
    tr.ttl_frames = cfg.ttl_init;
    tr.last_update_ms = t_ms;
  }
  for (int id : a.unmatched_tracks) --find(id)->ttl_frames;
  std::erase_if(state.tracks, [](const auto& t) { return t.ttl_frames <= 0; });
  for (std::size_t d : a.unmatched_detections) {
    const Detection& det = dets[d];
    TrackedFace tr;
    tr.track_id = state.next_track_id++;
    tr.box3d = det.box;
    tr.box2d = det.box2d;
    tr.ttl_frames = cfg.ttl_init;
    tr.kalman = KalmanState::at(det.box.center, cfg.kalman_q, measurement_noise_m(cfg, det.box.center.z()));
    tr.gt_person_id = det.gt_person_id;
    tr.last_update_ms = t_ms;
    state.tracks.push_back(std::move(tr));
  }
}

}  // namespace

ImplicitFrameOutput implicit_step(ImplicitState& state, double t_ms, const std::vector<Detection>& detections,
                                  const std::optional<GazeSample>& gaze, const ImplicitConfig& cfg) {
  ImplicitFrameOutput out;
  update_gaze(state, gaze, cfg);

  ++state.frame_counter;
  if (state.frame_counter >= cfg.sampling_interval) {
    state.frame_counter = 0;
    out.inference_ran = true;
    out.executed[Stage::Face] = int(detections.size());
    run_inference(state, t_ms, detections, cfg);
  }

  int regions = 0;
  for (auto& tr : state.tracks) {
    const bool obf = tr.label == FaceLabel::Bystander;
    tr.obfuscated_last_frame = obf;
    regions += obf;
    DetectionRow row;
    row.track_id = tr.track_id;
    row.box2d = tr.box2d;
    row.depth_z = tr.box3d.center.z();
    row.label = tr.label;
    row.obfuscated = obf;
    row.gt_person_id = tr.gt_person_id;
    out.rows.push_back(row);
  }
  if (regions > 0) out.executed[Stage::Transform] = regions;
  return out;
}

}  // namespace petbench
