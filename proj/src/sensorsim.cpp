#include "petbench/sensorsim.hpp"

#include <algorithm>
#include <random>

namespace petbench {

namespace {

enum class Stream : std::uint64_t { Face = 1, Order = 2, HandEvent = 3, Hand = 4 };

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::mt19937_64 stream_rng(const PerceptionConfig& cfg, Stream s, std::uint64_t a, std::uint64_t b = 0) {
  return std::mt19937_64(hash_seed(cfg.seed, static_cast<std::uint64_t>(s), a, b));
}

Box2D jitter(const Box2D& r, double sigma, std::mt19937_64& rng) {
  if (sigma <= 0) return r;
  std::normal_distribution<double> n(0.0, sigma);
  Box2D out = r;
  out.x += n(rng);
  out.y += n(rng);
  out.w = std::max(1.0, out.w + n(rng));
  out.h = std::max(1.0, out.h + n(rng));
  return out;
}

bool missed(double miss_prob, std::mt19937_64& rng) {
  if (miss_prob <= 0) return false;
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < miss_prob;
}

}  // namespace

std::uint64_t hash_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) {
  std::uint64_t h = splitmix(a);
  h = splitmix(h ^ b);
  h = splitmix(h ^ c);
  return splitmix(h ^ d);
}

CameraView CameraView::identity(Size2 stimulus) {
  return {stimulus, {0, 0}, {double(stimulus.width), double(stimulus.height)}};
}

Box2D CameraView::to_camera(const Box2D& r, Size2 stimulus) const {
  const double sx = (screen_bottom_right.x - screen_top_left.x) / stimulus.width;
  const double sy = (screen_bottom_right.y - screen_top_left.y) / stimulus.height;
  return {screen_top_left.x + r.x * sx, screen_top_left.y + r.y * sy, r.w * sx, r.h * sy};
}

PerceptionConfig PerceptionConfig::perfect(std::uint64_t seed) {
  PerceptionConfig c;
  c.noise_sigma_px = 0;
  c.miss_prob = 0;
  c.seed = seed;
  return c;
}

GazeSample gaze_at(const Scenario& s, std::int64_t t_ms, const Pose& head) {
  GazeSample g;
  g.origin = head.position;
  g.direction = head.forward();
  for (const auto& d : s.gaze_schedule) {
    if (t_ms < d.t_start_ms || t_ms > d.t_end_ms || !d.target_person_id) continue;
    const PersonTrack* p = s.person(*d.target_person_id);
    if (!p) continue;
    if (auto b = sample_box(*p, t_ms)) {
      const Vec3 v = b->center - head.position;
      if (v.norm() > 0) g.direction = v.normalized();
    }
    break;
  }
  return g;
}

bool ray_hits_box(const GazeSample& g, const Box3D& b) {
  return ray_box_entry(g.origin, g.direction, b).has_value();
}

std::vector<Detection> detect_faces(const Scenario& s, std::int64_t t_ms, const PerceptionConfig& cfg,
                                    const CameraView& view) {
  std::vector<Detection> out;
  for (const auto& v : visible_people(s, t_ms, cfg.occlusion_iou)) {
    if (v.occluded && cfg.drop_occluded) continue;
    auto rng = stream_rng(cfg, Stream::Face, std::uint64_t(t_ms), std::uint64_t(v.person_id));
    if (missed(cfg.miss_prob, rng)) continue;
    const Box2D stim = jitter(project(v.box, s.stimulus_size), cfg.noise_sigma_px, rng);
    const Box2D cam = clamp_to(view.to_camera(stim, s.stimulus_size), view.camera_size);
    if (cam.w <= 0 || cam.h <= 0) continue;
    Detection d;
    d.box = unproject(stim, v.box.center.z(), v.box.extents.z(), s.stimulus_size);
    d.box2d = cam;
    d.gt_person_id = v.person_id;
    out.push_back(d);
  }
  auto order = stream_rng(cfg, Stream::Order, std::uint64_t(t_ms));
  std::shuffle(out.begin(), out.end(), order);
  for (std::size_t i = 0; i < out.size(); ++i) out[i].det_id = int(i);
  return out;
}

Box2D hand_box_below(const Box2D& f) {
  const double w = 0.8 * f.w, h = 0.8 * f.h;
  return {f.cx() - w / 2, f.y + f.h + 0.25 * f.h, w, h};
}

std::vector<HandObservation> detect_hands(const Scenario& s, std::int64_t t_ms, const PerceptionConfig& cfg,
                                          const CameraView& view) {
  std::vector<HandObservation> out;
  const auto people = visible_people(s, t_ms, cfg.occlusion_iou);
  for (std::size_t i = 0; i < s.intent_events.size(); ++i) {
    const auto& e = s.intent_events[i];
    if (t_ms < e.t_ms || t_ms > e.end_ms()) continue;
    auto it = std::find_if(people.begin(), people.end(), [&](const VisiblePerson& v) { return v.person_id == e.person_id; });
    if (it == people.end() || it->occluded) continue;
    auto rng = stream_rng(cfg, Stream::Hand, std::uint64_t(t_ms), std::uint64_t(i));
    if (missed(cfg.miss_prob, rng)) continue;
    Box2D hand = hand_box_below(project(it->box, s.stimulus_size));
    if (cfg.hand_jitter_px > 0) {
      auto ev_rng = stream_rng(cfg, Stream::HandEvent, std::uint64_t(i));
      hand.x += std::normal_distribution<double>(0.0, cfg.hand_jitter_px)(ev_rng);
    }
    hand = jitter(hand, cfg.noise_sigma_px, rng);
    const Box2D cam = clamp_to(view.to_camera(hand, s.stimulus_size), view.camera_size);
    if (cam.w <= 0 || cam.h <= 0) continue;
    out.push_back({cam, e.gesture, e.person_id});
  }
  return out;
}

}  // namespace petbench
