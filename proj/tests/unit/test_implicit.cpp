#include <algorithm>
#include <map>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "petbench/implicit_pet.hpp"

using namespace petbench;
using testutil::box_at;

namespace {

TrackedFace track(int id, const Box3D& b, std::optional<Vec3> prev = std::nullopt) {
  TrackedFace t;
  t.track_id = id;
  t.box3d = b;
  t.prev_center = prev;
  t.kalman = KalmanState::at(b.center);
  return t;
}

Detection det(int gt, const Box3D& b) {
  Detection d;
  d.gt_person_id = gt;
  d.box = b;
  d.box2d = project(b, {640, 360});
  return d;
}

ImplicitConfig config(PolicyKind kind, int interval = 0) {
  ImplicitConfig c;
  c.sampling_interval = interval;
  c.policy.kind = kind;
  return c;
}

std::map<int, int> track_to_gt(const Assignment& a, const std::vector<Detection>& dets) {
  std::map<int, int> m;
  for (auto [id, d] : a.matches) m[id] = dets[d].gt_person_id;
  return m;
}

}  // namespace

TEST_CASE("npp_predict extrapolates one step") {
  CHECK((npp_predict(track(1, box_at(0.1, 0, 2), Vec3(0, 0, 2))).array() - Vec3(0.2, 0, 2).array()).abs().maxCoeff() <
        1e-12);
  CHECK(npp_predict(track(1, box_at(0.1, 0, 2), Vec3(0.1, 0, 2))) == Vec3(0.1, 0, 2));
  CHECK(npp_predict(track(1, box_at(0.1, 0, 2))) == Vec3(0.1, 0, 2));
}

TEST_CASE("hybrid score weights") {
  CHECK(hybrid_score(1.0, 0.5) == doctest::Approx(0.6));
  AssociationPolicy p;
  p.hybrid_w_kpp = 1;
  p.hybrid_w_cd = 0;
  CHECK(hybrid_score(1.0, 0.5, p) == doctest::Approx(1.0));
}

TEST_CASE("a single overlapping detection matches under every policy") {
  const std::vector<TrackedFace> tracks{track(1, box_at(0, 0, 2))};
  const std::vector<Detection> dets{det(1, box_at(0.05, 0, 2))};
  for (auto k : {PolicyKind::BaselineOverlap, PolicyKind::NPP, PolicyKind::KPP, PolicyKind::CD, PolicyKind::Hybrid}) {
    AssociationPolicy p;
    p.kind = k;
    const Assignment a = associate(tracks, dets, p, 33);
    REQUIRE(a.matches.size() == 1);
    CHECK(a.matches[0].first == 1);
    CHECK(a.unmatched_detections.empty());
    CHECK(a.unmatched_tracks.empty());
  }
}

TEST_CASE("baseline takes the first overlapping track in arrival order") {
  // both detections overlap both tracks; detection order decides
  const std::vector<TrackedFace> tracks{track(1, box_at(0, 0, 2, 0.4)), track(2, box_at(0.05, 0, 2.1, 0.4))};
  const std::vector<Detection> dets{det(2, box_at(0.05, 0, 2.1, 0.4)), det(1, box_at(0, 0, 2, 0.4))};
  AssociationPolicy p;
  const auto m = track_to_gt(associate(tracks, dets, p), dets);
  CHECK(m.at(1) == 2);  // swapped
  p.kind = PolicyKind::NPP;
  const auto good = track_to_gt(associate(tracks, dets, p), dets);
  CHECK(good.at(1) == 1);
  CHECK(good.at(2) == 2);
}

TEST_CASE("CD prefers the detection at the track's depth") {
  const std::vector<TrackedFace> tracks{track(1, box_at(0, 0, 2.0, 0.5)), track(2, box_at(0, 0, 2.4, 0.5))};
  const std::vector<Detection> dets{det(20, box_at(0, 0, 2.4, 0.5)), det(10, box_at(0, 0, 2.0, 0.5))};
  AssociationPolicy p;
  p.kind = PolicyKind::CD;
  const auto m = track_to_gt(associate(tracks, dets, p), dets);
  CHECK(m.at(1) == 10);
  CHECK(m.at(2) == 20);
}

TEST_CASE("greedy association matches an independent pick-the-minimum oracle") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> U(-0.3, 0.3);
  int compared = 0;
  for (int n = 0; n < 400; ++n) {
    const bool use_cd = n % 2;
    std::vector<TrackedFace> tracks;
    std::vector<Detection> dets;
    const int nt = 1 + int(rng() % 4), nd = 1 + int(rng() % 4);
    for (int i = 0; i < nt; ++i) {
      const Vec3 c(U(rng), U(rng), 2 + U(rng));
      tracks.push_back(track(i + 1, box_at(c.x(), c.y(), c.z(), 0.25), c - Vec3(U(rng), 0, 0) * 0.1));
    }
    for (int j = 0; j < nd; ++j) dets.push_back(det(j, box_at(U(rng), U(rng), 2 + U(rng), 0.25)));
    std::shuffle(tracks.begin(), tracks.end(), rng);

    // oracle: repeatedly take the remaining candidate pair with minimal
    // (distance, track id, detection index)
    std::vector<std::pair<int, std::size_t>> expect;
    std::vector<bool> tu(nt + 1, false), du(nd, false);
    while (true) {
      std::optional<std::tuple<double, int, std::size_t>> best;
      for (const auto& t : tracks) {
        if (tu[t.track_id]) continue;
        const Vec3 pred = t.box3d.center + (t.box3d.center - *t.prev_center);
        Box3D moved = t.box3d;
        moved.center = pred;
        for (std::size_t d = 0; d < dets.size(); ++d) {
          if (du[d] || !(overlaps(t.box3d, dets[d].box) || (!use_cd && overlaps(moved, dets[d].box)))) continue;
          const double dist = use_cd ? std::abs(dets[d].box.center.z() - t.box3d.center.z())
                                     : (dets[d].box.center - pred).norm();
          const auto key = std::make_tuple(dist, t.track_id, d);
          if (!best || key < *best) best = key;
        }
      }
      if (!best) break;
      tu[std::get<1>(*best)] = true;
      du[std::get<2>(*best)] = true;
      expect.emplace_back(std::get<1>(*best), std::get<2>(*best));
    }
    AssociationPolicy p;
    p.kind = use_cd ? PolicyKind::CD : PolicyKind::NPP;
    auto got = associate(tracks, dets, p).matches;
    std::sort(got.begin(), got.end());
    std::sort(expect.begin(), expect.end());
    CHECK(got == expect);
    compared += int(!expect.empty());
  }
  CHECK(compared > 200);
}

TEST_CASE("non-baseline association is invariant to detection order") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> U(-0.3, 0.3);
  for (int n = 0; n < 200; ++n) {
    std::vector<TrackedFace> tracks;
    std::vector<Detection> dets;
    for (int i = 0; i < 3; ++i) {
      const Vec3 c(U(rng), U(rng), 2 + U(rng));
      tracks.push_back(track(i + 1, box_at(c.x(), c.y(), c.z(), 0.3), c));
      dets.push_back(det(i + 1, box_at(c.x() + 0.2 * U(rng), c.y(), c.z() + 0.2 * U(rng), 0.3)));
    }
    for (auto k : {PolicyKind::NPP, PolicyKind::KPP, PolicyKind::CD, PolicyKind::Hybrid}) {
      AssociationPolicy p;
      p.kind = k;
      const auto a = track_to_gt(associate(tracks, dets, p, 33), dets);
      auto shuffled = dets;
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      CHECK(track_to_gt(associate(tracks, shuffled, p, 33), shuffled) == a);
    }
  }
}

TEST_CASE("KPP keeps identities through a crossing that fools the overlap baseline") {
  // two faces moving toward each other at different depths; frames at 30 Hz
  auto run = [](PolicyKind kind) {
    ImplicitState st;
    const ImplicitConfig cfg = config(kind);
    std::map<int, int> first_owner;
    bool swapped = false;
    for (int f = 0; f < 60; ++f) {
      const double t = f * 33.0;
      const double x = -0.6 + 0.02 * f;
      std::vector<Detection> dets{det(1, box_at(x, 0, 2.0)), det(2, box_at(-x, 0, 2.15))};
      if (f % 2) std::swap(dets[0], dets[1]);
      const auto out = implicit_step(st, t, dets, std::nullopt, cfg);
      for (const auto& r : out.rows) {
        auto [it, fresh] = first_owner.emplace(r.track_id, r.gt_person_id);
        if (!fresh && it->second != r.gt_person_id) swapped = true;
      }
    }
    return swapped;
  };
  CHECK_FALSE(run(PolicyKind::KPP));
  CHECK_FALSE(run(PolicyKind::Hybrid));
  CHECK(run(PolicyKind::BaselineOverlap));
}

TEST_CASE("with N=8 detection runs on frames 8, 16, 24") {
  ImplicitState st;
  std::vector<int> frames;
  for (int f = 1; f <= 30; ++f)
    if (implicit_step(st, f * 33.0, {}, std::nullopt, config(PolicyKind::KPP, 8)).inference_ran) frames.push_back(f);
  CHECK(frames == std::vector<int>{8, 16, 24});
}

TEST_CASE("inference runs once every max(N, 1) frames") {
  for (int n : {0, 1, 2, 4, 8}) {
    ImplicitState st;
    int ran = 0;
    for (int f = 0; f < 90; ++f) ran += implicit_step(st, f * 33.0, {}, std::nullopt, config(PolicyKind::KPP, n)).inference_ran;
    CHECK(ran == 90 / std::max(1, n));
  }
}

TEST_CASE("gaze promotes a face to subject and stops its obfuscation") {
  ImplicitState st;
  const ImplicitConfig cfg = config(PolicyKind::KPP);
  const std::vector<Detection> dets{det(1, box_at(0, 0, 2))};
  GazeSample g;
  implicit_step(st, 0, dets, std::nullopt, cfg);
  ImplicitFrameOutput out;
  for (int f = 1; f <= cfg.subject_threshold; ++f) {
    out = implicit_step(st, f * 33.0, dets, g, cfg);
    CHECK(out.rows.at(0).label == FaceLabel::Bystander);
    CHECK(out.rows.at(0).obfuscated);
  }
  out = implicit_step(st, 31 * 33.0, dets, g, cfg);
  CHECK(out.rows.at(0).label == FaceLabel::Subject);
  CHECK_FALSE(out.rows.at(0).obfuscated);
  CHECK(out.executed.count(Stage::Transform) == 0);
}

TEST_CASE("bystanders are obfuscated on every frame, including skipped ones") {
  ImplicitState st;
  const ImplicitConfig cfg = config(PolicyKind::NPP, 4);
  for (int f = 0; f < 20; ++f) {
    const auto out = implicit_step(st, f * 33.0, {det(1, box_at(0, 0, 2))}, std::nullopt, cfg);
    for (const auto& r : out.rows) CHECK(r.obfuscated);
    if (!out.rows.empty()) CHECK(out.executed.at(Stage::Transform) == int(out.rows.size()));
  }
}

TEST_CASE("a face missing for ttl+1 rounds comes back with a new id") {
  ImplicitState st;
  const ImplicitConfig cfg = config(PolicyKind::BaselineOverlap);
  const std::vector<Detection> seen{det(1, box_at(0, 0, 2))};
  int f = 0;
  auto step = [&](const std::vector<Detection>& d) { return implicit_step(st, 33.0 * f++, d, std::nullopt, cfg); };
  const int id = step(seen).rows.at(0).track_id;
  for (int i = 0; i < cfg.ttl_init - 1; ++i) CHECK(step({}).rows.size() == 1);
  CHECK(step({}).rows.empty());
  const auto back = step(seen);
  REQUIRE(back.rows.size() == 1);
  CHECK(back.rows[0].track_id != id);
}

TEST_CASE("policy names") {
  CHECK(parse_policy_kind("overlap") == PolicyKind::BaselineOverlap);
  CHECK(parse_policy_kind("hybrid") == PolicyKind::Hybrid);
  CHECK_FALSE(parse_policy_kind("hungarian"));
  CHECK(to_string(PolicyKind::KPP) == "kpp");
}
