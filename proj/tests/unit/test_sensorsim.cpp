#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "petbench/sensorsim.hpp"

using namespace petbench;
using testutil::box_at;
using testutil::make_scenario;
using testutil::still_person;

namespace {

Scenario gaze_scenario(double x, double z, std::optional<int> target) {
  Scenario s = make_scenario({still_person(1, x, z, 0, 1000)});
  s.gaze_schedule = {{0, 500, target}};
  return s;
}

}  // namespace

TEST_CASE("gaze_at points at the targeted person's center") {
  const Pose head;
  const GazeSample g = gaze_at(gaze_scenario(0, 2, 1), 100, head);
  CHECK((g.direction - Vec3(0, 0, 1)).norm() < 1e-12);

  const GazeSample diag = gaze_at(gaze_scenario(1, 1, 1), 100, head);
  CHECK((diag.direction - Vec3(1, 0, 1) / std::sqrt(2.0)).norm() < 1e-12);

  // outside every directive: forward axis
  const GazeSample idle = gaze_at(gaze_scenario(1, 1, 1), 800, head);
  CHECK((idle.direction - Vec3(0, 0, 1)).norm() < 1e-12);
}

TEST_CASE("ray_hits_box basic cases") {
  GazeSample g;
  CHECK(ray_hits_box(g, box_at(0, 0, 2)));
  CHECK_FALSE(ray_hits_box(g, box_at(5, 0, 2)));
  g.origin = {0.1, 0, 0};
  CHECK(ray_hits_box(g, box_at(0, 0, 2)));
}

TEST_CASE("detect_faces with a perfect oracle returns exact boxes") {
  const Scenario s = make_scenario({still_person(1, -0.5, 2, 0, 1000), still_person(2, 0.5, 2, 0, 1000)});
  const CameraView view = CameraView::identity(s.stimulus_size);
  auto dets = detect_faces(s, 100, PerceptionConfig::perfect(1), view);
  REQUIRE(dets.size() == 2);
  for (const auto& d : dets) {
    const Box3D truth = *sample_box(*s.person(d.gt_person_id), 100);
    CHECK((d.box.center - truth.center).norm() == 0.0);
    const Box2D p = project(truth, s.stimulus_size);
    CHECK(d.box2d.x == doctest::Approx(p.x));
    CHECK(d.box2d.w == doctest::Approx(p.w));
  }
}

TEST_CASE("detect_faces drops occluded people and honors miss_prob") {
  PersonTrack far_p = still_person(2, 0, 3, 0, 1000);
  for (auto& kf : far_p.keyframes) kf.box.extents = {0.3, 0.3, 0.3};
  const Scenario s = make_scenario({still_person(1, 0, 2, 0, 1000), far_p});
  const CameraView view = CameraView::identity(s.stimulus_size);
  auto dets = detect_faces(s, 0, PerceptionConfig::perfect(), view);
  REQUIRE(dets.size() == 1);
  CHECK(dets[0].gt_person_id == 1);

  PerceptionConfig always_miss = PerceptionConfig::perfect();
  always_miss.miss_prob = 1.0;
  CHECK(detect_faces(s, 0, always_miss, view).empty());
}

TEST_CASE("detect_hands follows the intent script") {
  Scenario s = make_scenario({still_person(1, 0, 2, 0, 2000)}, 2000);
  s.intent_events = {{1, 500, Gesture::OpenPalm, 300}};
  const CameraView view = CameraView::identity(s.stimulus_size);
  const auto cfg = PerceptionConfig::perfect();
  CHECK(detect_hands(s, 100, cfg, view).empty());
  const auto hands = detect_hands(s, 600, cfg, view);
  REQUIRE(hands.size() == 1);
  CHECK(hands[0].gesture == Gesture::OpenPalm);
  const Box2D face = project(*sample_box(s.people[0], 600), s.stimulus_size);
  CHECK(hands[0].box2d.y > face.y + face.h);
  CHECK(hands[0].box2d.cx() == doctest::Approx(face.cx()));

  // same event, person hidden behind a nearer one with the same footprint
  PersonTrack blocker = still_person(9, 0, 1.0, 0, 2000);
  for (auto& kf : blocker.keyframes) kf.box.extents = {0.1, 0.1, 0.1};
  s.people.push_back(blocker);
  bool occluded = false;
  for (const auto& v : visible_people(s, 600))
    if (v.person_id == 1) occluded = v.occluded;
  REQUIRE(occluded);
  CHECK(detect_hands(s, 600, cfg, view).empty());
}

TEST_CASE("perception is a pure function of its inputs") {
  const Scenario s = gen_edge_case(EdgeCaseKind::Overlap, 2);
  const CameraView view = CameraView::identity(s.stimulus_size);
  PerceptionConfig cfg;
  cfg.seed = 11;
  for (std::int64_t t = 0; t < s.duration_ms; t += 97) {
    const auto a = detect_faces(s, t, cfg, view);
    const auto b = detect_faces(s, t, cfg, view);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].gt_person_id == b[i].gt_person_id);
      CHECK(a[i].box2d.x == b[i].box2d.x);
    }
  }
}

TEST_CASE("hash_seed is deterministic and input-sensitive") {
  CHECK(hash_seed(1, 2) == hash_seed(1, 2));
  CHECK(hash_seed(1, 2) != hash_seed(2, 1));
  CHECK(hash_seed(0) != hash_seed(1));
}
