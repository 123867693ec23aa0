#include "doctest.h"
#include "helpers.hpp"
#include "petbench/explicit_pet.hpp"

using namespace petbench;
using testutil::box_at;

namespace {

ExplicitFaceState face(int id, Box2D b) {
  ExplicitFaceState f;
  f.track_id = id;
  f.box2d = b;
  return f;
}

HandObservation hand(Box2D b, Gesture g) {
  HandObservation h;
  h.box2d = b;
  h.gesture = g;
  return h;
}

Detection det(int gt, double x) {
  Detection d;
  d.gt_person_id = gt;
  d.box = box_at(x, 0, 2);
  d.box2d = project(d.box, {640, 360});
  return d;
}

}  // namespace

TEST_CASE("hand_face_map pairs by nearest center within twice the diagonal") {
  const Box2D fa{100, 100, 40, 40}, fb{300, 100, 40, 40};
  const std::vector<ExplicitFaceState> faces{face(1, fa), face(2, fb)};

  auto pairs = hand_face_map(faces, {hand(hand_box_below(fa), Gesture::OpenPalm)});
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0].face_track_id == 1);

  // far from both faces: 2 x diagonal is about 113 px
  CHECK(hand_face_map(faces, {hand({200, 300, 20, 20}, Gesture::OpenPalm)}).empty());

  // exactly between the two faces
  pairs = hand_face_map({face(5, fb), face(3, fa)}, {hand({200, 100, 40, 40}, Gesture::Victory)});
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0].face_track_id == 3);

  // gesture None never pairs, several hands may share a face
  CHECK(hand_face_map(faces, {hand(hand_box_below(fa), Gesture::None)}).empty());
  CHECK(hand_face_map(faces, {hand(hand_box_below(fa), Gesture::OpenPalm), hand(hand_box_below(fa), Gesture::Victory)})
            .size() == 2);
}

TEST_CASE("OpenPalm obfuscates, Victory reveals, state persists in between") {
  ExplicitState st;
  const std::vector<Detection> one{det(1, 0)};
  const Box2D below = hand_box_below(one[0].box2d);

  auto out = explicit_step(st, one, {});
  REQUIRE(out.rows.size() == 1);
  CHECK_FALSE(out.rows[0].obfuscated);
  const int id = out.rows[0].track_id;

  out = explicit_step(st, one, {hand(below, Gesture::OpenPalm)});
  CHECK(out.transition);
  REQUIRE(out.events.size() == 1);
  CHECK(out.events[0].new_state);
  CHECK(out.rows[0].obfuscated);

  for (int i = 0; i < 10; ++i) {
    out = explicit_step(st, one, {});
    CHECK_FALSE(out.transition);
    CHECK(out.rows[0].obfuscated);
    CHECK(out.rows[0].track_id == id);
  }
  out = explicit_step(st, one, {hand(below, Gesture::Victory)});
  CHECK(out.transition);
  CHECK_FALSE(out.rows[0].obfuscated);
  // repeating the same gesture is not a transition
  out = explicit_step(st, one, {hand(below, Gesture::Victory)});
  CHECK_FALSE(out.transition);
  CHECK(out.events.size() == 1);
}

TEST_CASE("a gesture beside one of two faces toggles only that face") {
  ExplicitState st;
  const std::vector<Detection> two{det(1, -0.5), det(2, 0.5)};
  explicit_step(st, two, {});
  const auto out = explicit_step(st, two, {hand(hand_box_below(two[0].box2d), Gesture::OpenPalm)});
  REQUIRE(out.rows.size() == 2);
  for (const auto& r : out.rows) CHECK(r.obfuscated == (r.gt_person_id == 1));
}

TEST_CASE("all four stages run every frame with their unit counts") {
  ExplicitState st;
  const std::vector<Detection> two{det(1, -0.5), det(2, 0.5)};
  auto out = explicit_step(st, two, {hand(hand_box_below(two[1].box2d), Gesture::OpenPalm)});
  CHECK(out.executed.at(Stage::Face) == 2);
  CHECK(out.executed.at(Stage::Hand) == 1);
  CHECK(out.executed.at(Stage::Gesture) == 1);
  CHECK(out.executed.at(Stage::Transform) == 1);
  out = explicit_step(st, {}, {});
  for (Stage s : {Stage::Face, Stage::Hand, Stage::Gesture, Stage::Transform}) CHECK(out.executed.count(s) == 1);
  CHECK(out.executed.count(Stage::Marker) == 0);
}

TEST_CASE("an unmatched face keeps its id and state for a few frames") {
  ExplicitState st;
  const std::vector<Detection> one{det(1, 0)};
  ExplicitConfig cfg;
  explicit_step(st, one, {hand(hand_box_below(one[0].box2d), Gesture::OpenPalm)}, cfg);
  const int id = st.faces.at(0).track_id;
  for (int i = 0; i < cfg.face_keep_frames; ++i) explicit_step(st, {}, {}, cfg);
  auto out = explicit_step(st, one, {}, cfg);
  CHECK(out.rows.at(0).track_id == id);
  CHECK(out.rows.at(0).obfuscated);

  for (int i = 0; i <= cfg.face_keep_frames; ++i) explicit_step(st, {}, {}, cfg);
  out = explicit_step(st, one, {}, cfg);
  CHECK(out.rows.at(0).track_id != id);
  CHECK_FALSE(out.rows.at(0).obfuscated);
}

TEST_CASE("intent cost proxy sums the four perception stages") {
  FrameLogEntry f;
  f.module_times_ms = {{Stage::Face, 50}, {Stage::Hand, 30}, {Stage::Gesture, 20}, {Stage::Transform, 10},
                       {Stage::Marker, 99}};
  CHECK(intent_cost_proxy(f) == doctest::Approx(110));
  CHECK(intent_cost_proxy(FrameLogEntry{}) == 0);
}
