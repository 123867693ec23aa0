#include "doctest.h"
#include "helpers.hpp"
#include "petbench/errors.hpp"
#include "petbench/scenario.hpp"

using namespace petbench;
using testutil::box_at;
using testutil::make_scenario;
using testutil::still_person;

TEST_CASE("sample_box interpolates linearly between keyframes") {
  PersonTrack p;
  p.person_id = 1;
  p.keyframes = {{0, box_at(-0.5, 0, 2)}, {1000, box_at(0.5, 0, 2)}};
  p.visible_start_ms = 0;
  p.visible_end_ms = 1000;
  auto mid = sample_box(p, 500);
  REQUIRE(mid);
  CHECK(mid->center.x() == doctest::Approx(0.0));
  auto at_kf = sample_box(p, 1000);
  REQUIRE(at_kf);
  CHECK(at_kf->center.x() == 0.5);
  CHECK_FALSE(sample_box(p, -1));
  CHECK_FALSE(sample_box(p, 1001));
}

TEST_CASE("visible_people marks the farther of two identical footprints occluded") {
  PersonTrack near_p, far_p;
  near_p.person_id = 1;
  near_p.keyframes = {{0, box_at(0, 0, 2.0, 0.2)}, {1000, box_at(0, 0, 2.0, 0.2)}};
  near_p.visible_end_ms = 1000;
  far_p.person_id = 2;
  far_p.keyframes = {{0, box_at(0, 0, 3.0, 0.3)}, {1000, box_at(0, 0, 3.0, 0.3)}};
  far_p.visible_end_ms = 1000;
  const auto v = visible_people(make_scenario({near_p, far_p}), 500);
  REQUIRE(v.size() == 2);
  for (const auto& vp : v) CHECK(vp.occluded == (vp.person_id == 2));

  const auto apart = visible_people(make_scenario({still_person(1, -0.5, 2, 0, 1000), still_person(2, 0.5, 2, 0, 1000)}), 0);
  REQUIRE(apart.size() == 2);
  CHECK_FALSE(apart[0].occluded);
  CHECK_FALSE(apart[1].occluded);
}

TEST_CASE("validate rejects duplicate ids and unordered keyframes") {
  Scenario dup = make_scenario({still_person(1, 0, 2, 0, 1000), still_person(1, 1, 2, 0, 1000)});
  CHECK_THROWS_WITH_AS(validate(dup), doctest::Contains("duplicate person id"), ValidationError);

  PersonTrack p = still_person(1, 0, 2, 0, 1000);
  std::swap(p.keyframes[0], p.keyframes[1]);
  CHECK_THROWS_AS(validate(make_scenario({p})), ValidationError);
}

TEST_CASE("scenario text round-trips through write and parse") {
  for (auto kind : {EdgeCaseKind::Overlap, EdgeCaseKind::CrossSlow, EdgeCaseKind::CrossFast}) {
    const Scenario s = gen_edge_case(kind, 3);
    const Scenario back = parse_scenario(write_scenario(s));
    CHECK(back.people.size() == 2);
    CHECK(write_scenario(back) == write_scenario(s));
  }
  const Scenario intent = gen_intent(2, 4);
  CHECK(write_scenario(parse_scenario(write_scenario(intent))) == write_scenario(intent));
}

TEST_CASE("parse errors carry the offending line") {
  const std::string text = "[scenario]\nid x\nduration_ms 100\nframe_rate_hz 30\n\n[person 1]\nkf 0 0 0 2 0.2 0.2\n";
  try {
    parse_scenario(text);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 7);
  }
  CHECK_THROWS_AS(parse_scenario("[scenario]\nid x\nduration_ms 1\nframe_rate_hz 30\n[bogus]\n"), ParseError);
  CHECK_THROWS_AS(parse_scenario("id x\n"), ParseError);
}

TEST_CASE("generators are deterministic per seed") {
  CHECK(write_scenario(gen_edge_case(EdgeCaseKind::CrossFast, 1)) ==
        write_scenario(gen_edge_case(EdgeCaseKind::CrossFast, 1)));
  CHECK(write_scenario(gen_edge_case(EdgeCaseKind::CrossFast, 1)) !=
        write_scenario(gen_edge_case(EdgeCaseKind::CrossFast, 2)));
  CHECK(write_scenario(gen_motion(MotionKind::Fast, 5)) == write_scenario(gen_motion(MotionKind::Fast, 5)));
}

TEST_CASE("load sequence keeps concurrent visibility equal to each segment's load") {
  const std::vector<int> loads{1, 2, 3, 4, 5, 7, 8, 10, 12};
  const std::int64_t seg = 2000;
  const Scenario s = gen_load_sequence(loads, seg);
  for (std::size_t i = 0; i < loads.size(); ++i) {
    const auto [a, b] = load_segment_window(i, seg);
    CHECK(b - a == seg);
    for (std::int64_t t = a; t < b; t += 250) CHECK(int(visible_people(s, t, 1.1).size()) == loads[i]);
    if (i + 1 < loads.size()) CHECK(visible_people(s, b + kDefaultLoadGapMs / 2).empty());
  }
  const Scenario one = gen_load_sequence({1}, seg);
  for (std::int64_t t = 0; t < one.duration_ms; t += 100) CHECK(visible_people(one, t, 1.1).size() <= 1);
  CHECK_THROWS_AS(gen_load_sequence({}, seg), ValidationError);
  CHECK_THROWS_AS(gen_load_sequence({0}, seg), ValidationError);
}

TEST_CASE("edge cases put the protected bystander behind the nearer person") {
  for (auto kind : {EdgeCaseKind::Overlap, EdgeCaseKind::CrossSlow, EdgeCaseKind::CrossFast}) {
    const Scenario s = gen_edge_case(kind, 9);
    REQUIRE(s.protected_person_id);
    CHECK(*s.protected_person_id == 2);
    bool occluded_somewhere = false;
    for (std::int64_t t = 0; t < s.duration_ms; t += 10)
      for (const auto& v : visible_people(s, t))
        if (v.person_id == 2 && v.occluded) occluded_somewhere = true;
    CHECK(occluded_somewhere);
  }
}

TEST_CASE("gesture names parse and print") {
  CHECK(parse_gesture("OpenPalm") == Gesture::OpenPalm);
  CHECK(parse_gesture("Victory") == Gesture::Victory);
  CHECK(to_string(Gesture::Victory) == "Victory");
  CHECK_THROWS_AS(parse_gesture("Fist"), ParseError);
  CHECK(parse_edge_case_kind("cross-fast") == EdgeCaseKind::CrossFast);
}
