#include <algorithm>
#include <random>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "petbench/analysis.hpp"
#include "petbench/errors.hpp"

using namespace petbench;
using testutil::make_scenario;
using testutil::still_person;

namespace {

constexpr int A = 1, B = 2;

// People A at x=-0.5 and B at x=+0.5, visible for 3 s.
Scenario two_people() {
  return make_scenario({still_person(A, -0.5, 2, 0, 3000), still_person(B, 0.5, 2, 0, 3000)}, 3000);
}

Box2D box_of(const Scenario& s, int person) { return project(*sample_box(*s.person(person), 0), s.stimulus_size); }

// frames[i] lists (track_id, person) pairs drawn on that frame.
TrialLog synthetic(const Scenario& s, const std::vector<std::vector<std::pair<int, int>>>& frames) {
  TrialLog t;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    FrameLogEntry f;
    f.frame = std::int64_t(i) + 1;
    f.elapsed_ms = std::int64_t(i) * 33;
    f.fps = 30;
    for (auto [track, person] : frames[i]) {
      DetectionRow r;
      r.frame = f.frame;
      r.track_id = track;
      r.box2d = box_of(s, person);
      f.detection_rows.push_back(r);
    }
    t.frames.push_back(f);
  }
  return t;
}

std::vector<std::vector<std::pair<int, int>>> repeat(std::vector<std::pair<int, int>> rows, int n) {
  return std::vector<std::vector<std::pair<int, int>>>(std::size_t(n), rows);
}

}  // namespace

TEST_CASE("clean tracking is a stable pass") {
  const Scenario s = two_people();
  const TrialOutcome o = classify_association(synthetic(s, repeat({{1, A}, {2, B}}, 30)), s);
  CHECK(o.verdict == Verdict::Pass);
  CHECK(o.class_name() == "P_s");
  REQUIRE(o.per_frame_mapping.size() == 30);
  CHECK(o.per_frame_mapping[0].track_to_person.at(2) == B);
}

TEST_CASE("a track that moves from A to B is a swap") {
  const Scenario s = two_people();
  const TrialOutcome o = classify_association(synthetic(s, {{{1, A}}, {{1, A}}, {{1, B}}}), s);
  CHECK(o.verdict == Verdict::Fail);
  CHECK(o.class_name() == "F_s");
}

TEST_CASE("a dead track replaced by a new id is lost") {
  const Scenario s = two_people();
  auto frames = repeat({{1, A}, {2, B}}, 10);
  for (int i = 0; i < 10; ++i) frames.push_back({{1, A}, {7, B}});
  CHECK(classify_association(synthetic(s, frames), s).class_name() == "F_l");
}

TEST_CASE("short gaps recover, long gaps with the original alive drift") {
  const Scenario s = two_people();
  auto frames = repeat({{1, A}, {2, B}}, 10);
  for (int i = 0; i < 5; ++i) frames.push_back({{1, A}});
  for (int i = 0; i < 10; ++i) frames.push_back({{1, A}, {2, B}});
  CHECK(classify_association(synthetic(s, frames), s).class_name() == "P_r");

  frames = repeat({{1, A}, {2, B}}, 10);
  for (int i = 0; i < 12; ++i) frames.push_back({{1, A}});
  for (int i = 0; i < 10; ++i) frames.push_back({{1, A}, {2, B}});
  CHECK(classify_association(synthetic(s, frames), s).class_name() == "F_d");

  // a second id covering the person while the original still lives
  frames = repeat({{1, A}, {2, B}}, 10);
  frames.push_back({{1, A}, {9, B}});
  for (int i = 0; i < 10; ++i) frames.push_back({{1, A}, {2, B}});
  CHECK(classify_association(synthetic(s, frames), s).class_name() == "F_d");
}

TEST_CASE("failure classes follow swap over drift over loss") {
  const Scenario s = two_people();
  // drift on B and a swap on track 1
  auto frames = repeat({{1, A}, {2, B}}, 5);
  frames.push_back({{1, B}, {2, B}});
  for (int i = 0; i < 12; ++i) frames.push_back({{1, A}});
  frames.push_back({{1, A}, {2, B}});
  CHECK(classify_association(synthetic(s, frames), s).class_name() == "F_s");
  // never covered at all
  CHECK(classify_association(synthetic(s, repeat({{1, A}}, 20)), s).class_name() == "F_l");
}

TEST_CASE("classification ignores row order and always yields one class") {
  const Scenario s = two_people();
  std::mt19937_64 rng(4);
  for (int n = 0; n < 100; ++n) {
    std::vector<std::vector<std::pair<int, int>>> frames;
    for (int i = 0; i < 40; ++i) {
      std::vector<std::pair<int, int>> rows;
      if (rng() % 10) rows.emplace_back(1 + int(rng() % 2 == 0 && rng() % 8 == 0) * 3, A);
      if (rng() % 10) rows.emplace_back(2 + int(rng() % 9 == 0) * 5, B);
      frames.push_back(rows);
    }
    TrialLog t = synthetic(s, frames);
    const TrialOutcome o = classify_association(t, s);
    CHECK(bool(o.pass_class) != bool(o.fail_class));
    CHECK((o.verdict == Verdict::Pass) == bool(o.pass_class));
    for (auto& f : t.frames) std::reverse(f.detection_rows.begin(), f.detection_rows.end());
    CHECK(classify_association(t, s).class_name() == o.class_name());
  }
}

TEST_CASE("camera to stimulus calibration") {
  const CornerCalibration cal{{100, 50}, {740, 410}, {1280, 720}};
  const Point2 mid = map_camera_to_stimulus(cal, Point2{420, 230});
  CHECK(mid.x == doctest::Approx(640));
  CHECK(mid.y == doctest::Approx(360));
  const Point2 tl = map_camera_to_stimulus(cal, Point2{100, 50});
  CHECK(tl.x == 0);
  CHECK(tl.y == 0);
  const Point2 br = map_camera_to_stimulus(cal, Point2{740, 410});
  CHECK(br.x == 1280);
  CHECK(br.y == 720);
  const Box2D b = map_camera_to_stimulus(cal, Box2D{100, 50, 320, 180});
  CHECK(b.w == doctest::Approx(640));
  CHECK(b.h == doctest::Approx(360));
  CHECK_THROWS_AS(validate(CornerCalibration{{10, 10}, {10, 20}, {640, 360}}), ValidationError);
}

TEST_CASE("calibration maps compose to identity") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> U(0, 1);
  for (int i = 0; i < 1000; ++i) {
    const Point2 tl{U(rng) * 200, U(rng) * 200};
    const CornerCalibration cal{tl, {tl.x + 100 + U(rng) * 800, tl.y + 100 + U(rng) * 600}, {1280, 720}};
    const Point2 p{U(rng) * 1000 - 100, U(rng) * 800 - 100};
    const Point2 q = map_stimulus_to_camera(cal, map_camera_to_stimulus(cal, p));
    CHECK(std::abs(q.x - p.x) < 1e-9);
    CHECK(std::abs(q.y - p.y) < 1e-9);
  }
}

TEST_CASE("alignment drops stimulus frames before the first log entry") {
  Scenario s = two_people();
  TrialLog t = synthetic(s, repeat({}, 5));
  for (auto& f : t.frames) f.elapsed_ms += 100;
  const auto aligned = align_logs_to_stimulus(t, s);
  REQUIRE(!aligned.empty());
  CHECK(aligned.front().first == 3);
  CHECK(aligned.front().second->elapsed_ms == 100);

  const TrialLog at_zero = synthetic(s, repeat({}, 5));
  CHECK(align_logs_to_stimulus(at_zero, s).front().first == 0);
}

TEST_CASE("alignment agrees with a nearest-preceding-entry search") {
  Scenario s = two_people();
  std::mt19937_64 rng(12);
  for (int n = 0; n < 50; ++n) {
    TrialLog t;
    std::int64_t e = std::int64_t(rng() % 200);
    for (int i = 0; e < s.duration_ms + 300; ++i) {
      FrameLogEntry f;
      f.frame = i + 1;
      f.elapsed_ms = e;
      t.frames.push_back(f);
      e += 5 + std::int64_t(rng() % 80);
    }
    const auto aligned = align_logs_to_stimulus(t, s);
    for (const auto& [k, entry] : aligned) {
      const std::int64_t tk = stimulus_frame_time_ms(s, k);
      const FrameLogEntry* oracle = nullptr;
      for (const auto& f : t.frames)
        if (f.elapsed_ms <= tk) oracle = &f;
      CHECK(entry == oracle);
    }
    int expected = 0;
    for (int k = 0; stimulus_frame_time_ms(s, k) < s.duration_ms; ++k)
      expected += stimulus_frame_time_ms(s, k) >= t.frames.front().elapsed_ms;
    CHECK(int(aligned.size()) == expected);
  }
}

TEST_CASE("fps summary uses concatenated samples") {
  TrialLog a, b;
  for (int i = 0; i < 10; ++i) {
    FrameLogEntry f;
    f.frame = i + 1;
    f.elapsed_ms = i * 60;
    f.fps = 1000.0 / 60;
    a.frames.push_back(f);
    f.fps = 20;
    b.frames.push_back(f);
  }
  auto rows = fps_summary({{"one", {&a}}});
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].mean == doctest::Approx(16.667).epsilon(1e-4));
  CHECK(rows[0].stddev == doctest::Approx(0));
  rows = fps_summary({{"two", {&a, &b}}});
  CHECK(rows[0].mean == doctest::Approx((1000.0 / 60 + 20) / 2));
  CHECK(rows[0].samples == 20);
  CHECK(rows[0].stddev == doctest::Approx((20 - 1000.0 / 60) / 2));
  CHECK(mean_fps(a, 120, 240) == doctest::Approx(1000.0 / 60));
  CHECK(write_fps_summary_csv(rows).rfind("condition,mean_fps,stddev_fps,frames\n", 0) == 0);
}

TEST_CASE("report cells and bookkeeping") {
  CHECK(format_pass_cell(10, 0) == "10 (10 P_s)");
  CHECK(format_pass_cell(7, 3) == "10 (7 P_s, 3 P_r)");
  CHECK(format_pass_cell(0, 0) == "0");
  CHECK(format_fail_cell(2, 0, 1) == "3 (2 F_s, 1 F_d)");
  CHECK(format_fail_cell(0, 0, 0) == "0");

  const Report empty = generate_report({});
  CHECK(empty.results_csv == "variant,scenario_kind,seed,verdict,class\n");
  CHECK(std::count(empty.report_txt.begin(), empty.report_txt.end(), '\n') == 1);

  std::mt19937_64 rng(2);
  std::vector<OutcomeRecord> recs;
  for (const char* v : {"kpp", "baseline"})
    for (const char* k : {"overlap", "cross-fast"})
      for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        OutcomeRecord r{v, k, seed, {}};
        switch (rng() % 5) {
          case 0: r.outcome.pass_class = PassClass::Stable; break;
          case 1: r.outcome.pass_class = PassClass::Recovered; break;
          case 2: r.outcome.fail_class = FailClass::Swapped; break;
          case 3: r.outcome.fail_class = FailClass::Lost; break;
          default: r.outcome.fail_class = FailClass::Drifted; break;
        }
        r.outcome.verdict = r.outcome.pass_class ? Verdict::Pass : Verdict::Fail;
        recs.push_back(r);
      }
  const Report rep = generate_report(recs);
  CHECK(std::count(rep.results_csv.begin(), rep.results_csv.end(), '\n') == 41);
  std::istringstream lines(rep.report_txt);
  std::string line;
  std::getline(lines, line);
  CHECK(line.find("overlap pass") != std::string::npos);
  int rows = 0;
  while (std::getline(lines, line)) {
    ++rows;
    // leading count of every pass cell plus every fail cell is 10 per kind
    std::vector<int> totals;
    std::size_t pos = line.find(" | ");
    while (pos != std::string::npos) {
      totals.push_back(std::stoi(line.substr(pos + 3)));
      pos = line.find(" | ", pos + 3);
    }
    REQUIRE(totals.size() == 4);
    CHECK(totals[0] + totals[1] == 10);
    CHECK(totals[2] + totals[3] == 10);
  }
  CHECK(rows == 2);
}
