#include "petbench/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "petbench/errors.hpp"
#include "petbench/explicit_pet.hpp"
#include "petbench/textdoc.hpp"

namespace petbench {

void validate(const CornerCalibration& c) {
  if (!(c.stimulus_bottom_right.x > c.stimulus_top_left.x && c.stimulus_bottom_right.y > c.stimulus_top_left.y))
    throw ValidationError("calibration corners are degenerate");
  if (c.stimulus_size.width <= 0 || c.stimulus_size.height <= 0)
    throw ValidationError("calibration stimulus size must be positive");
}

Point2 map_camera_to_stimulus(const CornerCalibration& c, Point2 p) {
  validate(c);
  const double u = (p.x - c.stimulus_top_left.x) / (c.stimulus_bottom_right.x - c.stimulus_top_left.x);
  const double v = (p.y - c.stimulus_top_left.y) / (c.stimulus_bottom_right.y - c.stimulus_top_left.y);
  return {u * c.stimulus_size.width, v * c.stimulus_size.height};
}

Point2 map_stimulus_to_camera(const CornerCalibration& c, Point2 p) {
  validate(c);
  const double u = p.x / c.stimulus_size.width, v = p.y / c.stimulus_size.height;
  return {c.stimulus_top_left.x + u * (c.stimulus_bottom_right.x - c.stimulus_top_left.x),
          c.stimulus_top_left.y + v * (c.stimulus_bottom_right.y - c.stimulus_top_left.y)};
}

Box2D map_camera_to_stimulus(const CornerCalibration& c, const Box2D& b) {
  const Point2 a = map_camera_to_stimulus(c, Point2{b.x, b.y});
  const Point2 z = map_camera_to_stimulus(c, Point2{b.x + b.w, b.y + b.h});
  return {a.x, a.y, z.x - a.x, z.y - a.y};
}

Box2D map_stimulus_to_camera(const CornerCalibration& c, const Box2D& b) {
  const Point2 a = map_stimulus_to_camera(c, Point2{b.x, b.y});
  const Point2 z = map_stimulus_to_camera(c, Point2{b.x + b.w, b.y + b.h});
  return {a.x, a.y, z.x - a.x, z.y - a.y};
}

std::string_view to_string(Verdict v) { return v == Verdict::Pass ? "pass" : "fail"; }
std::string_view to_string(PassClass c) { return c == PassClass::Stable ? "P_s" : "P_r"; }
std::string_view to_string(FailClass c) {
  switch (c) {
    case FailClass::Swapped: return "F_s";
    case FailClass::Lost: return "F_l";
    case FailClass::Drifted: return "F_d";
  }
  return "F_s";
}

std::string TrialOutcome::class_name() const {
  if (pass_class) return std::string(to_string(*pass_class));
  if (fail_class) return std::string(to_string(*fail_class));
  return "";
}

namespace {

CornerCalibration calibration_of(const TrialLog& t, const Scenario& s) {
  if (t.reference_fov) return *t.reference_fov;
  return CornerCalibration::from_view(CameraView::identity(s.stimulus_size), s.stimulus_size);
}

struct RowMatch {
  int person = -1;
  double iou = 0;
};

// Ground-truth stimulus boxes of every person present at t.
std::vector<std::pair<int, Box2D>> truth_at(const Scenario& s, std::int64_t t) {
  std::vector<std::pair<int, Box2D>> out;
  for (const auto& p : s.people)
    if (auto b = sample_box(p, t)) out.emplace_back(p.person_id, project(*b, s.stimulus_size));
  return out;
}

RowMatch best_person(const Box2D& stim_box, const std::vector<std::pair<int, Box2D>>& truth, double floor) {
  RowMatch m;
  for (const auto& [id, box] : truth) {
    const double v = iou(stim_box, box);
    if (v >= floor && (v > m.iou || (v == m.iou && m.person >= 0 && id < m.person))) {
      m.person = id;
      m.iou = v;
    }
  }
  return m;
}

}  // namespace

std::vector<FrameMapping> map_tracks_to_people(const TrialLog& trial, const Scenario& s, double iou_floor) {
  const CornerCalibration cal = calibration_of(trial, s);
  std::vector<FrameMapping> out;
  for (const auto& f : trial.frames) {
    FrameMapping m;
    m.frame = f.frame;
    const auto truth = truth_at(s, f.elapsed_ms);
    for (const auto& row : f.detection_rows) {
      const RowMatch r = best_person(map_camera_to_stimulus(cal, row.box2d), truth, iou_floor);
      if (r.person >= 0) m.track_to_person[row.track_id] = r.person;
    }
    out.push_back(std::move(m));
  }
  return out;
}

TrialOutcome classify_association(const TrialLog& trial, const Scenario& s, const ClassifyConfig& cfg) {
  if (s.people.empty()) throw ValidationError("classification needs at least one person");
  TrialOutcome out;
  out.per_frame_mapping = map_tracks_to_people(trial, s, cfg.iou_floor);
  const auto& maps = out.per_frame_mapping;
  const std::size_t n = maps.size();

  // Track lifetimes in frame indices.
  std::map<int, std::size_t> last_seen;
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& row : trial.frames[i].detection_rows) last_seen[row.track_id] = i;

  bool swapped = false, lost = false, drifted = false, gaps = false, long_gap = false;

  std::map<int, int> last_person;
  for (const auto& m : maps)
    for (const auto& [track, person] : m.track_to_person) {
      auto [it, fresh] = last_person.emplace(track, person);
      if (!fresh && it->second != person) swapped = true;
      it->second = person;
    }

  for (const auto& p : s.people) {
    std::optional<std::size_t> first;
    int original = -1;
    for (std::size_t i = 0; i < n && !first; ++i)
      for (const auto& [track, person] : maps[i].track_to_person)
        if (person == p.person_id) {
          first = i;
          original = track;
          break;
        }
    if (!first) {
      lost = true;
      continue;
    }
    const std::size_t orig_last = last_seen[original];
    int run = 0;
    auto close_run = [&](bool orig_alive) {
      if (run > cfg.recovery_gap) {
        long_gap = true;
        (orig_alive ? drifted : lost) = true;
      }
      run = 0;
    };
    for (std::size_t i = *first; i < n; ++i) {
      if (!sample_box(p, trial.frames[i].elapsed_ms)) {
        close_run(i <= orig_last);
        continue;
      }
      bool by_original = false, by_other = false;
      for (const auto& [track, person] : maps[i].track_to_person) {
        if (person != p.person_id) continue;
        (track == original ? by_original : by_other) = true;
      }
      if (by_other) (i <= orig_last ? drifted : lost) = true;
      if (by_original) {
        close_run(true);
      } else {
        gaps = true;
        ++run;
      }
    }
    close_run(n > 0 && n - 1 <= orig_last);
  }

  if (swapped || drifted || lost) {
    out.verdict = Verdict::Fail;
    out.fail_class = swapped ? FailClass::Swapped : drifted ? FailClass::Drifted : FailClass::Lost;
  } else {
    out.verdict = Verdict::Pass;
    out.pass_class = gaps && !long_gap ? PassClass::Recovered : PassClass::Stable;
  }
  return out;
}

std::vector<IntentOutcome> evaluate_intents(const TrialLog& trial, const Scenario& s, int window, double iou_floor) {
  const CornerCalibration cal = calibration_of(trial, s);
  const std::size_t n = trial.frames.size();

  // covering[i][person] = obfuscated flag of the best-IoU row mapped to person.
  std::vector<std::map<int, std::pair<double, bool>>> covering(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto truth = truth_at(s, trial.frames[i].elapsed_ms);
    for (const auto& row : trial.frames[i].detection_rows) {
      const RowMatch r = best_person(map_camera_to_stimulus(cal, row.box2d), truth, iou_floor);
      if (r.person < 0) continue;
      auto it = covering[i].find(r.person);
      if (it == covering[i].end() || r.iou > it->second.first) covering[i][r.person] = {r.iou, row.obfuscated};
    }
  }
  auto first_frame_at = [&](auto pred) {
    std::size_t i = 0;
    while (i < n && !pred(trial.frames[i].elapsed_ms)) ++i;
    return i;
  };

  std::vector<IntentOutcome> out;
  for (std::size_t k = 0; k < s.intent_events.size(); ++k) {
    const IntentEvent& e = s.intent_events[k];
    IntentOutcome o;
    o.event = e;
    const bool intended = e.gesture == Gesture::OpenPalm;
    if (e.gesture == Gesture::None) {
      out.push_back(o);
      continue;
    }
    std::int64_t next_t = std::numeric_limits<std::int64_t>::max();
    for (const auto& other : s.intent_events)
      if (other.person_id == e.person_id && other.t_ms > e.t_ms) next_t = std::min(next_t, other.t_ms);
    const std::size_t start = first_frame_at([&](std::int64_t t) { return t >= e.t_ms; });
    const std::size_t end = first_frame_at([&](std::int64_t t) { return t > e.end_ms(); });
    const std::size_t next = first_frame_at([&](std::int64_t t) { return t >= next_t; });
    const std::size_t deadline = std::min(end + std::size_t(window), next);

    std::optional<std::size_t> correct;
    for (std::size_t i = start; i < std::min(deadline, n) && !correct; ++i) {
      auto it = covering[i].find(e.person_id);
      if (it != covering[i].end() && it->second.second == intended) correct = i;
    }
    if (correct) {
      bool holds = true;
      for (std::size_t i = *correct; i < std::min(next, n); ++i) {
        auto it = covering[i].find(e.person_id);
        if (it != covering[i].end() && it->second.second != intended) holds = false;
      }
      o.achieved = holds;
      o.frames_to_enforce = int(*correct - start);
      o.cost_proxy_ms = intent_cost_proxy(trial.frames[*correct]);
    }
    out.push_back(o);
  }
  return out;
}

std::vector<FpsRow> fps_summary(const std::map<std::string, std::vector<const TrialLog*>>& groups) {
  std::vector<FpsRow> out;
  for (const auto& [name, trials] : groups) {
    std::vector<double> xs;
    for (const TrialLog* t : trials)
      for (const auto& f : t->frames) xs.push_back(f.fps);
    if (xs.empty()) throw ValidationError("fps summary group '" + name + "' has no frames");
    FpsRow r;
    r.condition = name;
    r.samples = xs.size();
    double sum = 0;
    for (double x : xs) sum += x;
    r.mean = sum / double(xs.size());
    double ss = 0;
    for (double x : xs) ss += (x - r.mean) * (x - r.mean);
    r.stddev = std::sqrt(ss / double(xs.size()));
    out.push_back(r);
  }
  return out;
}

double mean_fps(const TrialLog& trial, std::int64_t from_ms, std::int64_t to_ms) {
  double sum = 0;
  std::size_t k = 0;
  for (const auto& f : trial.frames)
    if (f.elapsed_ms >= from_ms && f.elapsed_ms < to_ms) {
      sum += f.fps;
      ++k;
    }
  if (k == 0) throw ValidationError("no frames in the requested window");
  return sum / double(k);
}

std::string write_fps_summary_csv(const std::vector<FpsRow>& rows) {
  std::ostringstream o;
  o << "condition,mean_fps,stddev_fps,frames\n";
  for (const auto& r : rows)
    o << r.condition << "," << format_number(r.mean) << "," << format_number(r.stddev) << "," << r.samples << "\n";
  return o.str();
}

std::int64_t stimulus_frame_time_ms(const Scenario& s, int k) {
  return static_cast<std::int64_t>(std::floor(k * 1000.0 / s.frame_rate_hz + 1e-9));
}

std::vector<std::pair<int, const FrameLogEntry*>> align_logs_to_stimulus(const TrialLog& trial, const Scenario& s) {
  std::vector<std::pair<int, const FrameLogEntry*>> out;
  if (trial.frames.empty()) return out;
  for (int k = 0;; ++k) {
    const std::int64_t t = stimulus_frame_time_ms(s, k);
    if (t >= s.duration_ms) break;
    auto it = std::upper_bound(trial.frames.begin(), trial.frames.end(), t,
                               [](std::int64_t v, const FrameLogEntry& f) { return v < f.elapsed_ms; });
    if (it == trial.frames.begin()) continue;
    out.emplace_back(k, &*std::prev(it));
  }
  return out;
}

std::string format_pass_cell(int p_s, int p_r) {
  const int total = p_s + p_r;
  if (total == 0) return "0";
  std::vector<std::string> parts;
  if (p_s) parts.push_back(std::to_string(p_s) + " P_s");
  if (p_r) parts.push_back(std::to_string(p_r) + " P_r");
  std::string s = std::to_string(total) + " (";
  for (std::size_t i = 0; i < parts.size(); ++i) s += (i ? ", " : "") + parts[i];
  return s + ")";
}

std::string format_fail_cell(int f_s, int f_l, int f_d) {
  const int total = f_s + f_l + f_d;
  if (total == 0) return "0";
  std::vector<std::string> parts;
  if (f_s) parts.push_back(std::to_string(f_s) + " F_s");
  if (f_l) parts.push_back(std::to_string(f_l) + " F_l");
  if (f_d) parts.push_back(std::to_string(f_d) + " F_d");
  std::string s = std::to_string(total) + " (";
  for (std::size_t i = 0; i < parts.size(); ++i) s += (i ? ", " : "") + parts[i];
  return s + ")";
}

Report generate_report(const std::vector<OutcomeRecord>& outcomes) {
  Report r;
  std::ostringstream csv;
  csv << "variant,scenario_kind,seed,verdict,class\n";
  std::vector<std::string> variants, kinds;
  auto remember = [](std::vector<std::string>& v, const std::string& x) {
    if (std::find(v.begin(), v.end(), x) == v.end()) v.push_back(x);
  };
  struct Counts {
    int p_s = 0, p_r = 0, f_s = 0, f_l = 0, f_d = 0;
  };
  std::map<std::pair<std::string, std::string>, Counts> grid;
  for (const auto& o : outcomes) {
    csv << o.variant << "," << o.scenario_kind << "," << o.seed << "," << to_string(o.outcome.verdict) << ","
        << o.outcome.class_name() << "\n";
    remember(variants, o.variant);
    remember(kinds, o.scenario_kind);
    Counts& c = grid[{o.variant, o.scenario_kind}];
    if (o.outcome.pass_class) (*o.outcome.pass_class == PassClass::Stable ? c.p_s : c.p_r)++;
    if (o.outcome.fail_class) {
      switch (*o.outcome.fail_class) {
        case FailClass::Swapped: ++c.f_s; break;
        case FailClass::Lost: ++c.f_l; break;
        case FailClass::Drifted: ++c.f_d; break;
      }
    }
  }
  r.results_csv = csv.str();

  std::vector<std::vector<std::string>> table;
  std::vector<std::string> header{"variant"};
  for (const auto& k : kinds) {
    header.push_back(k + " pass");
    header.push_back(k + " fail");
  }
  table.push_back(header);
  for (const auto& v : variants) {
    std::vector<std::string> row{v};
    for (const auto& k : kinds) {
      const Counts c = grid[{v, k}];
      row.push_back(format_pass_cell(c.p_s, c.p_r));
      row.push_back(format_fail_cell(c.f_s, c.f_l, c.f_d));
    }
    table.push_back(row);
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : table)
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  std::ostringstream txt;
  for (const auto& row : table) {
    std::string line;
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) line += " | ";
      line += row[i] + std::string(width[i] - row[i].size(), ' ');
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    txt << line << "\n";
  }
  r.report_txt = txt.str();
  return r;
}

}  // namespace petbench
