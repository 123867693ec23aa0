#include "petbench/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "petbench/errors.hpp"
#include "petbench/textdoc.hpp"

namespace petbench {

std::string_view to_string(Gesture g) {
  switch (g) {
    case Gesture::OpenPalm: return "OpenPalm";
    case Gesture::Victory: return "Victory";
    case Gesture::None: return "None";
  }
  return "None";
}

Gesture parse_gesture(std::string_view s) {
  if (s == "OpenPalm") return Gesture::OpenPalm;
  if (s == "Victory") return Gesture::Victory;
  if (s == "None") return Gesture::None;
  throw ParseError("unknown gesture '" + std::string(s) + "'");
}

const PersonTrack* Scenario::person(int id) const {
  for (const auto& p : people)
    if (p.person_id == id) return &p;
  return nullptr;
}

void validate(const Scenario& s) {
  auto fail = [](const std::string& m) { throw ValidationError(m); };
  if (s.duration_ms <= 0) fail("duration_ms must be positive");
  if (!(s.frame_rate_hz > 0)) fail("frame_rate_hz must be positive");
  if (s.stimulus_size.width <= 0 || s.stimulus_size.height <= 0) fail("stimulus size must be positive");
  std::set<int> ids;
  for (const auto& p : s.people) {
    const std::string who = "person " + std::to_string(p.person_id);
    if (!ids.insert(p.person_id).second) fail("duplicate person id " + std::to_string(p.person_id));
    if (p.keyframes.size() < 2) fail(who + " needs at least 2 keyframes");
    for (std::size_t i = 0; i < p.keyframes.size(); ++i) {
      const auto& kf = p.keyframes[i];
      if (i > 0 && kf.t_ms <= p.keyframes[i - 1].t_ms) fail(who + " keyframe times not strictly increasing");
      if ((kf.box.extents.array() <= 0).any()) fail(who + " box extents must be positive");
      if (kf.box.center.z() <= 0) fail(who + " depth must be positive");
    }
    if (p.visible_start_ms > p.visible_end_ms) fail(who + " visible interval is reversed");
  }
  auto in_range = [&](std::int64_t t) { return t >= 0 && t <= s.duration_ms; };
  for (const auto& e : s.intent_events) {
    if (!ids.count(e.person_id)) fail("intent event references unknown person " + std::to_string(e.person_id));
    if (e.hold_ms <= 0) fail("intent hold_ms must be positive");
    if (!in_range(e.t_ms)) fail("intent event time outside scenario");
    if (e.gesture == Gesture::None) fail("intent gesture must be OpenPalm or Victory");
  }
  for (const auto& g : s.gaze_schedule) {
    if (g.t_start_ms >= g.t_end_ms) fail("gaze directive needs t_start < t_end");
    if (!in_range(g.t_start_ms) || !in_range(g.t_end_ms)) fail("gaze directive outside scenario");
    if (g.target_person_id && !ids.count(*g.target_person_id))
      fail("gaze directive references unknown person " + std::to_string(*g.target_person_id));
  }
  if (std::abs(s.marker_pose.orientation.norm() - 1.0) > 1e-9) fail("marker quaternion is not unit");
}

namespace {

Quat read_quat(const TextRow& r, std::size_t first) {
  Quat q(r.number(first + 3), r.number(first), r.number(first + 1), r.number(first + 2));
  const double n = q.norm();
  // Six-decimal files cannot hold an exactly unit quaternion.
  if (std::abs(n - 1.0) > 1e-5) throw ParseError("quaternion is not unit length", r.line);
  q.coeffs() /= n;
  return q;
}

}  // namespace

Scenario parse_scenario(std::string_view text) {
  const TextDoc doc = parse_text_doc(text);
  Scenario s;
  const TextSection* head = doc.find("scenario");
  if (!head) throw ParseError("missing [scenario] section");
  s.id = head->string("id");
  s.kind = head->string_or("kind").value_or("");
  s.duration_ms = static_cast<std::int64_t>(head->number("duration_ms"));
  s.frame_rate_hz = head->number("frame_rate_hz");
  if (const TextRow* r = head->find("stimulus_size")) {
    r->expect_arity(3);
    s.stimulus_size = {int(r->integer(1)), int(r->integer(2))};
  }
  if (auto p = head->number_or("protected_person")) s.protected_person_id = int(*p);

  for (const auto& sec : doc.sections) {
    if (sec.name == "person") {
      if (sec.args.size() != 1) throw ParseError("[person] needs an id", sec.line);
      PersonTrack p;
      p.person_id = int(parse_int(sec.args[0], sec.line, "person id"));
      std::optional<std::pair<std::int64_t, std::int64_t>> vis;
      for (const auto& r : sec.rows) {
        if (r.key() == "kf") {
          r.expect_arity(8);
          Keyframe kf;
          kf.t_ms = r.integer(1);
          kf.box.center = Vec3(r.number(2), r.number(3), r.number(4));
          kf.box.extents = Vec3(r.number(5), r.number(6), r.number(7));
          p.keyframes.push_back(kf);
        } else if (r.key() == "visible") {
          r.expect_arity(3);
          vis = {r.integer(1), r.integer(2)};
        } else {
          throw ParseError("unknown person row '" + r.key() + "'", r.line);
        }
      }
      if (vis) {
        std::tie(p.visible_start_ms, p.visible_end_ms) = *vis;
      } else if (!p.keyframes.empty()) {
        p.visible_start_ms = p.keyframes.front().t_ms;
        p.visible_end_ms = p.keyframes.back().t_ms;
      }
      s.people.push_back(std::move(p));
    } else if (sec.name == "intent") {
      for (const auto& r : sec.rows) {
        r.expect_arity(4);
        IntentEvent e;
        e.t_ms = r.integer(0);
        e.person_id = int(r.integer(1));
        try {
          e.gesture = parse_gesture(r.tokens[2]);
        } catch (const ParseError& err) {
          throw ParseError(err.what(), r.line);
        }
        e.hold_ms = r.integer(3);
        s.intent_events.push_back(e);
      }
    } else if (sec.name == "gaze") {
      for (const auto& r : sec.rows) {
        r.expect_arity(3);
        GazeDirective g;
        g.t_start_ms = r.integer(0);
        g.t_end_ms = r.integer(1);
        if (r.tokens[2] != "-") g.target_person_id = int(r.integer(2));
        s.gaze_schedule.push_back(g);
      }
    } else if (sec.name == "marker") {
      const TextRow* r = sec.find("pose");
      if (!r) throw ParseError("[marker] needs a pose row", sec.line);
      r->expect_arity(8);
      s.marker_pose.position = Vec3(r->number(1), r->number(2), r->number(3));
      s.marker_pose.orientation = read_quat(*r, 4);
    } else if (sec.name != "scenario") {
      throw ParseError("unknown section [" + sec.name + "]", sec.line);
    }
  }
  validate(s);
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open scenario " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

std::string write_scenario(const Scenario& s) {
  std::ostringstream o;
  auto n = [](double v) { return format_number(v); };
  o << "[scenario]\n";
  o << "id " << s.id << "\n";
  if (!s.kind.empty()) o << "kind " << s.kind << "\n";
  o << "duration_ms " << s.duration_ms << "\n";
  o << "frame_rate_hz " << n(s.frame_rate_hz) << "\n";
  o << "stimulus_size " << s.stimulus_size.width << " " << s.stimulus_size.height << "\n";
  if (s.protected_person_id) o << "protected_person " << *s.protected_person_id << "\n";
  for (const auto& p : s.people) {
    o << "\n[person " << p.person_id << "]\n";
    o << "visible " << p.visible_start_ms << " " << p.visible_end_ms << "\n";
    for (const auto& kf : p.keyframes) {
      const auto& c = kf.box.center;
      const auto& e = kf.box.extents;
      o << "kf " << kf.t_ms << " " << n(c.x()) << " " << n(c.y()) << " " << n(c.z()) << " " << n(e.x()) << " "
        << n(e.y()) << " " << n(e.z()) << "\n";
    }
  }
  if (!s.intent_events.empty()) {
    o << "\n[intent]\n";
    for (const auto& e : s.intent_events)
      o << e.t_ms << " " << e.person_id << " " << to_string(e.gesture) << " " << e.hold_ms << "\n";
  }
  if (!s.gaze_schedule.empty()) {
    o << "\n[gaze]\n";
    for (const auto& g : s.gaze_schedule) {
      o << g.t_start_ms << " " << g.t_end_ms << " ";
      if (g.target_person_id) o << *g.target_person_id; else o << "-";
      o << "\n";
    }
  }
  const auto& m = s.marker_pose;
  o << "\n[marker]\npose " << n(m.position.x()) << " " << n(m.position.y()) << " " << n(m.position.z()) << " "
    << n(m.orientation.x()) << " " << n(m.orientation.y()) << " " << n(m.orientation.z()) << " "
    << n(m.orientation.w()) << "\n";
  return o.str();
}

void save_scenario(const Scenario& s, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << write_scenario(s);
}

std::optional<Box3D> sample_box(const PersonTrack& track, std::int64_t t_ms) {
  if (t_ms < track.visible_start_ms || t_ms > track.visible_end_ms || track.keyframes.empty()) return std::nullopt;
  const auto& kfs = track.keyframes;
  if (t_ms <= kfs.front().t_ms) return kfs.front().box;
  if (t_ms >= kfs.back().t_ms) return kfs.back().box;
  auto hi = std::upper_bound(kfs.begin(), kfs.end(), t_ms,
                             [](std::int64_t t, const Keyframe& k) { return t < k.t_ms; });
  auto lo = hi - 1;
  if (lo->t_ms == t_ms) return lo->box;
  const double a = double(t_ms - lo->t_ms) / double(hi->t_ms - lo->t_ms);
  Box3D b;
  b.center = (1 - a) * lo->box.center + a * hi->box.center;
  b.extents = (1 - a) * lo->box.extents + a * hi->box.extents;
  return b;
}

std::vector<VisiblePerson> visible_people(const Scenario& s, std::int64_t t_ms, double occlusion_iou) {
  std::vector<VisiblePerson> out;
  for (const auto& p : s.people)
    if (auto b = sample_box(p, t_ms)) out.push_back({p.person_id, *b, false});
  std::vector<Box2D> proj;
  proj.reserve(out.size());
  for (const auto& v : out) proj.push_back(project(v.box, s.stimulus_size));
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (std::size_t j = 0; j < out.size(); ++j) {
      if (i == j) continue;
      if (out[i].box.center.z() > out[j].box.center.z() && iou(proj[i], proj[j]) >= occlusion_iou) {
        out[i].occluded = true;
        break;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Generators

std::string_view to_string(EdgeCaseKind k) {
  switch (k) {
    case EdgeCaseKind::Overlap: return "overlap";
    case EdgeCaseKind::CrossSlow: return "cross-slow";
    case EdgeCaseKind::CrossFast: return "cross-fast";
  }
  return "overlap";
}

std::optional<EdgeCaseKind> parse_edge_case_kind(std::string_view s) {
  if (s == "overlap") return EdgeCaseKind::Overlap;
  if (s == "cross-slow") return EdgeCaseKind::CrossSlow;
  if (s == "cross-fast") return EdgeCaseKind::CrossFast;
  return std::nullopt;
}

std::string_view to_string(MotionKind k) {
  switch (k) {
    case MotionKind::Static: return "static";
    case MotionKind::Slow: return "slow";
    case MotionKind::Fast: return "fast";
  }
  return "static";
}

namespace {

// Generated coordinates are snapped to the file precision so that a
// generated scenario and its reloaded file are identical.
double snap(double v) { return std::round(v * 1e6) / 1e6; }

Vec3 snap(const Vec3& v) { return Vec3(snap(v.x()), snap(v.y()), snap(v.z())); }

class SeededUniform {
 public:
  explicit SeededUniform(std::uint64_t seed) : rng_(seed) {}
  double operator()(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

 private:
  std::mt19937_64 rng_;
};

// Point whose projection lands at normalized image offset (u, v) at depth z.
Vec3 at_image(double u, double v, double z) { return Vec3(u * z, v * z, z); }

Box3D face(const Vec3& center, const Vec3& extents) { return Box3D{snap(center), snap(extents)}; }

double iou_at(double du, double dv, double za, double zb, const Vec3& ext_a, const Vec3& ext_b, Size2 img) {
  Box3D a{at_image(-du / 2, -dv / 2, za), ext_a};
  Box3D b{at_image(du / 2, dv / 2, zb), ext_b};
  return iou(project(a, img), project(b, img));
}

// Smallest horizontal image separation (normalized) whose IoU drops to
// `target`; IoU decreases monotonically with separation.
double separation_for_iou(double target, double dv, double za, double zb, const Vec3& ea, const Vec3& eb,
                          Size2 img) {
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (iou_at(mid, dv, za, zb, ea, eb, img) > target) lo = mid; else hi = mid;
  }
  return hi;
}

// Vertical image offset at which the peak IoU of a head-on crossing equals target.
double vertical_offset_for_peak_iou(double target, double za, double zb, const Vec3& ea, const Vec3& eb,
                                   Size2 img) {
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (iou_at(0.0, mid, za, zb, ea, eb, img) > target) lo = mid; else hi = mid;
  }
  return hi;
}

PersonTrack make_track(int id, std::vector<Keyframe> kfs) {
  PersonTrack p;
  p.person_id = id;
  p.keyframes = std::move(kfs);
  p.visible_start_ms = p.keyframes.front().t_ms;
  p.visible_end_ms = p.keyframes.back().t_ms;
  return p;
}

}  // namespace

Scenario gen_edge_case(EdgeCaseKind kind, std::uint64_t seed) {
  SeededUniform U(seed * 7919 + static_cast<std::uint64_t>(kind) + 1);
  Scenario s;
  s.kind = std::string(to_string(kind));
  s.id = s.kind + "_s" + std::to_string(seed);
  s.frame_rate_hz = 30.0;
  s.stimulus_size = {640, 360};
  s.protected_person_id = 2;

  const double za = 2.0 + U(-0.05, 0.05);
  const double zb = za + U(0.12, 0.18);
  const Vec3 ea(U(0.18, 0.20), U(0.22, 0.24), 0.25);
  const Vec3 eb(U(0.18, 0.20), U(0.22, 0.24), 0.25);
  const Size2 img = s.stimulus_size;

  if (kind == EdgeCaseKind::Overlap) {
    // Approach, hold side by side with partial overlap, one brief close pass
    // where the farther face is occluded, then walk back.
    const double dv = U(-0.02, 0.02);
    const double hold = separation_for_iou(U(0.15, 0.20), dv, za, zb, ea, eb, img);
    const double dip = separation_for_iou(U(0.33, 0.36), dv, za, zb, ea, eb, img);
    const double start = U(0.28, 0.32);
    const std::vector<std::pair<std::int64_t, double>> sep = {
        {0, 2 * start}, {2000, hold}, {2400, hold}, {2440, dip},
        {2480, hold},   {2900, hold}, {4900, 2 * start}, {6000, 2 * start}};
    std::vector<Keyframe> a, b;
    for (auto [t, d] : sep) {
      a.push_back({t, face(at_image(-d / 2, -dv / 2, za), ea)});
      b.push_back({t, face(at_image(d / 2, dv / 2, zb), eb)});
    }
    s.people = {make_track(1, a), make_track(2, b)};
    s.duration_ms = 6000;
  } else {
    // Head-on crossing with a vertical offset chosen so that the farther face
    // is occluded only around the moment of crossing.
    const bool slow = kind == EdgeCaseKind::CrossSlow;
    // Peak IoU sits just above the occlusion threshold so the farther face
    // is hidden for roughly one inference round at either speed.
    const double peak = slow ? U(0.301, 0.305) : U(0.31, 0.33);
    const double dv = vertical_offset_for_peak_iou(peak, za, zb, ea, eb, img);
    const double wa = ea.x() / za, wb = eb.x() / zb;
    const double zone_s = slow ? U(0.95, 1.10) : U(0.20, 0.26);  // time spent with overlapping projections
    const double speed_u = (wa + wb) / (2.0 * zone_s);
    const double half_span = 0.35;
    const std::int64_t lead = 500;
    const auto travel = static_cast<std::int64_t>(std::round(2 * half_span / speed_u * 1000.0));
    const std::int64_t end = lead + travel;
    std::vector<Keyframe> a = {{0, face(at_image(-half_span, -dv / 2, za), ea)},
                               {lead, face(at_image(-half_span, -dv / 2, za), ea)},
                               {end, face(at_image(half_span, -dv / 2, za), ea)},
                               {end + lead, face(at_image(half_span, -dv / 2, za), ea)}};
    std::vector<Keyframe> b = {{0, face(at_image(half_span, dv / 2, zb), eb)},
                               {lead, face(at_image(half_span, dv / 2, zb), eb)},
                               {end, face(at_image(-half_span, dv / 2, zb), eb)},
                               {end + lead, face(at_image(-half_span, dv / 2, zb), eb)}};
    s.people = {make_track(1, a), make_track(2, b)};
    s.duration_ms = end + lead;
  }
  return s;
}

std::pair<std::int64_t, std::int64_t> load_segment_window(std::size_t i, std::int64_t segment_ms,
                                                          std::int64_t gap_ms) {
  const std::int64_t start = std::int64_t(i) * (segment_ms + gap_ms);
  return {start, start + segment_ms};
}

Scenario gen_load_sequence(const std::vector<int>& loads, std::int64_t segment_ms, std::int64_t gap_ms) {
  if (loads.empty()) throw ValidationError("loads must be non-empty");
  if (segment_ms <= 0) throw ValidationError("segment_ms must be positive");
  Scenario s;
  s.kind = "load";
  s.id = "load";
  for (int l : loads) {
    if (l < 1) throw ValidationError("each load must be >= 1");
    s.id += "_" + std::to_string(l);
  }
  s.frame_rate_hz = 30.0;
  s.stimulus_size = {640, 360};
  const double z = 2.5;
  const Vec3 ext(0.2, 0.24, 0.25);
  constexpr int kCols = 6;
  int next_id = 1;
  for (std::size_t i = 0; i < loads.size(); ++i) {
    auto [start, end] = load_segment_window(i, segment_ms, gap_ms);
    const int n = loads[i];
    const int cols = std::min(n, kCols);
    const int rows = (n + kCols - 1) / kCols;
    for (int k = 0; k < n; ++k) {
      const int r = k / kCols, c = k % kCols;
      const int in_row = (r == rows - 1) ? n - r * kCols : cols;
      const double x = (c - (in_row - 1) / 2.0) * 0.3;
      const double y = (r - (rows - 1) / 2.0) * 0.32;
      const double drift = (k % 2 == 0 ? 0.02 : -0.02);
      std::vector<Keyframe> kfs = {{start, face(Vec3(x, y, z), ext)}, {end, face(Vec3(x + drift, y, z), ext)}};
      s.people.push_back(make_track(next_id++, kfs));
    }
  }
  s.duration_ms = load_segment_window(loads.size() - 1, segment_ms, gap_ms).second;
  return s;
}

Scenario gen_motion(MotionKind kind, std::uint64_t seed) {
  SeededUniform U(seed * 104729 + static_cast<std::uint64_t>(kind) + 11);
  Scenario s;
  s.kind = "motion-" + std::string(to_string(kind));
  s.id = s.kind + "_s" + std::to_string(seed);
  s.frame_rate_hz = 30.0;
  s.stimulus_size = {640, 360};
  s.duration_ms = 10000;
  const double z = 2.0 + U(-0.1, 0.1);
  const Vec3 ext(0.2, 0.24, 0.25);
  std::vector<Keyframe> kfs;
  switch (kind) {
    case MotionKind::Static:
      kfs = {{0, face(Vec3(0, 0, z), ext)}, {10000, face(Vec3(U(-0.01, 0.01), 0, z), ext)}};
      break;
    case MotionKind::Slow:
      kfs = {{0, face(Vec3(-0.3, 0, z), ext)}, {5000, face(Vec3(0.3, 0.02, z), ext)},
             {10000, face(Vec3(-0.3, 0, z), ext)}};
      break;
    case MotionKind::Fast:
      for (std::int64_t t = 0, i = 0; t <= 10000; t += 400, ++i) {
        const double sx = (i % 2 == 0) ? -1 : 1;
        kfs.push_back({t, face(Vec3(sx * U(0.2, 0.28), sx * U(0.02, 0.06), z), ext)});
      }
      break;
  }
  s.people = {make_track(1, kfs)};
  s.gaze_schedule = {{3000, 6000, 1}};
  return s;
}

Scenario gen_intent(int bystanders, std::uint64_t seed) {
  if (bystanders != 1 && bystanders != 2) throw ValidationError("intent scenarios have 1 or 2 bystanders");
  SeededUniform U(seed * 15485863 + std::uint64_t(bystanders));
  Scenario s;
  s.kind = "intent" + std::to_string(bystanders);
  s.id = s.kind + "_s" + std::to_string(seed);
  s.frame_rate_hz = 30.0;
  s.stimulus_size = {640, 360};
  s.duration_ms = 20000;
  s.protected_person_id = 1;
  const double z = 2.0 + U(-0.05, 0.05);
  const Vec3 ext(0.2, 0.24, 0.25);
  const double x1 = bystanders == 1 ? 0.0 : -0.18;
  s.people.push_back(make_track(1, {{0, face(Vec3(x1, -0.05, z), ext)},
                                    {20000, face(Vec3(x1 + U(-0.02, 0.02), -0.05, z), ext)}}));
  if (bystanders == 2) {
    s.people.push_back(make_track(2, {{0, face(Vec3(0.18, -0.05, z + 0.05), ext)},
                                      {20000, face(Vec3(0.18 + U(-0.02, 0.02), -0.05, z + 0.05), ext)}}));
  }
  for (int i = 0; i < 6; ++i) {
    s.intent_events.push_back(
        {1, 2000 + 3000 * i, i % 2 == 0 ? Gesture::OpenPalm : Gesture::Victory, 1500});
  }
  return s;
}

}  // namespace petbench
