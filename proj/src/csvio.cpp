#include "petbench/csvio.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "petbench/errors.hpp"
#include "petbench/textdoc.hpp"

namespace petbench {

const std::vector<std::string> kCollectionColumns = {
    "timestamp_ms", "elapsed_ms", "frame",     "fps",       "head_px", "head_py", "head_pz",
    "head_qx",      "head_qy",    "head_qz",   "head_qw",   "marker_dx", "marker_dy", "marker_dz",
    "gaze_ox",      "gaze_oy",    "gaze_oz",   "gaze_dx",   "gaze_dy", "gaze_dz"};

const std::vector<std::string> kFrameColumns = {"frame",     "elapsed_ms",   "fps",           "t_face_ms",
                                                "t_hand_ms", "t_gesture_ms", "t_transform_ms", "t_marker_ms"};

const std::vector<std::string> kDetectionColumns = {"frame", "track_id", "x",     "y",          "w",
                                                    "h",     "depth_z",  "label", "obfuscated", "gt_person_id"};

const std::vector<std::string> kEventColumns = {"frame", "face_track_id", "gesture", "distance_px", "new_state"};

namespace {

std::vector<std::string> split_commas(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t c = line.find(',', start);
    out.emplace_back(line.substr(start, c == std::string_view::npos ? std::string_view::npos : c - start));
    if (c == std::string_view::npos) break;
    start = c + 1;
  }
  return out;
}

std::string join_header(const std::vector<std::string>& cols) {
  std::string s;
  for (std::size_t i = 0; i < cols.size(); ++i) s += (i ? "," : "") + cols[i];
  return s + "\n";
}

// Cell accessor bound to a row, so errors name the column and line.
class Row {
 public:
  Row(const CsvTable& t, std::size_t i) : t_(t), i_(i) {}
  const std::string& str(std::size_t c) const { return t_.rows[i_][c]; }
  double num(std::size_t c) const { return parse_double(str(c), line(), "column '" + t_.header[c] + "'"); }
  long long integer(std::size_t c) const { return parse_int(str(c), line(), "column '" + t_.header[c] + "'"); }
  bool flag(std::size_t c) const {
    if (str(c) == "0") return false;
    if (str(c) == "1") return true;
    throw ParseError("column '" + t_.header[c] + "' expects 0 or 1, got '" + str(c) + "'", line());
  }
  int line() const { return t_.lines[i_]; }
  [[noreturn]] void bad(std::size_t c) const {
    throw ParseError("invalid value '" + str(c) + "' in column '" + t_.header[c] + "'", line());
  }

 private:
  const CsvTable& t_;
  std::size_t i_;
};

class Writer {
 public:
  Writer& operator<<(double v) { return cell(format_number(v)); }
  Writer& operator<<(std::int64_t v) { return cell(std::to_string(v)); }
  Writer& operator<<(int v) { return cell(std::to_string(v)); }
  Writer& operator<<(std::string_view v) { return cell(std::string(v)); }
  void end_row() {
    out_ << '\n';
    first_ = true;
  }
  std::string str() const { return out_.str(); }
  explicit Writer(const std::vector<std::string>& header) { out_ << join_header(header); }

 private:
  Writer& cell(const std::string& s) {
    if (!first_) out_ << ',';
    out_ << s;
    first_ = false;
    return *this;
  }
  std::ostringstream out_;
  bool first_ = true;
};

}  // namespace

CsvTable read_csv(std::string_view text, const std::vector<std::string>& expected) {
  CsvTable t;
  int line_no = 0;
  std::size_t pos = 0;
  bool have_header = false;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    auto cells = split_commas(line);
    if (!have_header) {
      for (const auto& col : expected) {
        if (std::find(cells.begin(), cells.end(), col) == cells.end())
          throw ParseError("missing column '" + col + "'", line_no);
      }
      if (cells != expected) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
          if (i >= expected.size() || cells[i] != expected[i])
            throw ParseError("unexpected column '" + cells[i] + "' at position " + std::to_string(i + 1), line_no);
        }
      }
      t.header = cells;
      have_header = true;
      continue;
    }
    if (cells.size() != expected.size()) {
      throw ParseError("expected " + std::to_string(expected.size()) + " cells, got " + std::to_string(cells.size()),
                       line_no);
    }
    t.rows.push_back(std::move(cells));
    t.lines.push_back(line_no);
  }
  if (!have_header) throw ParseError("missing header");
  return t;
}

std::string write_collection_csv(const CollectionLog& log) {
  Writer w(kCollectionColumns);
  for (const auto& e : log.entries) {
    const auto& q = e.head.orientation;
    w << e.timestamp_ms << e.elapsed_ms << e.frame << e.fps << e.head.position.x() << e.head.position.y()
      << e.head.position.z() << q.x() << q.y() << q.z() << q.w() << e.marker_vec.x() << e.marker_vec.y()
      << e.marker_vec.z() << e.gaze.origin.x() << e.gaze.origin.y() << e.gaze.origin.z() << e.gaze.direction.x()
      << e.gaze.direction.y() << e.gaze.direction.z();
    w.end_row();
  }
  return w.str();
}

CollectionLog read_collection_csv(std::string_view text) {
  const CsvTable t = read_csv(text, kCollectionColumns);
  CollectionLog log;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    Row r(t, i);
    CollectionEntry e;
    e.timestamp_ms = r.integer(0);
    e.elapsed_ms = r.integer(1);
    e.frame = r.integer(2);
    e.fps = r.num(3);
    e.head.position = Vec3(r.num(4), r.num(5), r.num(6));
    e.head.orientation = Quat(r.num(10), r.num(7), r.num(8), r.num(9));
    e.marker_vec = Vec3(r.num(11), r.num(12), r.num(13));
    e.gaze.origin = Vec3(r.num(14), r.num(15), r.num(16));
    e.gaze.direction = Vec3(r.num(17), r.num(18), r.num(19));
    try {
      record(log, e);
    } catch (const OrderingError& err) {
      throw ParseError(err.what(), r.line());
    }
  }
  return log;
}

std::string write_frames_csv(const std::vector<FrameLogEntry>& frames) {
  Writer w(kFrameColumns);
  for (const auto& f : frames) {
    w << f.frame << f.elapsed_ms << f.fps;
    for (Stage s : kAllStages) w << f.module_time(s);
    w.end_row();
  }
  return w.str();
}

std::string write_detections_csv(const std::vector<FrameLogEntry>& frames) {
  Writer w(kDetectionColumns);
  for (const auto& f : frames) {
    for (const auto& d : f.detection_rows) {
      w << d.frame << d.track_id << d.box2d.x << d.box2d.y << d.box2d.w << d.box2d.h << d.depth_z
        << to_string(d.label) << (d.obfuscated ? 1 : 0) << d.gt_person_id;
      w.end_row();
    }
  }
  return w.str();
}

std::string write_events_csv(const std::vector<EventRow>& events) {
  Writer w(kEventColumns);
  for (const auto& e : events) {
    w << e.frame << e.face_track_id << to_string(e.gesture) << e.distance_px << (e.new_state ? 1 : 0);
    w.end_row();
  }
  return w.str();
}

std::vector<FrameLogEntry> read_frame_csvs(std::string_view frames_csv, std::string_view detections_csv) {
  const CsvTable ft = read_csv(frames_csv, kFrameColumns);
  std::vector<FrameLogEntry> frames;
  std::map<std::int64_t, std::size_t> index;
  for (std::size_t i = 0; i < ft.rows.size(); ++i) {
    Row r(ft, i);
    FrameLogEntry f;
    f.frame = r.integer(0);
    f.elapsed_ms = r.integer(1);
    f.fps = r.num(2);
    std::size_t c = 3;
    for (Stage s : kAllStages) {
      const double v = r.num(c++);
      if (v != 0.0) f.module_times_ms[s] = v;
    }
    if (!index.emplace(f.frame, frames.size()).second)
      throw ParseError("duplicate frame " + std::to_string(f.frame), r.line());
    frames.push_back(std::move(f));
  }
  const CsvTable dt = read_csv(detections_csv, kDetectionColumns);
  for (std::size_t i = 0; i < dt.rows.size(); ++i) {
    Row r(dt, i);
    DetectionRow d;
    d.frame = r.integer(0);
    d.track_id = int(r.integer(1));
    if (d.track_id < 0) r.bad(1);
    d.box2d = {r.num(2), r.num(3), r.num(4), r.num(5)};
    d.depth_z = r.num(6);
    if (r.str(7) == "subject") d.label = FaceLabel::Subject;
    else if (r.str(7) == "bystander") d.label = FaceLabel::Bystander;
    else r.bad(7);
    d.obfuscated = r.flag(8);
    d.gt_person_id = int(r.integer(9));
    auto it = index.find(d.frame);
    if (it == index.end()) throw ParseError("detection row for unknown frame " + std::to_string(d.frame), r.line());
    frames[it->second].detection_rows.push_back(d);
  }
  return frames;
}

std::vector<EventRow> read_events_csv(std::string_view text) {
  const CsvTable t = read_csv(text, kEventColumns);
  std::vector<EventRow> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    Row r(t, i);
    EventRow e;
    e.frame = r.integer(0);
    e.face_track_id = int(r.integer(1));
    if (r.str(2) == "OpenPalm") e.gesture = Gesture::OpenPalm;
    else if (r.str(2) == "Victory") e.gesture = Gesture::Victory;
    else r.bad(2);
    e.distance_px = r.num(3);
    e.new_state = r.flag(4);
    out.push_back(e);
  }
  return out;
}

}  // namespace petbench
