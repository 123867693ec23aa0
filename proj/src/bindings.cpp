#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "petbench/analysis.hpp"
#include "petbench/csvio.hpp"
#include "petbench/errors.hpp"
#include "petbench/overlay.hpp"
#include "petbench/trial.hpp"

namespace py = pybind11;
using namespace petbench;

namespace {

Scenario generate(const std::string& kind, std::uint64_t seed, const std::vector<int>& loads, std::int64_t segment_ms) {
  if (auto e = parse_edge_case_kind(kind)) return gen_edge_case(*e, seed);
  if (kind == "static") return gen_motion(MotionKind::Static, seed);
  if (kind == "slow") return gen_motion(MotionKind::Slow, seed);
  if (kind == "fast") return gen_motion(MotionKind::Fast, seed);
  if (kind == "intent1") return gen_intent(1, seed);
  if (kind == "intent2") return gen_intent(2, seed);
  if (kind == "load") return gen_load_sequence(loads, segment_ms);
  throw py::value_error("unknown scenario kind '" + kind + "'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Record-replay harness for bystander privacy PETs";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<OrderingError>(m, "OrderingError", base.ptr());

  py::enum_<RunMode>(m, "RunMode")
      .value("Baseline", RunMode::Baseline)
      .value("Collect", RunMode::Collect)
      .value("Replay", RunMode::Replay);
  py::enum_<PetKind>(m, "PetKind").value("Implicit", PetKind::Implicit).value("Explicit", PetKind::Explicit);
  py::enum_<ModelStack>(m, "ModelStack").value("High", ModelStack::High).value("Low", ModelStack::Low);
  py::enum_<PolicyKind>(m, "PolicyKind")
      .value("Baseline", PolicyKind::BaselineOverlap)
      .value("NPP", PolicyKind::NPP)
      .value("KPP", PolicyKind::KPP)
      .value("CD", PolicyKind::CD)
      .value("Hybrid", PolicyKind::Hybrid);
  py::enum_<Stage>(m, "Stage")
      .value("Face", Stage::Face)
      .value("Hand", Stage::Hand)
      .value("Gesture", Stage::Gesture)
      .value("Transform", Stage::Transform)
      .value("Marker", Stage::Marker);

  py::class_<Scenario>(m, "Scenario")
      .def_readonly("id", &Scenario::id)
      .def_readonly("kind", &Scenario::kind)
      .def_readonly("duration_ms", &Scenario::duration_ms)
      .def_readonly("frame_rate_hz", &Scenario::frame_rate_hz)
      .def_property_readonly("person_ids",
                             [](const Scenario& s) {
                               std::vector<int> ids;
                               for (const auto& p : s.people) ids.push_back(p.person_id);
                               return ids;
                             })
      .def_property_readonly("protected_person_id", [](const Scenario& s) { return s.protected_person_id; })
      .def("to_text", &write_scenario)
      .def("save", &save_scenario, py::arg("path"))
      .def_static("parse", &parse_scenario, py::arg("text"))
      .def_static("load", &load_scenario, py::arg("path"));

  m.def("generate_scenario", &generate, py::arg("kind"), py::arg("seed") = 1,
        py::arg("loads") = std::vector<int>{1, 2, 3, 4, 5, 7, 8, 10, 12}, py::arg("segment_ms") = 10000,
        "Generated stimulus: overlap, cross-slow, cross-fast, static, slow, fast, intent1, intent2 or load.");

  py::class_<HeadsetProfile>(m, "HeadsetProfile")
      .def_readwrite("name", &HeadsetProfile::name)
      .def_readwrite("overhead_ms", &HeadsetProfile::overhead_ms)
      .def_readwrite("face_base_ms", &HeadsetProfile::face_base_ms)
      .def_readwrite("face_per_candidate_ms", &HeadsetProfile::face_per_candidate_ms)
      .def_readwrite("hand_base_ms", &HeadsetProfile::hand_base_ms)
      .def_readwrite("gesture_base_ms", &HeadsetProfile::gesture_base_ms)
      .def_readwrite("transform_per_region_ms", &HeadsetProfile::transform_per_region_ms)
      .def_readwrite("marker_ms", &HeadsetProfile::marker_ms)
      .def("to_text", &write_profile)
      .def_static("parse", &parse_profile, py::arg("text"), py::arg("pet") = PetKind::Implicit)
      .def_static("load", &load_profile, py::arg("path"), py::arg("pet") = PetKind::Implicit);

  m.def("frame_time", &frame_time, py::arg("profile"), py::arg("stack"), py::arg("executed"));
  m.def("fps", &fps, py::arg("frame_time_ms"));
  m.def("best_interval", &best_interval, py::arg("sweep"), py::arg("epsilon") = 0.10);

  py::class_<PerceptionConfig>(m, "PerceptionConfig")
      .def(py::init<>())
      .def_readwrite("noise_sigma_px", &PerceptionConfig::noise_sigma_px)
      .def_readwrite("miss_prob", &PerceptionConfig::miss_prob)
      .def_readwrite("drop_occluded", &PerceptionConfig::drop_occluded)
      .def_readwrite("seed", &PerceptionConfig::seed)
      .def_readwrite("hand_jitter_px", &PerceptionConfig::hand_jitter_px)
      .def_static("perfect", &PerceptionConfig::perfect, py::arg("seed") = 0);

  py::class_<RunConfig>(m, "RunConfig")
      .def(py::init<>())
      .def_readwrite("mode", &RunConfig::mode)
      .def_readwrite("pet", &RunConfig::pet)
      .def_readwrite("sampling_interval", &RunConfig::sampling_interval)
      .def_readwrite("stack", &RunConfig::stack)
      .def_readwrite("seed", &RunConfig::seed)
      .def_readwrite("perception", &RunConfig::perception)
      .def_readwrite("start_offset_ms", &RunConfig::start_offset_ms)
      .def_property(
          "policy", [](const RunConfig& c) { return c.policy.kind; },
          [](RunConfig& c, PolicyKind k) { c.policy.kind = k; })
      .def("to_text", &write_run_config)
      .def_static("parse", &parse_run_config, py::arg("text"));

  py::class_<DetectionRow>(m, "DetectionRow")
      .def_readonly("frame", &DetectionRow::frame)
      .def_readonly("track_id", &DetectionRow::track_id)
      .def_property_readonly("box",
                             [](const DetectionRow& r) { return std::tuple(r.box2d.x, r.box2d.y, r.box2d.w, r.box2d.h); })
      .def_readonly("depth_z", &DetectionRow::depth_z)
      .def_property_readonly("label", [](const DetectionRow& r) { return std::string(to_string(r.label)); })
      .def_readonly("obfuscated", &DetectionRow::obfuscated)
      .def_readonly("gt_person_id", &DetectionRow::gt_person_id);

  py::class_<FrameLogEntry>(m, "FrameLogEntry")
      .def_readonly("frame", &FrameLogEntry::frame)
      .def_readonly("elapsed_ms", &FrameLogEntry::elapsed_ms)
      .def_readonly("fps", &FrameLogEntry::fps)
      .def_readonly("module_times_ms", &FrameLogEntry::module_times_ms)
      .def_readonly("detection_rows", &FrameLogEntry::detection_rows);

  py::class_<CollectionEntry>(m, "CollectionEntry")
      .def_readonly("timestamp_ms", &CollectionEntry::timestamp_ms)
      .def_readonly("elapsed_ms", &CollectionEntry::elapsed_ms)
      .def_readonly("frame", &CollectionEntry::frame)
      .def_readonly("fps", &CollectionEntry::fps)
      .def_property_readonly("gaze_direction", [](const CollectionEntry& e) {
        return std::tuple(e.gaze.direction.x(), e.gaze.direction.y(), e.gaze.direction.z());
      });

  py::class_<CollectionLog>(m, "CollectionLog")
      .def_readonly("entries", &CollectionLog::entries)
      .def("to_csv", &write_collection_csv)
      .def_static("from_csv", &read_collection_csv, py::arg("text"));
  m.def("replay_at", &replay_at, py::arg("log"), py::arg("t_ms"),
        "Most recent entry with elapsed_ms <= t_ms; holds the last entry; None before the first.");

  py::class_<TrialLog>(m, "TrialLog")
      .def_readonly("frames", &TrialLog::frames)
      .def_readonly("config", &TrialLog::config)
      .def_readonly("scenario_id", &TrialLog::scenario_id)
      .def_readonly("profile_name", &TrialLog::profile_name)
      .def_readonly("collection", &TrialLog::collection)
      .def("frames_csv", [](const TrialLog& t) { return write_frames_csv(t.frames); })
      .def("detections_csv", [](const TrialLog& t) { return write_detections_csv(t.frames); })
      .def("mean_fps", [](const TrialLog& t, std::int64_t from) { return mean_fps(t, from); }, py::arg("from_ms") = 0);

  m.def(
      "run_trial",
      [](const Scenario& s, const HeadsetProfile& p, const RunConfig& cfg, const CollectionLog* input) {
        py::gil_scoped_release release;
        return run_trial(s, p, cfg, input);
      },
      py::arg("scenario"), py::arg("profile"), py::arg("config"), py::arg("input_log") = nullptr);
  m.def("write_trial_dir", &write_trial_dir, py::arg("log"), py::arg("scenario"), py::arg("dir"));
  m.def(
      "read_trial_dir",
      [](const std::filesystem::path& dir) {
        LoadedTrial t = read_trial_dir(dir);
        return std::pair(std::move(t.log), std::move(t.scenario));
      },
      py::arg("dir"));

  py::class_<TrialOutcome>(m, "TrialOutcome")
      .def_property_readonly("verdict", [](const TrialOutcome& o) { return std::string(to_string(o.verdict)); })
      .def_property_readonly("outcome_class", &TrialOutcome::class_name)
      .def_property_readonly("per_frame_mapping", [](const TrialOutcome& o) {
        std::vector<std::pair<std::int64_t, std::map<int, int>>> out;
        for (const auto& f : o.per_frame_mapping) out.emplace_back(f.frame, f.track_to_person);
        return out;
      });
  m.def(
      "classify_association",
      [](const TrialLog& t, const Scenario& s, double iou_floor, int recovery_gap) {
        return classify_association(t, s, ClassifyConfig{iou_floor, recovery_gap});
      },
      py::arg("trial"), py::arg("scenario"), py::arg("iou_floor") = 0.1, py::arg("recovery_gap") = 10);

  m.def(
      "evaluate_intents",
      [](const TrialLog& t, const Scenario& s, int window) {
        py::list out;
        for (const auto& o : evaluate_intents(t, s, window)) {
          py::dict d;
          d["person_id"] = o.event.person_id;
          d["t_ms"] = o.event.t_ms;
          d["gesture"] = std::string(to_string(o.event.gesture));
          d["achieved"] = o.achieved;
          d["frames_to_enforce"] = o.frames_to_enforce;
          d["cost_proxy_ms"] = o.cost_proxy_ms;
          out.append(d);
        }
        return out;
      },
      py::arg("trial"), py::arg("scenario"), py::arg("event_window") = kDefaultEventWindow);

  m.def(
      "generate_report",
      [](const std::vector<std::tuple<std::string, std::string, std::uint64_t, TrialOutcome>>& rows) {
        std::vector<OutcomeRecord> recs;
        for (const auto& [v, k, seed, o] : rows) recs.push_back({v, k, seed, o});
        const Report r = generate_report(recs);
        return std::pair(r.results_csv, r.report_txt);
      },
      py::arg("outcomes"), "Returns (results_csv, report_txt) for (variant, kind, seed, outcome) tuples.");

  m.def(
      "fps_summary_csv",
      [](const std::map<std::string, std::vector<const TrialLog*>>& groups) {
        return write_fps_summary_csv(fps_summary(groups));
      },
      py::arg("groups"));

  m.def(
      "map_camera_to_stimulus",
      [](std::pair<double, double> tl, std::pair<double, double> br, std::pair<int, int> size,
         std::pair<double, double> p) {
        const CornerCalibration cal{{tl.first, tl.second}, {br.first, br.second}, {size.first, size.second}};
        const Point2 q = map_camera_to_stimulus(cal, Point2{p.first, p.second});
        return std::pair(q.x, q.y);
      },
      py::arg("top_left"), py::arg("bottom_right"), py::arg("stimulus_size"), py::arg("point"));

  m.def(
      "render_overlays",
      [](const TrialLog& t, const Scenario& s, const std::filesystem::path& dir, int stride, double scale) {
        const CornerCalibration cal = t.reference_fov.value_or(
            CornerCalibration::from_view(CameraView::identity(s.stimulus_size), s.stimulus_size));
        OverlayOptions opt;
        opt.stride = stride;
        opt.scale = scale;
        return render_overlays(s, align_logs_to_stimulus(t, s), cal, dir, opt);
      },
      py::arg("trial"), py::arg("scenario"), py::arg("dir"), py::arg("stride") = 1, py::arg("scale") = 1.0);
}
