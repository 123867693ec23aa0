#include "petbench/trial.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "petbench/csvio.hpp"
#include "petbench/errors.hpp"
#include "petbench/textdoc.hpp"

namespace petbench {

std::string_view to_string(RunMode m) {
  switch (m) {
    case RunMode::Baseline: return "baseline";
    case RunMode::Collect: return "collect";
    case RunMode::Replay: return "replay";
  }
  return "baseline";
}

std::optional<RunMode> parse_run_mode(std::string_view s) {
  for (RunMode m : {RunMode::Baseline, RunMode::Collect, RunMode::Replay})
    if (to_string(m) == s) return m;
  return std::nullopt;
}

PetComponents PetComponents::protect_all() {
  PetComponents c;
  c.detector = [](const FrameContext& ctx) {
    return detect_faces(*ctx.scenario, ctx.t_ms, *ctx.perception, *ctx.view);
  };
  c.decision = [](const Detection&, const FrameContext&) { return true; };
  c.transform = [](const FrameContext&, const Box2D& r) { return r; };
  return c;
}

CameraView RunConfig::camera_view(const Scenario& s) const {
  return view ? *view : CameraView::identity(s.stimulus_size);
}

void validate(const RunConfig& cfg) {
  if (cfg.sampling_interval < 0) throw ValidationError("sampling interval must be >= 0");
  if (cfg.ttl_init < 1) throw ValidationError("ttl must be >= 1");
  if (cfg.gaze_window < 1) throw ValidationError("gaze window must be >= 1");
  if (cfg.start_offset_ms < 0) throw ValidationError("start offset must be >= 0");
  if (!(cfg.perception.miss_prob >= 0 && cfg.perception.miss_prob <= 1))
    throw ValidationError("miss probability must be in [0, 1]");
  if (!(cfg.perception.noise_sigma_px >= 0)) throw ValidationError("noise sigma must be >= 0");
  if (std::abs(cfg.policy.hybrid_w_kpp + cfg.policy.hybrid_w_cd - 1.0) > 1e-9)
    throw ValidationError("hybrid weights must sum to 1");
  if (cfg.view) {
    const auto& v = *cfg.view;
    if (!(v.screen_bottom_right.x > v.screen_top_left.x && v.screen_bottom_right.y > v.screen_top_left.y))
      throw ValidationError("camera view corners are degenerate");
  }
}

namespace {

// ---- run loop ----

struct StepResult {
  ExecutedStages executed;
  std::vector<DetectionRow> rows;
  std::vector<EventRow> events;
};

Pose collection_head_pose() { return Pose{}; }

Vec3 marker_vector(const Pose& marker, const Pose& head) {
  return marker.orientation.normalized().inverse() * (marker.position - head.position);
}

Pose replay_start_pose(const Pose& target, const RunConfig& cfg) {
  Pose p;
  p.position = target.position + cfg.replay_start_offset_m;
  p.orientation =
      (Quat(Eigen::AngleAxisd(cfg.replay_start_yaw_deg * M_PI / 180.0, Vec3::UnitY())) * target.orientation)
          .normalized();
  return p;
}

template <class Step>
TrialLog run_loop(const Scenario& s, const HeadsetProfile& profile, const RunConfig& cfg,
                  const CollectionLog* input_log, Step&& step) {
  validate(s);
  validate(profile);
  validate(cfg);
  if (cfg.mode == RunMode::Replay && !input_log) throw Error("replay mode needs a collection log");

  TrialLog log;
  log.config = cfg;
  log.scenario_id = s.id;
  log.profile_name = profile.name;
  const CameraView view = cfg.camera_view(s);
  const CornerCalibration calibration = CornerCalibration::from_view(view, s.stimulus_size);
  if (cfg.mode != RunMode::Replay) log.reference_fov = calibration;
  if (cfg.mode == RunMode::Collect) {
    log.collection = CollectionLog{};
    log.collection->marker_pose_at_start = s.marker_pose;
  }

  const Pose head = collection_head_pose();
  AlignmentState align;
  if (cfg.mode == RunMode::Replay) {
    const Vec3 vec = input_log->entries.empty() ? marker_vector(s.marker_pose, head) : input_log->entries.front().marker_vec;
    align.target = compute_target_pose(s.marker_pose, vec);
    align.current = replay_start_pose(align.target, cfg);
  }

  double t = double(cfg.start_offset_ms);
  std::int64_t frame = 1;
  std::int64_t align_step = 0;
  while (t < double(s.duration_ms) || log.frames.empty()) {
    const auto ti = static_cast<std::int64_t>(std::floor(t));
    std::optional<GazeSample> gaze;
    if (cfg.mode == RunMode::Replay) {
      if (auto e = replay_at(*input_log, ti)) gaze = e->gaze;
    } else {
      gaze = gaze_at(s, ti, head);
    }

    StepResult r = step(ti, gaze, view);
    if (cfg.mode == RunMode::Collect) r.executed[Stage::Marker] = 1;
    if (cfg.mode == RunMode::Replay && align.marker_stage_enabled) {
      r.executed[Stage::Marker] = 1;
      ControllerStep cs = cfg.controller;
      cs.seed = hash_seed(cfg.seed, cfg.controller.seed);
      cs.step_index = align_step++;
      align = step_alignment(align, cs, cfg.tolerances);
      if (align.reference_fov_captured && !log.reference_fov) log.reference_fov = calibration;
    }

    FrameLogEntry entry;
    entry.frame = frame;
    entry.elapsed_ms = ti;
    for (const auto& [stage, count] : r.executed) {
      if (count < 0) throw ValidationError("stage counts must be >= 0");
      entry.module_times_ms[stage] = stage_time(profile, cfg.stack, stage, count);
    }
    const double ft = frame_time(profile, cfg.stack, r.executed);
    if (ft < 1.0) throw ValidationError("frame time below 1 ms cannot be logged at millisecond resolution");
    entry.fps = fps(ft);
    for (auto& row : r.rows) {
      row.frame = frame;
      entry.detection_rows.push_back(row);
    }
    for (auto& e : r.events) {
      e.frame = frame;
      log.events.push_back(e);
    }
    if (log.collection) {
      CollectionEntry c;
      c.timestamp_ms = cfg.wall_clock_start_ms + ti;
      c.elapsed_ms = ti;
      c.frame = frame;
      c.fps = entry.fps;
      c.head = head;
      c.marker_vec = marker_vector(s.marker_pose, head);
      c.gaze = gaze.value_or(GazeSample{head.position, head.forward()});
      record(*log.collection, c);
    }
    log.frames.push_back(std::move(entry));
    ++frame;
    t += ft;
  }
  return log;
}

}  // namespace

TrialLog run_trial(const Scenario& s, const HeadsetProfile& profile, const RunConfig& cfg,
                   const CollectionLog* input_log) {
  PerceptionConfig perception = cfg.perception;
  perception.seed = hash_seed(cfg.seed, cfg.perception.seed);
  if (cfg.pet == PetKind::Implicit) {
    ImplicitConfig ic;
    ic.sampling_interval = cfg.sampling_interval;
    ic.ttl_init = cfg.ttl_init;
    ic.gaze_window = cfg.gaze_window;
    ic.subject_threshold = cfg.subject_threshold;
    ic.noise_sigma_px = perception.noise_sigma_px;
    ic.image_width_px = s.stimulus_size.width;
    ic.policy = cfg.policy;
    ImplicitState state;
    return run_loop(s, profile, cfg, input_log,
                    [&](std::int64_t t, const std::optional<GazeSample>& gaze, const CameraView& view) {
                      const auto dets = detect_faces(s, t, perception, view);
                      auto out = implicit_step(state, double(t), dets, gaze, ic);
                      return StepResult{out.executed, out.rows, {}};
                    });
  }
  ExplicitState state;
  return run_loop(s, profile, cfg, input_log,
                  [&](std::int64_t t, const std::optional<GazeSample>&, const CameraView& view) {
                    const auto faces = detect_faces(s, t, perception, view);
                    const auto hands = detect_hands(s, t, perception, view);
                    auto out = explicit_step(state, faces, hands, cfg.explicit_cfg);
                    return StepResult{out.executed, out.rows, out.events};
                  });
}

TrialLog run_trial(const Scenario& s, const PetComponents& pet, const HeadsetProfile& profile,
                   const RunConfig& cfg, const CollectionLog* input_log) {
  if (!pet.detector || !pet.decision || !pet.transform) throw ValidationError("PET components incomplete");
  PerceptionConfig perception = cfg.perception;
  perception.seed = hash_seed(cfg.seed, cfg.perception.seed);
  return run_loop(s, profile, cfg, input_log,
                  [&](std::int64_t t, const std::optional<GazeSample>& gaze, const CameraView& view) {
                    FrameContext ctx{&s, t, gaze, &perception, &view};
                    StepResult r;
                    const auto dets = pet.detector(ctx);
                    r.executed[Stage::Face] = int(dets.size());
                    int regions = 0;
                    for (const auto& d : dets) {
                      const bool protect = pet.decision(d, ctx);
                      DetectionRow row;
                      row.track_id = d.det_id;
                      row.box2d = protect ? pet.transform(ctx, d.box2d) : d.box2d;
                      row.depth_z = d.box.center.z();
                      row.obfuscated = protect;
                      row.label = protect ? FaceLabel::Bystander : FaceLabel::Subject;
                      row.gt_person_id = d.gt_person_id;
                      regions += protect;
                      r.rows.push_back(row);
                    }
                    if (regions > 0) r.executed[Stage::Transform] = regions;
                    return r;
                  });
}

// ---- config text ----

std::string write_run_config(const RunConfig& c) {
  std::ostringstream o;
  auto num = [](double v) { return format_number(v); };
  o << "[run]\n";
  o << "mode " << to_string(c.mode) << "\n";
  o << "pet " << to_string(c.pet) << "\n";
  o << "sampling_interval " << c.sampling_interval << "\n";
  o << "stack " << to_string(c.stack) << "\n";
  o << "seed " << c.seed << "\n";
  o << "start_offset_ms " << c.start_offset_ms << "\n";
  o << "wall_clock_start_ms " << c.wall_clock_start_ms << "\n";
  o << "\n[perception]\n";
  o << "noise_sigma_px " << num(c.perception.noise_sigma_px) << "\n";
  o << "miss_prob " << num(c.perception.miss_prob) << "\n";
  o << "drop_occluded " << (c.perception.drop_occluded ? 1 : 0) << "\n";
  o << "seed " << c.perception.seed << "\n";
  o << "hand_jitter_px " << num(c.perception.hand_jitter_px) << "\n";
  o << "occlusion_iou " << num(c.perception.occlusion_iou) << "\n";
  o << "\n[implicit]\n";
  o << "policy " << to_string(c.policy.kind) << "\n";
  o << "hybrid_w_kpp " << num(c.policy.hybrid_w_kpp) << "\n";
  o << "hybrid_w_cd " << num(c.policy.hybrid_w_cd) << "\n";
  o << "ttl_init " << c.ttl_init << "\n";
  o << "gaze_window " << c.gaze_window << "\n";
  o << "subject_threshold " << c.subject_threshold << "\n";
  o << "\n[explicit]\n";
  o << "track_iou " << num(c.explicit_cfg.track_iou) << "\n";
  o << "pairing_factor " << num(c.explicit_cfg.pairing_factor) << "\n";
  o << "face_keep_frames " << c.explicit_cfg.face_keep_frames << "\n";
  o << "\n[alignment]\n";
  o << "start_offset_m " << num(c.replay_start_offset_m.x()) << " " << num(c.replay_start_offset_m.y()) << " "
    << num(c.replay_start_offset_m.z()) << "\n";
  o << "start_yaw_deg " << num(c.replay_start_yaw_deg) << "\n";
  o << "gain " << num(c.controller.gain) << "\n";
  o << "jitter_m " << num(c.controller.jitter_m) << "\n";
  o << "jitter_deg " << num(c.controller.jitter_deg) << "\n";
  o << "pos_tol_m " << num(c.tolerances.pos_tol_m) << "\n";
  o << "ang_tol_deg " << num(c.tolerances.ang_tol_deg) << "\n";
  if (c.view) {
    o << "\n[camera]\n";
    o << "size " << c.view->camera_size.width << " " << c.view->camera_size.height << "\n";
    o << "screen " << num(c.view->screen_top_left.x) << " " << num(c.view->screen_top_left.y) << " "
      << num(c.view->screen_bottom_right.x) << " " << num(c.view->screen_bottom_right.y) << "\n";
  }
  return o.str();
}

namespace {

template <class T>
void read_int(const TextSection* sec, std::string_view key, T& dst) {
  if (!sec) return;
  if (const TextRow* r = sec->find(key)) {
    r->expect_arity(2);
    dst = static_cast<T>(r->integer(1));
  }
}

void read_num(const TextSection* sec, std::string_view key, double& dst) {
  if (!sec) return;
  if (auto v = sec->number_or(key)) dst = *v;
}

template <class Parse>
void read_enum(const TextSection* sec, std::string_view key, Parse parse, auto& dst) {
  if (!sec) return;
  if (const TextRow* r = sec->find(key)) {
    r->expect_arity(2);
    auto v = parse(r->tokens[1]);
    if (!v) throw ParseError("invalid " + std::string(key) + " '" + r->tokens[1] + "'", r->line);
    dst = *v;
  }
}

}  // namespace

RunConfig parse_run_config(std::string_view text) {
  const TextDoc doc = parse_text_doc(text);
  RunConfig c;
  const TextSection* run = doc.find("run");
  read_enum(run, "mode", parse_run_mode, c.mode);
  read_enum(run, "pet", parse_pet_kind, c.pet);
  read_int(run, "sampling_interval", c.sampling_interval);
  read_enum(run, "stack", parse_model_stack, c.stack);
  read_int(run, "seed", c.seed);
  read_int(run, "start_offset_ms", c.start_offset_ms);
  read_int(run, "wall_clock_start_ms", c.wall_clock_start_ms);

  const TextSection* per = doc.find("perception");
  read_num(per, "noise_sigma_px", c.perception.noise_sigma_px);
  read_num(per, "miss_prob", c.perception.miss_prob);
  int drop = c.perception.drop_occluded;
  read_int(per, "drop_occluded", drop);
  c.perception.drop_occluded = drop != 0;
  read_int(per, "seed", c.perception.seed);
  read_num(per, "hand_jitter_px", c.perception.hand_jitter_px);
  read_num(per, "occlusion_iou", c.perception.occlusion_iou);

  const TextSection* imp = doc.find("implicit");
  read_enum(imp, "policy", parse_policy_kind, c.policy.kind);
  read_num(imp, "hybrid_w_kpp", c.policy.hybrid_w_kpp);
  read_num(imp, "hybrid_w_cd", c.policy.hybrid_w_cd);
  read_int(imp, "ttl_init", c.ttl_init);
  read_int(imp, "gaze_window", c.gaze_window);
  read_int(imp, "subject_threshold", c.subject_threshold);

  const TextSection* exp = doc.find("explicit");
  read_num(exp, "track_iou", c.explicit_cfg.track_iou);
  read_num(exp, "pairing_factor", c.explicit_cfg.pairing_factor);
  read_int(exp, "face_keep_frames", c.explicit_cfg.face_keep_frames);

  if (const TextSection* al = doc.find("alignment")) {
    if (const TextRow* r = al->find("start_offset_m")) {
      r->expect_arity(4);
      c.replay_start_offset_m = Vec3(r->number(1), r->number(2), r->number(3));
    }
    read_num(al, "start_yaw_deg", c.replay_start_yaw_deg);
    read_num(al, "gain", c.controller.gain);
    read_num(al, "jitter_m", c.controller.jitter_m);
    read_num(al, "jitter_deg", c.controller.jitter_deg);
    read_num(al, "pos_tol_m", c.tolerances.pos_tol_m);
    read_num(al, "ang_tol_deg", c.tolerances.ang_tol_deg);
  }
  if (const TextSection* cam = doc.find("camera")) {
    CameraView v;
    if (const TextRow* r = cam->find("size")) {
      r->expect_arity(3);
      v.camera_size = {int(r->integer(1)), int(r->integer(2))};
    }
    const TextRow* r = cam->find("screen");
    if (!r) throw ParseError("[camera] needs a screen row", cam->line);
    r->expect_arity(5);
    v.screen_top_left = {r->number(1), r->number(2)};
    v.screen_bottom_right = {r->number(3), r->number(4)};
    c.view = v;
  }
  validate(c);
  return c;
}

// ---- trial directory ----

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
  if (!out) throw Error("write failed for " + path.string());
}

void write_trial_dir(const TrialLog& log, const Scenario& s, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file(dir / "frames.csv", write_frames_csv(log.frames));
  write_file(dir / "detections.csv", write_detections_csv(log.frames));
  if (log.config.pet == PetKind::Explicit) write_file(dir / "events.csv", write_events_csv(log.events));
  if (log.collection) write_file(dir / "collection.csv", write_collection_csv(*log.collection));
  write_file(dir / "scenario.txt", write_scenario(s));

  std::ostringstream o;
  o << "[trial]\n";
  o << "scenario_id " << log.scenario_id << "\n";
  o << "profile " << log.profile_name << "\n";
  if (log.reference_fov) {
    const auto& c = *log.reference_fov;
    o << "reference_fov " << format_number(c.stimulus_top_left.x) << " " << format_number(c.stimulus_top_left.y)
      << " " << format_number(c.stimulus_bottom_right.x) << " " << format_number(c.stimulus_bottom_right.y) << " "
      << c.stimulus_size.width << " " << c.stimulus_size.height << "\n";
  }
  o << "\n" << write_run_config(log.config);
  write_file(dir / "trial.cfg", o.str());
}

LoadedTrial read_trial_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw Error("not a trial directory: " + dir.string());
  LoadedTrial out;
  const std::string cfg_text = read_file(dir / "trial.cfg");
  const TextDoc doc = parse_text_doc(cfg_text);
  const TextSection* trial = doc.find("trial");
  if (!trial) throw ParseError("trial.cfg: missing [trial] section");
  out.log.scenario_id = trial->string("scenario_id");
  out.log.profile_name = trial->string("profile");
  if (const TextRow* r = trial->find("reference_fov")) {
    r->expect_arity(7);
    out.log.reference_fov =
        CornerCalibration{{r->number(1), r->number(2)}, {r->number(3), r->number(4)}, {int(r->integer(5)), int(r->integer(6))}};
  }
  out.log.config = parse_run_config(cfg_text);
  out.log.frames = read_frame_csvs(read_file(dir / "frames.csv"), read_file(dir / "detections.csv"));
  if (std::filesystem::exists(dir / "events.csv")) out.log.events = read_events_csv(read_file(dir / "events.csv"));
  if (std::filesystem::exists(dir / "collection.csv"))
    out.log.collection = read_collection_csv(read_file(dir / "collection.csv"));
  out.scenario = parse_scenario(read_file(dir / "scenario.txt"));
  return out;
}

}  // namespace petbench
