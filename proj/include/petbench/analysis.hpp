#pragma once

// Offline analysis of completed trials against scenario ground truth.

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "petbench/trial.hpp"

namespace petbench {

void validate(const CornerCalibration& cal);

/// Camera pixels to stimulus pixels: TL -> (0,0), BR -> (width,height).
Point2 map_camera_to_stimulus(const CornerCalibration& cal, Point2 p_cam);
Point2 map_stimulus_to_camera(const CornerCalibration& cal, Point2 p_stim);
Box2D map_camera_to_stimulus(const CornerCalibration& cal, const Box2D& b);
Box2D map_stimulus_to_camera(const CornerCalibration& cal, const Box2D& b);

enum class Verdict { Pass, Fail };
enum class PassClass { Stable, Recovered };             // P_s, P_r
enum class FailClass { Swapped, Lost, Drifted };        // F_s, F_l, F_d
std::string_view to_string(Verdict v);
std::string_view to_string(PassClass c);
std::string_view to_string(FailClass c);

struct FrameMapping {
  std::int64_t frame = 0;
  std::map<int, int> track_to_person;
};

struct TrialOutcome {
  Verdict verdict = Verdict::Pass;
  std::optional<PassClass> pass_class;
  std::optional<FailClass> fail_class;
  std::vector<FrameMapping> per_frame_mapping;

  std::string class_name() const;
};

struct ClassifyConfig {
  double iou_floor = 0.1;
  int recovery_gap = 10;
};

/// Per-frame track -> person mapping by maximum 2D IoU (>= iou_floor) in
/// stimulus space. Uses the trial's reference FoV, or identity if none.
std::vector<FrameMapping> map_tracks_to_people(const TrialLog& trial, const Scenario& s, double iou_floor = 0.1);

TrialOutcome classify_association(const TrialLog& trial, const Scenario& s, const ClassifyConfig& cfg = {});

struct IntentOutcome {
  IntentEvent event;
  bool achieved = false;
  std::optional<int> frames_to_enforce;
  std::optional<double> cost_proxy_ms;
};

inline constexpr int kDefaultEventWindow = 15;

std::vector<IntentOutcome> evaluate_intents(const TrialLog& trial, const Scenario& s,
                                            int event_window = kDefaultEventWindow, double iou_floor = 0.1);

struct FpsRow {
  std::string condition;
  double mean = 0;
  double stddev = 0;  // population
  std::size_t samples = 0;
};

/// Mean and stddev of per-frame fps over each group's concatenated frames.
std::vector<FpsRow> fps_summary(const std::map<std::string, std::vector<const TrialLog*>>& groups);

/// Mean per-frame fps over frames with elapsed_ms in [from_ms, to_ms).
double mean_fps(const TrialLog& trial, std::int64_t from_ms = 0,
                std::int64_t to_ms = std::numeric_limits<std::int64_t>::max());

std::string write_fps_summary_csv(const std::vector<FpsRow>& rows);

/// Stimulus frame k (at floor(k * 1000 / frame_rate) ms) paired with the log
/// entry chosen by the replay rule; frames before the first entry dropped.
std::vector<std::pair<int, const FrameLogEntry*>> align_logs_to_stimulus(const TrialLog& trial, const Scenario& s);

std::int64_t stimulus_frame_time_ms(const Scenario& s, int k);

struct OutcomeRecord {
  std::string variant;
  std::string scenario_kind;
  std::uint64_t seed = 0;
  TrialOutcome outcome;
};

struct Report {
  std::string results_csv;
  std::string report_txt;
};

/// results.csv plus a variant x scenario-kind grid whose cells read
/// `P (a P_s, b P_r) | F (c F_s, d F_l, e F_d)`, zero classes omitted.
Report generate_report(const std::vector<OutcomeRecord>& outcomes);

std::string format_pass_cell(int p_s, int p_r);
std::string format_fail_cell(int f_s, int f_l, int f_d);

}  // namespace petbench
