#pragma once

// Scripted ground-truth worlds: people moving as 3D face volumes, scripted
// gaze and intent gestures, and the spatial marker pose.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "petbench/geometry.hpp"

namespace petbench {

enum class Gesture { OpenPalm, Victory, None };

std::string_view to_string(Gesture g);
Gesture parse_gesture(std::string_view s);

struct Keyframe {
  std::int64_t t_ms = 0;
  Box3D box;
};

struct PersonTrack {
  int person_id = 0;
  std::vector<Keyframe> keyframes;
  std::int64_t visible_start_ms = 0;
  std::int64_t visible_end_ms = 0;
};

struct IntentEvent {
  int person_id = 0;
  std::int64_t t_ms = 0;
  Gesture gesture = Gesture::OpenPalm;
  std::int64_t hold_ms = 0;

  std::int64_t end_ms() const { return t_ms + hold_ms; }
};

struct GazeDirective {
  std::int64_t t_start_ms = 0;
  std::int64_t t_end_ms = 0;
  std::optional<int> target_person_id;
};

struct Scenario {
  std::string id;
  std::string kind;  // generator kind, empty for hand-written files
  std::int64_t duration_ms = 0;
  double frame_rate_hz = 30.0;
  Size2 stimulus_size{640, 360};
  std::optional<int> protected_person_id;
  std::vector<PersonTrack> people;
  std::vector<IntentEvent> intent_events;
  std::vector<GazeDirective> gaze_schedule;
  Pose marker_pose;

  const PersonTrack* person(int id) const;
};

struct VisiblePerson {
  int person_id = 0;
  Box3D box;
  bool occluded = false;
};

inline constexpr double kDefaultOcclusionIou = 0.30;

/// Throws ValidationError naming the first violated invariant.
void validate(const Scenario& s);

Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::filesystem::path& path);
std::string write_scenario(const Scenario& s);
void save_scenario(const Scenario& s, const std::filesystem::path& path);

/// Linear keyframe interpolation; nullopt outside the visible interval.
std::optional<Box3D> sample_box(const PersonTrack& track, std::int64_t t_ms);

/// People visible at t. A person is occluded when its projection has IoU >=
/// occlusion_iou with some visible person that is strictly nearer.
std::vector<VisiblePerson> visible_people(const Scenario& s, std::int64_t t_ms,
                                          double occlusion_iou = kDefaultOcclusionIou);

enum class EdgeCaseKind { Overlap, CrossSlow, CrossFast };
enum class MotionKind { Static, Slow, Fast };

std::string_view to_string(EdgeCaseKind k);
std::optional<EdgeCaseKind> parse_edge_case_kind(std::string_view s);
std::string_view to_string(MotionKind k);

/// Two-person occlusion stimuli. Person 1 is nearer, person 2 is the
/// protected bystander.
Scenario gen_edge_case(EdgeCaseKind kind, std::uint64_t seed);

inline constexpr std::int64_t kDefaultLoadGapMs = 1000;

/// Sequential segments with loads[i] concurrently visible people each,
/// separated by blank gaps.
Scenario gen_load_sequence(const std::vector<int>& loads, std::int64_t segment_ms,
                           std::int64_t gap_ms = kDefaultLoadGapMs);

/// Start/end of segment i in a gen_load_sequence() scenario.
std::pair<std::int64_t, std::int64_t> load_segment_window(std::size_t i, std::int64_t segment_ms,
                                                          std::int64_t gap_ms = kDefaultLoadGapMs);

/// Single person whose face moves with the given head-motion regime; the
/// wearer gazes at them for a few seconds mid-trial.
Scenario gen_motion(MotionKind kind, std::uint64_t seed);

/// Scripted opt-in/opt-out gesture sequence performed by person 1. With
/// bystanders == 2 a second, silent person stands next to them.
Scenario gen_intent(int bystanders, std::uint64_t seed);

}  // namespace petbench
