#pragma once

// Headset cost model: per-stage affine millisecond costs that turn the
// stages a PET executed on a frame into frame time and FPS.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "petbench/recordreplay.hpp"

namespace petbench {

enum class ModelStack { High, Low };
std::string_view to_string(ModelStack s);
std::optional<ModelStack> parse_model_stack(std::string_view s);

enum class PetKind { Implicit, Explicit };
std::string_view to_string(PetKind k);
std::optional<PetKind> parse_pet_kind(std::string_view s);

struct HeadsetProfile {
  std::string name;
  double overhead_ms = 0;
  double face_base_ms = 0;
  double face_per_candidate_ms = 0;
  double hand_base_ms = 0;
  double gesture_base_ms = 0;
  double transform_per_region_ms = 0;
  double marker_ms = 0;
  std::map<ModelStack, std::map<Stage, double>> stack_multipliers;

  double multiplier(ModelStack stack, Stage stage) const;
};

void validate(const HeadsetProfile& p);

/// Stage -> unit count for the stages that ran this frame. A stage present
/// with count 0 still pays its base cost.
using ExecutedStages = std::map<Stage, int>;

/// Cost of one executed stage, multiplier applied.
double stage_time(const HeadsetProfile& p, ModelStack stack, Stage stage, int count);
double frame_time(const HeadsetProfile& p, ModelStack stack, const ExecutedStages& executed);
double fps(double frame_time_ms);

/// Smallest interval whose FPS is within epsilon (relative) of every larger
/// tested interval's FPS.
int best_interval(const std::map<int, double>& sweep, double epsilon = 0.10);

/// Profile files hold a base cost table used by the implicit PET and an
/// optional [pipeline explicit] section overriding costs for the explicit
/// PET's heavier perception stack. Stack multipliers are shared.
HeadsetProfile parse_profile(std::string_view text, PetKind pet = PetKind::Implicit);
HeadsetProfile load_profile(const std::filesystem::path& path, PetKind pet = PetKind::Implicit);
std::string write_profile(const HeadsetProfile& p);

}  // namespace petbench
