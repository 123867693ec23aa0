#include "petbench/profile.hpp"

#include <fstream>
#include <sstream>

#include "petbench/errors.hpp"
#include "petbench/textdoc.hpp"

namespace petbench {

std::string_view to_string(ModelStack s) { return s == ModelStack::High ? "high" : "low"; }

std::optional<ModelStack> parse_model_stack(std::string_view s) {
  if (s == "high" || s == "High") return ModelStack::High;
  if (s == "low" || s == "Low") return ModelStack::Low;
  return std::nullopt;
}

std::string_view to_string(PetKind k) { return k == PetKind::Implicit ? "implicit" : "explicit"; }

std::optional<PetKind> parse_pet_kind(std::string_view s) {
  if (s == "implicit") return PetKind::Implicit;
  if (s == "explicit") return PetKind::Explicit;
  return std::nullopt;
}

double HeadsetProfile::multiplier(ModelStack stack, Stage stage) const {
  auto it = stack_multipliers.find(stack);
  if (it == stack_multipliers.end()) return 1.0;
  auto jt = it->second.find(stage);
  return jt == it->second.end() ? 1.0 : jt->second;
}

void validate(const HeadsetProfile& p) {
  const std::pair<const char*, double> costs[] = {
      {"overhead_ms", p.overhead_ms},         {"face_base_ms", p.face_base_ms},
      {"face_per_candidate_ms", p.face_per_candidate_ms}, {"hand_base_ms", p.hand_base_ms},
      {"gesture_base_ms", p.gesture_base_ms}, {"transform_per_region_ms", p.transform_per_region_ms},
      {"marker_ms", p.marker_ms}};
  for (auto [name, v] : costs)
    if (!(v >= 0)) throw ValidationError(std::string("profile cost ") + name + " must be >= 0");
  for (const auto& [stack, m] : p.stack_multipliers)
    for (const auto& [stage, f] : m)
      if (!(f > 0))
        throw ValidationError("multiplier for " + std::string(to_string(stage)) + " must be > 0");
}

double stage_time(const HeadsetProfile& p, ModelStack stack, Stage stage, int count) {
  double base = 0, per_unit = 0;
  switch (stage) {
    case Stage::Face: base = p.face_base_ms; per_unit = p.face_per_candidate_ms; break;
    case Stage::Hand: base = p.hand_base_ms; break;
    case Stage::Gesture: base = p.gesture_base_ms; break;
    case Stage::Transform: per_unit = p.transform_per_region_ms; break;
    case Stage::Marker: base = p.marker_ms; break;
  }
  return p.multiplier(stack, stage) * (base + per_unit * count);
}

double frame_time(const HeadsetProfile& p, ModelStack stack, const ExecutedStages& executed) {
  double t = p.overhead_ms;
  for (const auto& [stage, count] : executed) {
    if (count < 0) throw ValidationError("stage counts must be >= 0");
    t += stage_time(p, stack, stage, count);
  }
  return t;
}

double fps(double frame_time_ms) {
  if (!(frame_time_ms > 0)) throw ValidationError("frame time must be positive");
  return 1000.0 / frame_time_ms;
}

int best_interval(const std::map<int, double>& sweep, double epsilon) {
  if (sweep.empty()) throw ValidationError("best_interval needs a non-empty sweep");
  for (auto it = sweep.begin(); it != sweep.end(); ++it) {
    bool plateau = true;
    for (auto jt = std::next(it); jt != sweep.end(); ++jt) {
      if (!(jt->second - it->second < epsilon * it->second)) {
        plateau = false;
        break;
      }
    }
    if (plateau) return it->first;
  }
  return sweep.rbegin()->first;
}

namespace {

void read_costs(const TextSection& sec, HeadsetProfile& p) {
  const std::pair<const char*, double*> keys[] = {
      {"overhead_ms", &p.overhead_ms},
      {"face_base_ms", &p.face_base_ms},
      {"face_per_candidate_ms", &p.face_per_candidate_ms},
      {"hand_base_ms", &p.hand_base_ms},
      {"gesture_base_ms", &p.gesture_base_ms},
      {"transform_per_region_ms", &p.transform_per_region_ms},
      {"marker_ms", &p.marker_ms}};
  for (const auto& row : sec.rows) {
    if (row.key() == "name") continue;
    bool known = false;
    for (auto [k, dst] : keys) {
      if (row.key() == k) {
        row.expect_arity(2);
        *dst = row.number(1);
        known = true;
      }
    }
    if (!known) throw ParseError("unknown profile key '" + row.key() + "'", row.line);
  }
}

std::optional<Stage> parse_stage(std::string_view s) {
  for (Stage st : kAllStages)
    if (to_string(st) == s) return st;
  return std::nullopt;
}

}  // namespace

HeadsetProfile parse_profile(std::string_view text, PetKind pet) {
  const TextDoc doc = parse_text_doc(text);
  const TextSection* base = doc.find("profile");
  if (!base) throw ParseError("missing [profile] section");
  HeadsetProfile p;
  p.name = base->string("name");
  for (const char* required : {"overhead_ms", "face_base_ms", "face_per_candidate_ms", "hand_base_ms",
                               "gesture_base_ms", "transform_per_region_ms", "marker_ms"})
    base->number(required);
  read_costs(*base, p);
  for (const TextSection* sec : doc.all("stack")) {
    if (sec->args.size() != 1) throw ParseError("[stack] needs High or Low", sec->line);
    auto stack = parse_model_stack(sec->args[0]);
    if (!stack) throw ParseError("unknown stack '" + sec->args[0] + "'", sec->line);
    auto& m = p.stack_multipliers[*stack];
    for (const auto& row : sec->rows) {
      row.expect_arity(2);
      auto stage = parse_stage(row.key());
      if (!stage) throw ParseError("unknown stage '" + row.key() + "'", row.line);
      m[*stage] = row.number(1);
    }
  }
  for (const TextSection* sec : doc.all("pipeline")) {
    if (sec->args.size() != 1 || !parse_pet_kind(sec->args[0]))
      throw ParseError("[pipeline] needs implicit or explicit", sec->line);
    if (parse_pet_kind(sec->args[0]) == pet) read_costs(*sec, p);
  }
  validate(p);
  return p;
}

HeadsetProfile load_profile(const std::filesystem::path& path, PetKind pet) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open profile " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_profile(ss.str(), pet);
}

std::string write_profile(const HeadsetProfile& p) {
  std::ostringstream o;
  o << "[profile]\nname " << p.name << "\n";
  o << "overhead_ms " << format_number(p.overhead_ms) << "\n";
  o << "face_base_ms " << format_number(p.face_base_ms) << "\n";
  o << "face_per_candidate_ms " << format_number(p.face_per_candidate_ms) << "\n";
  o << "hand_base_ms " << format_number(p.hand_base_ms) << "\n";
  o << "gesture_base_ms " << format_number(p.gesture_base_ms) << "\n";
  o << "transform_per_region_ms " << format_number(p.transform_per_region_ms) << "\n";
  o << "marker_ms " << format_number(p.marker_ms) << "\n";
  for (const auto& [stack, m] : p.stack_multipliers) {
    o << "\n[stack " << (stack == ModelStack::High ? "High" : "Low") << "]\n";
    for (const auto& [stage, f] : m) o << to_string(stage) << " " << format_number(f) << "\n";
  }
  return o.str();
}

}  // namespace petbench
