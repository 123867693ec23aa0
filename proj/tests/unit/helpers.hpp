#pragma once

#include <string>

#include "petbench/profile.hpp"
#include "petbench/scenario.hpp"

namespace testutil {

inline petbench::Box3D box_at(double x, double y, double z, double e = 0.2) {
  petbench::Box3D b;
  b.center = {x, y, z};
  b.extents = {e, e, e};
  return b;
}

inline petbench::PersonTrack still_person(int id, double x, double z, std::int64_t t0, std::int64_t t1) {
  petbench::PersonTrack p;
  p.person_id = id;
  p.keyframes = {{t0, box_at(x, 0, z)}, {t1, box_at(x, 0, z)}};
  p.visible_start_ms = t0;
  p.visible_end_ms = t1;
  return p;
}

/// Bare scenario with the given people, 30 Hz, 640x360 stimulus.
inline petbench::Scenario make_scenario(std::vector<petbench::PersonTrack> people, std::int64_t duration_ms = 1000) {
  petbench::Scenario s;
  s.id = "unit";
  s.duration_ms = duration_ms;
  s.people = std::move(people);
  return s;
}

inline std::string profile_path(const std::string& name) {
  return std::string(PETBENCH_PROFILE_DIR) + "/" + name + ".profile";
}

}  // namespace testutil
