// petbench command-line driver: scenario generation, collection, replay,
// sweeps, analysis and overlay rendering.

#include <algorithm>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "petbench/analysis.hpp"
#include "petbench/csvio.hpp"
#include "petbench/errors.hpp"
#include "petbench/overlay.hpp"
#include "petbench/textdoc.hpp"
#include "petbench/trial.hpp"

#ifndef PETBENCH_PROFILE_DIR
#define PETBENCH_PROFILE_DIR "profiles"
#endif

namespace fs = std::filesystem;
using namespace petbench;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const std::vector<std::string> kGeneratorKinds{"overlap", "cross-slow", "cross-fast", "static", "slow",
                                               "fast",    "intent1",    "intent2",    "load"};
const std::vector<int> kDefaultLoads{1, 2, 3, 4, 5, 7, 8, 10, 12};

struct Globals {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
};

// Run-time overrides shared by collect, replay and sweep.
struct RunFlags {
  std::string pet, policy, stack, mode;
  std::optional<int> interval;
  std::optional<std::int64_t> start_offset_ms;
  bool perfect = false;
};

struct Loaded {
  RunConfig run;
  TextDoc doc;
  fs::path base = ".";
};

Loaded load_config(const Globals& g) {
  Loaded l;
  if (g.config.empty()) return l;
  const std::string text = read_file(g.config);
  l.run = parse_run_config(text);
  l.doc = parse_text_doc(text);
  l.base = fs::path(g.config).parent_path();
  return l;
}

std::vector<std::string> values(const TextDoc& doc, std::string_view section, std::string_view key) {
  const TextSection* sec = doc.find(section);
  if (!sec) return {};
  const TextRow* r = sec->find(key);
  if (!r) return {};
  return {r->tokens.begin() + 1, r->tokens.end()};
}

std::optional<std::string> value(const TextDoc& doc, std::string_view section, std::string_view key) {
  auto v = values(doc, section, key);
  if (v.empty()) return std::nullopt;
  return v.front();
}

fs::path relative_to(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

std::string out_dir(const Globals& g, const std::string& fallback) { return g.out.empty() ? fallback : g.out; }

template <class T, class Parse>
T parse_or_usage(const std::string& s, Parse parse, const char* what) {
  auto v = parse(s);
  if (!v) throw UsageError(std::string("invalid ") + what + " '" + s + "'");
  return *v;
}

void apply(RunConfig& cfg, const RunFlags& f, const Globals& g) {
  if (!f.pet.empty()) cfg.pet = parse_or_usage<PetKind>(f.pet, parse_pet_kind, "pet");
  if (!f.policy.empty()) cfg.policy.kind = parse_or_usage<PolicyKind>(f.policy, parse_policy_kind, "policy");
  if (!f.stack.empty()) cfg.stack = parse_or_usage<ModelStack>(f.stack, parse_model_stack, "stack");
  if (f.interval) cfg.sampling_interval = *f.interval;
  if (f.start_offset_ms) cfg.start_offset_ms = *f.start_offset_ms;
  if (f.perfect) cfg.perception = PerceptionConfig::perfect(cfg.perception.seed);
  if (g.seed) cfg.seed = *g.seed;
  validate(cfg);
}

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--pet", f.pet, "implicit or explicit")->check(CLI::IsMember({"implicit", "explicit"}));
  cmd->add_option("--policy", f.policy, "association policy")
      ->check(CLI::IsMember({"baseline", "overlap", "npp", "kpp", "cd", "hybrid"}));
  cmd->add_option("--stack", f.stack, "model stack")->check(CLI::IsMember({"high", "low"}, CLI::ignore_case));
  cmd->add_option("--interval", f.interval, "inference sampling interval N")->check(CLI::NonNegativeNumber);
  cmd->add_option("--start-offset-ms", f.start_offset_ms, "stimulus time at which logging starts")
      ->check(CLI::NonNegativeNumber);
  cmd->add_flag("--perfect", f.perfect, "noise-free, miss-free perception");
}

Scenario generate(const std::string& kind, std::uint64_t seed, const std::vector<int>& loads,
                  std::int64_t segment_ms) {
  if (auto e = parse_edge_case_kind(kind)) return gen_edge_case(*e, seed);
  if (kind == "static") return gen_motion(MotionKind::Static, seed);
  if (kind == "slow") return gen_motion(MotionKind::Slow, seed);
  if (kind == "fast") return gen_motion(MotionKind::Fast, seed);
  if (kind == "intent1") return gen_intent(1, seed);
  if (kind == "intent2") return gen_intent(2, seed);
  if (kind == "load") return gen_load_sequence(loads.empty() ? kDefaultLoads : loads, segment_ms);
  throw UsageError("unknown scenario kind '" + kind + "'");
}

fs::path resolve_profile(const std::string& spec, const fs::path& base) {
  const fs::path direct = relative_to(base, spec);
  if (fs::exists(direct)) return direct;
  const fs::path shipped = fs::path(PETBENCH_PROFILE_DIR) / (spec + ".profile");
  if (fs::exists(shipped)) return shipped;
  throw Error("profile not found: " + spec);
}

// Scenario for collect/replay: --scenario file, else --kind generator, else
// the config's [experiment] entries.
Scenario pick_scenario(const std::string& path, const std::string& kind, const Loaded& l, std::uint64_t seed) {
  if (!path.empty()) return load_scenario(path);
  if (!kind.empty()) return generate(kind, seed, {}, 10000);
  if (auto p = value(l.doc, "experiment", "scenario")) return load_scenario(relative_to(l.base, *p));
  if (auto k = value(l.doc, "experiment", "kind")) return generate(*k, seed, {}, 10000);
  throw UsageError("no scenario: pass --scenario or --kind");
}

std::string pick_profile(const std::string& flag, const Loaded& l) {
  if (!flag.empty()) return flag;
  if (auto p = value(l.doc, "experiment", "profile")) return *p;
  throw UsageError("no profile: pass --profile");
}

std::vector<std::uint64_t> parse_seeds(const std::vector<std::string>& tokens) {
  std::vector<std::uint64_t> seeds;
  for (const auto& tok : tokens) {
    std::stringstream ss(tok);
    std::string part;
    while (std::getline(ss, part, ',')) {
      if (part.empty()) continue;
      const auto dash = part.find('-');
      try {
        if (dash == std::string::npos) {
          seeds.push_back(std::stoull(part));
        } else {
          const auto a = std::stoull(part.substr(0, dash)), b = std::stoull(part.substr(dash + 1));
          if (b < a) throw UsageError("empty seed range '" + part + "'");
          for (auto s = a; s <= b; ++s) seeds.push_back(s);
        }
      } catch (const std::logic_error&) {
        throw UsageError("invalid seed list '" + part + "'");
      }
    }
  }
  return seeds;
}

void say(const std::string& s) { std::cout << s << "\n"; }

// ---- commands ----

struct GenerateArgs {
  std::string kind;
  std::vector<int> loads;
  std::int64_t segment_ms = 10000;
};

int cmd_generate(const Globals& g, const GenerateArgs& a) {
  if (a.kind.empty() == a.loads.empty() && !(a.kind == "load"))
    throw UsageError("generate needs exactly one of --kind or --loads");
  const Scenario s = generate(a.loads.empty() ? a.kind : "load", g.seed.value_or(1), a.loads, a.segment_ms);
  const fs::path dir = out_dir(g, ".");
  fs::create_directories(dir);
  const fs::path file = dir / (s.id + ".txt");
  save_scenario(s, file);
  say(file.string());
  return 0;
}

struct TrialArgs {
  std::string scenario, kind, profile, log;
  RunFlags run;
};

int cmd_collect(const Globals& g, const TrialArgs& a) {
  const Loaded l = load_config(g);
  RunConfig cfg = l.run;
  apply(cfg, a.run, g);
  cfg.mode = RunMode::Collect;
  const Scenario s = pick_scenario(a.scenario, a.kind, l, cfg.seed);
  const HeadsetProfile p = load_profile(resolve_profile(pick_profile(a.profile, l), l.base), cfg.pet);
  const TrialLog t = run_trial(s, p, cfg);
  const fs::path dir = out_dir(g, "collect");
  write_trial_dir(t, s, dir);
  say("collected " + std::to_string(t.collection->entries.size()) + " frames -> " + (dir / "collection.csv").string());
  return 0;
}

CollectionLog load_collection(const std::string& spec, const Loaded& l) {
  std::string path = spec;
  if (path.empty())
    if (auto p = value(l.doc, "experiment", "log")) path = relative_to(l.base, *p).string();
  if (path.empty()) throw Error("replay needs a collection log (--log)");
  fs::path file(path);
  if (fs::is_directory(file)) file /= "collection.csv";
  if (!fs::exists(file)) throw Error("collection log not found: " + file.string());
  return read_collection_csv(read_file(file));
}

int cmd_replay(const Globals& g, const TrialArgs& a) {
  const Loaded l = load_config(g);
  RunConfig cfg = l.run;
  apply(cfg, a.run, g);
  cfg.mode = RunMode::Replay;
  const CollectionLog input = load_collection(a.log, l);
  const Scenario s = pick_scenario(a.scenario, a.kind, l, cfg.seed);
  const HeadsetProfile p = load_profile(resolve_profile(pick_profile(a.profile, l), l.base), cfg.pet);
  const TrialLog t = run_trial(s, p, cfg, &input);
  const fs::path dir = out_dir(g, "replay");
  write_trial_dir(t, s, dir);
  say("replayed " + std::to_string(t.frames.size()) + " frames -> " + dir.string());
  return 0;
}

struct SweepArgs {
  std::vector<std::string> profiles, scenarios, kinds, policies, stacks, seeds;
  std::vector<int> intervals, loads;
  std::string mode, pet;
  std::int64_t segment_ms = 10000;
  RunFlags run;
};

std::string point_name(const std::string& profile, const RunConfig& c) {
  return profile + "_" + std::string(to_string(c.pet)) + "_" + std::string(to_string(c.policy.kind)) + "_N" +
         std::to_string(c.sampling_interval) + "_" + std::string(to_string(c.stack)) + "_s" + std::to_string(c.seed);
}

std::string condition_of(const std::string& point) { return point.substr(0, point.rfind("_s")); }

int cmd_sweep(const Globals& g, SweepArgs a) {
  const Loaded l = load_config(g);
  auto merge = [&](std::vector<std::string>& dst, const char* key) {
    if (dst.empty()) dst = values(l.doc, "sweep", key);
  };
  merge(a.profiles, "profiles");
  merge(a.scenarios, "scenarios");
  merge(a.kinds, "kinds");
  merge(a.policies, "policies");
  merge(a.stacks, "stacks");
  merge(a.seeds, "seeds");
  auto merge_ints = [&](std::vector<int>& dst, const char* key) {
    if (!dst.empty()) return;
    for (const auto& v : values(l.doc, "sweep", key)) dst.push_back(int(parse_int(v, 0, key)));
  };
  merge_ints(a.intervals, "intervals");
  merge_ints(a.loads, "loads");
  if (a.mode.empty()) a.mode = value(l.doc, "sweep", "mode").value_or("baseline");

  RunConfig base = l.run;
  apply(base, a.run, g);
  if (a.profiles.empty()) throw UsageError("empty grid: no profiles");
  if (a.scenarios.empty() && a.kinds.empty()) throw UsageError("empty grid: no scenarios or kinds");
  for (const auto& k : a.kinds)
    if (std::find(kGeneratorKinds.begin(), kGeneratorKinds.end(), k) == kGeneratorKinds.end())
      throw UsageError("unknown scenario kind '" + k + "'");
  const RunMode mode = parse_or_usage<RunMode>(a.mode, parse_run_mode, "mode");
  if (mode == RunMode::Collect) throw UsageError("sweep mode is baseline or replay");

  std::vector<int> intervals = a.intervals.empty() ? std::vector<int>{base.sampling_interval} : a.intervals;
  std::vector<PolicyKind> policies;
  for (const auto& p : a.policies) policies.push_back(parse_or_usage<PolicyKind>(p, parse_policy_kind, "policy"));
  if (policies.empty()) policies.push_back(base.policy.kind);
  std::vector<ModelStack> stacks;
  for (const auto& s : a.stacks) stacks.push_back(parse_or_usage<ModelStack>(s, parse_model_stack, "stack"));
  if (stacks.empty()) stacks.push_back(base.stack);
  std::vector<std::uint64_t> seeds = parse_seeds(a.seeds);
  if (seeds.empty()) seeds.push_back(base.seed);
  for (int n : intervals)
    if (n < 0) throw UsageError("intervals must be >= 0");

  std::vector<std::pair<std::string, HeadsetProfile>> profiles;
  for (const auto& spec : a.profiles) {
    const HeadsetProfile p = load_profile(resolve_profile(spec, l.base), base.pet);
    profiles.emplace_back(p.name, p);
  }

  const fs::path root = out_dir(g, "sweep");
  fs::create_directories(root);
  std::deque<TrialLog> logs;
  std::map<std::string, std::vector<const TrialLog*>> groups;
  std::vector<std::string> failed;
  int done = 0;

  // (scenario source, seed) pairs; generated scenarios take the trial seed.
  struct Source {
    std::string file, kind;
  };
  std::vector<Source> sources;
  for (const auto& f : a.scenarios) sources.push_back({relative_to(l.base, f).string(), ""});
  for (const auto& k : a.kinds) sources.push_back({"", k});

  for (const auto& src : sources) {
    for (std::uint64_t seed : seeds) {
      Scenario s;
      try {
        s = src.file.empty() ? generate(src.kind, seed, a.loads, a.segment_ms) : load_scenario(src.file);
      } catch (const UsageError&) {
        throw;
      } catch (const std::exception& e) {
        failed.push_back((src.file.empty() ? src.kind : src.file) + " s" + std::to_string(seed) + ": " + e.what());
        continue;
      }
      const fs::path sdir = root / s.id;
      std::optional<CollectionLog> input;
      if (mode == RunMode::Replay) {
        RunConfig c = base;
        c.mode = RunMode::Collect;
        c.seed = seed;
        c.sampling_interval = intervals.front();
        c.policy.kind = policies.front();
        c.stack = stacks.front();
        try {
          const TrialLog col = run_trial(s, profiles.front().second, c);
          write_trial_dir(col, s, sdir / ("collect_s" + std::to_string(seed)));
          input = *col.collection;
        } catch (const std::exception& e) {
          failed.push_back(s.id + " collect s" + std::to_string(seed) + ": " + e.what());
          continue;
        }
      }
      for (const auto& [pname, profile] : profiles)
        for (int n : intervals)
          for (PolicyKind pk : policies)
            for (ModelStack st : stacks) {
              RunConfig c = base;
              c.mode = mode;
              c.seed = seed;
              c.sampling_interval = n;
              c.policy.kind = pk;
              c.stack = st;
              const std::string name = point_name(pname, c);
              try {
                logs.push_back(run_trial(s, profile, c, input ? &*input : nullptr));
                write_trial_dir(logs.back(), s, sdir / name);
                groups[condition_of(name)].push_back(&logs.back());
                ++done;
              } catch (const std::exception& e) {
                failed.push_back(s.id + "/" + name + ": " + e.what());
              }
            }
    }
  }
  write_file(root / "fps_summary.csv", write_fps_summary_csv(fps_summary(groups)));
  say("ran " + std::to_string(done) + " trials -> " + root.string());
  if (!failed.empty()) {
    std::string report;
    for (const auto& f : failed) report += f + "\n";
    write_file(root / "failed.txt", report);
    std::cerr << failed.size() << " grid points failed:\n" << report;
    return 1;
  }
  return 0;
}

std::vector<fs::path> find_trials(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error("not a directory: " + dir.string());
  std::vector<fs::path> out;
  if (fs::exists(dir / "trial.cfg")) out.push_back(dir);
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file() && e.path().filename() == "trial.cfg" && e.path().parent_path() != dir)
      out.push_back(e.path().parent_path());
  std::sort(out.begin(), out.end());
  return out;
}

int cmd_analyze(const Globals& g, const std::string& in) {
  const fs::path src = in.empty() ? fs::path(out_dir(g, ".")) : fs::path(in);
  const auto dirs = find_trials(src);
  if (dirs.empty()) throw Error("no trials under " + src.string());

  std::vector<LoadedTrial> trials;
  std::vector<std::string> names;
  for (const auto& d : dirs) {
    trials.push_back(read_trial_dir(d));
    names.push_back(fs::relative(d, src).generic_string());
  }
  const bool only_collect = std::all_of(trials.begin(), trials.end(),
                                        [](const auto& t) { return t.log.config.mode == RunMode::Collect; });

  std::vector<OutcomeRecord> outcomes;
  std::ostringstream intents;
  intents << "trial,person_id,event_ms,gesture,achieved,frames_to_enforce,cost_proxy_ms\n";
  std::map<std::string, std::vector<const TrialLog*>> groups;
  bool any_explicit = false;
  for (std::size_t i = 0; i < trials.size(); ++i) {
    const auto& [log, s] = trials[i];
    if (log.config.mode == RunMode::Collect && !only_collect) continue;
    const std::string leaf = fs::path(names[i]).filename().string();
    groups[condition_of(leaf.empty() || leaf == "." ? log.profile_name : leaf)].push_back(&log);
    if (log.config.pet == PetKind::Implicit) {
      outcomes.push_back({std::string(to_string(log.config.policy.kind)), s.kind.empty() ? s.id : s.kind,
                          log.config.seed, classify_association(log, s)});
    } else {
      any_explicit = true;
      for (const auto& o : evaluate_intents(log, s)) {
        intents << names[i] << "," << o.event.person_id << "," << o.event.t_ms << "," << to_string(o.event.gesture)
                << "," << (o.achieved ? 1 : 0) << ",";
        if (o.frames_to_enforce) intents << *o.frames_to_enforce;
        intents << ",";
        if (o.cost_proxy_ms) intents << format_number(*o.cost_proxy_ms);
        intents << "\n";
      }
    }
  }
  const fs::path dst = g.out.empty() ? src : fs::path(g.out);
  fs::create_directories(dst);
  const Report r = generate_report(outcomes);
  write_file(dst / "results.csv", r.results_csv);
  write_file(dst / "report.txt", r.report_txt);
  write_file(dst / "fps_summary.csv", write_fps_summary_csv(fps_summary(groups)));
  if (any_explicit) write_file(dst / "intents.csv", intents.str());
  std::cout << r.report_txt;
  say("analyzed " + std::to_string(trials.size()) + " trials -> " + dst.string());
  return 0;
}

struct RenderArgs {
  std::string trial;
  int stride = 1;
  double scale = 1.0;
};

int cmd_render(const Globals& g, const RenderArgs& a) {
  const LoadedTrial t = read_trial_dir(a.trial);
  const CornerCalibration cal =
      t.log.reference_fov.value_or(CornerCalibration::from_view(CameraView::identity(t.scenario.stimulus_size),
                                                                t.scenario.stimulus_size));
  const auto aligned = align_logs_to_stimulus(t.log, t.scenario);
  const fs::path dir = out_dir(g, (fs::path(a.trial) / "overlays").string());
  OverlayOptions opt;
  opt.stride = a.stride;
  opt.scale = a.scale;
  const int n = render_overlays(t.scenario, aligned, cal, dir, opt);
  say("rendered " + std::to_string(n) + " overlays -> " + dir.string());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"petbench: record-replay evaluation of bystander privacy PETs"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "experiment config file");
  app.add_option("--out", g.out, "output directory");
  app.add_option("--seed", g.seed, "run seed");

  GenerateArgs gen;
  auto* generate_cmd = app.add_subcommand("generate", "write a generated scenario file");
  generate_cmd->add_option("--kind", gen.kind, "generator kind")->check(CLI::IsMember(kGeneratorKinds));
  generate_cmd->add_option("--loads", gen.loads, "load sequence, e.g. 1,2,3")->delimiter(',');
  generate_cmd->add_option("--segment-ms", gen.segment_ms, "load segment length")->check(CLI::PositiveNumber);

  TrialArgs collect, replay;
  auto* collect_cmd = app.add_subcommand("collect", "run a Collect-mode trial and write its input log");
  auto* replay_cmd = app.add_subcommand("replay", "replay a collection log on a profile");
  for (auto [cmd, args] : {std::pair{collect_cmd, &collect}, std::pair{replay_cmd, &replay}}) {
    cmd->add_option("--scenario", args->scenario, "scenario file");
    cmd->add_option("--kind", args->kind, "generate the scenario instead")->check(CLI::IsMember(kGeneratorKinds));
    cmd->add_option("--profile", args->profile, "profile file or shipped name (hl2, mq3, ml2)");
    add_run_flags(cmd, args->run);
  }
  replay_cmd->add_option("--log", replay.log, "collection.csv or a collect output directory");

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "run a grid of trials");
  sweep_cmd->add_option("--profile", sweep.profiles, "profiles")->delimiter(',');
  sweep_cmd->add_option("--scenario", sweep.scenarios, "scenario files")->delimiter(',');
  sweep_cmd->add_option("--kind", sweep.kinds, "generated scenario kinds")->delimiter(',');
  sweep_cmd->add_option("--intervals", sweep.intervals, "sampling intervals")->delimiter(',');
  sweep_cmd->add_option("--policies", sweep.policies, "association policies")->delimiter(',');
  sweep_cmd->add_option("--stacks", sweep.stacks, "model stacks")->delimiter(',');
  sweep_cmd->add_option("--seeds", sweep.seeds, "seeds, e.g. 1-10 or 1,2,5");
  sweep_cmd->add_option("--loads", sweep.loads, "loads for the load kind")->delimiter(',');
  sweep_cmd->add_option("--segment-ms", sweep.segment_ms, "load segment length")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--mode", sweep.mode, "baseline or replay")->check(CLI::IsMember({"baseline", "replay"}));
  add_run_flags(sweep_cmd, sweep.run);

  std::string analyze_in;
  auto* analyze_cmd = app.add_subcommand("analyze", "classify trials and write results.csv and report.txt");
  analyze_cmd->add_option("--in", analyze_in, "trial or sweep directory");

  RenderArgs render;
  auto* render_cmd = app.add_subcommand("render", "draw overlay frames for one trial");
  render_cmd->add_option("--trial", render.trial, "trial directory")->required();
  render_cmd->add_option("--stride", render.stride, "render every k-th stimulus frame")->check(CLI::PositiveNumber);
  render_cmd->add_option("--scale", render.scale, "output scale")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*generate_cmd) return cmd_generate(g, gen);
    if (*collect_cmd) return cmd_collect(g, collect);
    if (*replay_cmd) return cmd_replay(g, replay);
    if (*sweep_cmd) return cmd_sweep(g, sweep);
    if (*analyze_cmd) return cmd_analyze(g, analyze_in);
    if (*render_cmd) return cmd_render(g, render);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
