import pytest

import petbench as pb


def test_frame_time_and_best_interval():
    p = pb.HeadsetProfile.parse(
        "[profile]\nname toy\noverhead_ms 10\nface_base_ms 40\nface_per_candidate_ms 5\n"
        "hand_base_ms 0\ngesture_base_ms 0\ntransform_per_region_ms 0\nmarker_ms 0\n"
    )
    assert pb.frame_time(p, pb.ModelStack.High, {pb.Stage.Face: 2}) == pytest.approx(60.0)
    assert pb.fps(60.0) == pytest.approx(16.6667, rel=1e-4)
    assert pb.best_interval({0: 10, 1: 14, 2: 19, 4: 20, 8: 20.5}, 0.10) == 2


def test_generators_are_deterministic():
    a = pb.generate_scenario("cross-fast", 1)
    b = pb.generate_scenario("cross-fast", 1)
    assert a.to_text() == b.to_text()
    assert a.protected_person_id == 2
    assert pb.Scenario.parse(a.to_text()).to_text() == a.to_text()
    with pytest.raises(ValueError):
        pb.generate_scenario("nope")


def test_collect_replay_classify(tmp_path):
    s = pb.generate_scenario("overlap", 3)
    profile = pb.shipped_profile("ml2")
    cfg = pb.RunConfig()
    cfg.mode = pb.RunMode.Collect
    cfg.sampling_interval = 2
    cfg.policy = pb.PolicyKind.KPP
    cfg.seed = 3
    collected = pb.run_trial(s, profile, cfg)
    assert collected.collection is not None
    assert len(collected.collection.entries) == len(collected.frames)

    cfg.mode = pb.RunMode.Replay
    trial = pb.run_trial(s, profile, cfg, collected.collection)
    assert trial.frames[0].module_times_ms[pb.Stage.Marker] > 0
    outcome = pb.classify_association(trial, s)
    assert outcome.verdict == "pass"
    assert outcome.outcome_class in ("P_s", "P_r")

    cfg.policy = pb.PolicyKind.Baseline
    baseline = pb.classify_association(pb.run_trial(s, profile, cfg, collected.collection), s)
    assert baseline.outcome_class == "F_s"

    results, report = pb.generate_report([("kpp", "overlap", 3, outcome), ("baseline", "overlap", 3, baseline)])
    assert results.startswith("variant,scenario_kind,seed,verdict,class\n")
    assert "1 (1 F_s)" in report

    pb.write_trial_dir(trial, s, tmp_path / "t")
    log, scen = pb.read_trial_dir(tmp_path / "t")
    assert log.frames_csv() == trial.frames_csv()
    assert scen.id == s.id
    assert pb.render_overlays(log, scen, tmp_path / "ov", stride=20) > 0
    assert (tmp_path / "ov" / "overlay_index.csv").exists()


def test_replay_rule_and_errors():
    cfg = pb.RunConfig()
    cfg.mode = pb.RunMode.Collect
    log = pb.run_trial(pb.generate_scenario("static", 1), pb.shipped_profile("mq3"), cfg).collection
    entries = log.entries
    assert pb.replay_at(log, entries[1].elapsed_ms).frame == entries[1].frame
    assert pb.replay_at(log, entries[-1].elapsed_ms + 1000).frame == entries[-1].frame
    assert pb.CollectionLog.from_csv(log.to_csv()).to_csv() == log.to_csv()
    with pytest.raises(pb.ParseError):
        pb.CollectionLog.from_csv("bad header\n")
    bad = pb.RunConfig()
    bad.sampling_interval = -1
    with pytest.raises(pb.ValidationError):
        pb.run_trial(pb.generate_scenario("static", 1), pb.shipped_profile("mq3"), bad)


def test_intents_with_perfect_perception():
    s = pb.generate_scenario("intent1", 1)
    cfg = pb.RunConfig()
    cfg.pet = pb.PetKind.Explicit
    cfg.perception = pb.PerceptionConfig.perfect(1)
    trial = pb.run_trial(s, pb.shipped_profile("ml2", pb.PetKind.Explicit), cfg)
    outcomes = pb.evaluate_intents(trial, s)
    assert outcomes and all(o["achieved"] for o in outcomes)
    assert trial.mean_fps(1000) == pytest.approx(7.0, rel=0.10)


def test_calibration_anchor():
    assert pb.map_camera_to_stimulus((100, 50), (740, 410), (1280, 720), (420, 230)) == pytest.approx((640, 360))
