"""Susceptibility tests: stimulus schedule structure, pose function, rod-and-frame."""

from collections import Counter

import numpy as np
import pytest

from csaf.geom import IDENTITY_QUAT, quat_to_axis_angle, yaw_quat
from csaf.susceptibility import (
    DEFAULT_ORDERS,
    PERMUTATIONS,
    RftConfig,
    RftResponse,
    SensitivityConfig,
    SusceptibilityError,
    build_sensitivity_schedule,
    generate_rft_trials,
    rft_results_to_csv,
    rotate_rod,
    schedule_from_csv,
    schedule_pose,
    schedule_to_csv,
    score_rft,
    start_trial,
)

from oracles import brute_force_schedule_duration, quat_angle_deg


class TestScheduleStructure:
    def test_default_duration(self):
        # 3 orders x 3 axes x (1 + 10 + 2) + 2 between-pauses of 5 = 127 s.
        sched = build_sensitivity_schedule(SensitivityConfig())
        assert sched.end == pytest.approx(127.0, abs=1e-12)

    def test_segments_tile_exactly(self):
        sched = build_sensitivity_schedule(SensitivityConfig(reps_per_axis=2))
        t = 0.0
        for seg in sched.segments:
            assert seg.start == pytest.approx(t, abs=1e-12)
            t = seg.end
        assert t == sched.end

    def test_indicator_precedes_every_rotation(self):
        sched = build_sensitivity_schedule(SensitivityConfig(reps_per_axis=3))
        segs = sched.segments
        for i, seg in enumerate(segs):
            if seg.kind == "Rotation":
                assert segs[i - 1].kind == "Indicator"
                assert segs[i - 1].axis == seg.axis

    def test_rotations_are_full_turns(self):
        sched = build_sensitivity_schedule(SensitivityConfig(reps_per_axis=2))
        rotations = [s for s in sched.segments if s.kind == "Rotation"]
        assert len(rotations) == 18
        for seg in rotations:
            assert abs(seg.magnitude) == pytest.approx(360.0, abs=1e-12)

    def test_alternate_direction_flips_odd_reps(self):
        sched = build_sensitivity_schedule(SensitivityConfig(reps_per_axis=2))
        rotations = [s for s in sched.segments if s.kind == "Rotation"]
        signs = [np.sign(s.magnitude) for s in rotations]
        assert signs == [1.0, -1.0] * 9
        steady = build_sensitivity_schedule(
            SensitivityConfig(reps_per_axis=2, alternate_direction=False))
        assert all(s.magnitude == 360.0 for s in steady.segments
                   if s.kind == "Rotation")

    def test_axis_orders_default_latin_square(self):
        sched = build_sensitivity_schedule(SensitivityConfig())
        axes = [s.axis for s in sched.segments if s.kind == "Rotation"]
        assert axes == [a for order in DEFAULT_ORDERS for a in order]

    def test_ends_with_menu_return(self):
        sched = build_sensitivity_schedule(SensitivityConfig())
        last = sched.segments[-1]
        assert last.kind == "MenuReturn"
        assert last.duration == 0.0

    def test_translation_block_mirrors_orders(self):
        cfg = SensitivityConfig(include_translation=True)
        sched = build_sensitivity_schedule(cfg)
        translations = [s for s in sched.segments if s.kind == "Translation"]
        assert [s.axis for s in translations] == [
            "lateral", "longitudinal", "vertical",
            "longitudinal", "vertical", "lateral",
            "vertical", "lateral", "longitudinal",
        ]
        for s in translations:
            assert abs(s.magnitude) == pytest.approx(cfg.translation_distance)

    def test_duration_matches_brute_force(self):
        cases = [
            SensitivityConfig(),
            SensitivityConfig(reps_per_axis=3),
            SensitivityConfig(include_translation=True),
            SensitivityConfig(reps_per_axis=2, turn_duration=7.5,
                              pause_after_turn=1.25, pause_between_triples=3.0,
                              indicator_duration=0.5, include_translation=True,
                              translation_duration=2.0),
        ]
        for cfg in cases:
            sched = build_sensitivity_schedule(cfg)
            expected = brute_force_schedule_duration(
                reps=cfg.reps_per_axis, n_orders=len(cfg.orders), axes_per_order=3,
                indicator=cfg.indicator_duration, turn=cfg.turn_duration,
                pause_after=cfg.pause_after_turn,
                pause_between=cfg.pause_between_triples,
                include_translation=cfg.include_translation,
                t_duration=cfg.translation_duration)
            assert sched.end == pytest.approx(expected, abs=1e-9)

    def test_shuffle_orders_is_seeded(self):
        cfg = SensitivityConfig(shuffle_orders=True)
        a = build_sensitivity_schedule(cfg, seed=5)
        b = build_sensitivity_schedule(cfg, seed=5)
        assert a.segments == b.segments

    def test_invalid_configs_rejected(self):
        with pytest.raises(SusceptibilityError):
            SensitivityConfig(reps_per_axis=0)
        with pytest.raises(SusceptibilityError):
            SensitivityConfig(turn_duration=0.0)
        with pytest.raises(SusceptibilityError):
            SensitivityConfig(orders=(("pitch", "roll", "roll"),))


class TestSchedulePose:
    def test_identity_at_start(self):
        sched = build_sensitivity_schedule(SensitivityConfig())
        pos, rot = schedule_pose(sched, 0.0)
        np.testing.assert_allclose(pos, [0, 0, 0])
        np.testing.assert_allclose(rot, IDENTITY_QUAT)

    def test_rotation_returns_to_start_orientation(self):
        sched = build_sensitivity_schedule(SensitivityConfig())
        for seg in sched.segments:
            if seg.kind != "Rotation":
                continue
            _, before = schedule_pose(sched, seg.start)
            _, after = schedule_pose(sched, seg.end)
            dq = np.array(before) - np.array(after)
            sq = np.array(before) + np.array(after)
            assert min(np.linalg.norm(dq), np.linalg.norm(sq)) < 1e-9

    def test_half_rotation_is_180_degrees(self):
        sched = build_sensitivity_schedule(SensitivityConfig())
        seg = next(s for s in sched.segments if s.kind == "Rotation")
        _, mid = schedule_pose(sched, seg.start + seg.duration / 2.0)
        assert quat_angle_deg(mid) == pytest.approx(180.0, abs=1e-9)

    def test_yaw_rotation_matches_quarter_turn(self):
        cfg = SensitivityConfig(orders=(("yaw", "pitch", "roll"),))
        sched = build_sensitivity_schedule(cfg)
        seg = next(s for s in sched.segments if s.kind == "Rotation")
        assert seg.axis == "yaw"
        _, q = schedule_pose(sched, seg.start + seg.duration / 4.0)
        target = yaw_quat(90.0)
        assert min(np.linalg.norm(q - target), np.linalg.norm(q + target)) < 1e-9

    def test_pose_constant_during_pause(self):
        sched = build_sensitivity_schedule(SensitivityConfig())
        pause = next(s for s in sched.segments if s.kind == "Pause")
        p0, r0 = schedule_pose(sched, pause.start)
        p1, r1 = schedule_pose(sched, pause.start + pause.duration / 2.0)
        np.testing.assert_allclose(p0, p1)
        np.testing.assert_allclose(r0, r1)

    def test_translation_moves_along_axis(self):
        cfg = SensitivityConfig(include_translation=True, translation_distance=4.0)
        sched = build_sensitivity_schedule(cfg)
        seg = next(s for s in sched.segments if s.kind == "Translation")
        p0, _ = schedule_pose(sched, seg.start)
        p1, _ = schedule_pose(sched, seg.end)
        assert np.linalg.norm(np.array(p1) - np.array(p0)) == pytest.approx(4.0)

    def test_out_of_range_rejected(self):
        sched = build_sensitivity_schedule(SensitivityConfig())
        with pytest.raises(SusceptibilityError):
            schedule_pose(sched, -0.1)
        with pytest.raises(SusceptibilityError):
            schedule_pose(sched, sched.end + 0.1)

    def test_pose_is_pure_function_of_time(self):
        sched = build_sensitivity_schedule(SensitivityConfig(include_translation=True))
        ts = np.linspace(0.0, sched.end, 137)
        shuffled = ts.copy()
        np.random.default_rng(0).shuffle(shuffled)
        ordered = {float(t): schedule_pose(sched, float(t)) for t in ts}
        for t in shuffled:
            pos, rot = schedule_pose(sched, float(t))
            np.testing.assert_array_equal(pos, ordered[float(t)][0])
            np.testing.assert_array_equal(rot, ordered[float(t)][1])


def test_schedule_csv_round_trip():
    sched = build_sensitivity_schedule(SensitivityConfig(include_translation=True))
    text = schedule_to_csv(sched)
    assert text.splitlines()[0] == "start,duration,kind,axis,magnitude"
    back = schedule_from_csv(text)
    assert back.segments == sched.segments
    # Start poses are rebuilt identically.
    for a, b in zip(sched.start_orientations, back.start_orientations):
        np.testing.assert_array_equal(a, b)


class TestRft:
    def test_trial_list_balanced(self):
        cfg = RftConfig()
        trials = generate_rft_trials(cfg, seed=123)
        assert len(trials) == 16
        counts = Counter((t.frame_sign, t.rod_sign) for t in trials)
        assert counts == {perm: 4 for perm in PERMUTATIONS}

    def test_balance_holds_across_seeds(self):
        cfg = RftConfig(repetitions_per_permutation=2)
        for seed in range(50):
            counts = Counter((t.frame_sign, t.rod_sign)
                             for t in generate_rft_trials(cfg, seed))
            assert counts == {perm: 2 for perm in PERMUTATIONS}

    def test_shuffle_seeded_and_nontrivial(self):
        cfg = RftConfig()
        a = generate_rft_trials(cfg, seed=1)
        b = generate_rft_trials(cfg, seed=1)
        c = generate_rft_trials(cfg, seed=2)
        assert a == b
        assert [(t.frame_sign, t.rod_sign) for t in a] != \
               [(t.frame_sign, t.rod_sign) for t in c]

    def test_angles_follow_signs(self):
        cfg = RftConfig(frame_tilt=18.0, rod_tilt=27.0)
        for t in generate_rft_trials(cfg, seed=0):
            assert t.frame_angle == t.frame_sign * 18.0
            assert t.rod_start_angle == t.rod_sign * 27.0

    def test_rod_rotation_and_wrap(self):
        cfg = RftConfig()
        trial = generate_rft_trials(cfg, seed=0)[0]
        state = start_trial(trial)
        state = rotate_rod(cfg, state, 10.0)
        assert state.rod_angle == pytest.approx(trial.rod_start_angle + 10.0)
        # The rod is a line: angles wrap on a 180-degree period.
        state2 = rotate_rod(cfg, state, 200.0)
        assert -90.0 < state2.rod_angle <= 90.0
        assert (state2.rod_angle - (state.rod_angle + 200.0)) % 180.0 \
            == pytest.approx(0.0, abs=1e-9)

    def test_commit_freezes_trial(self):
        cfg = RftConfig()
        state = start_trial(generate_rft_trials(cfg, seed=0)[0])
        state = rotate_rod(cfg, state, 1.0, validate=True)
        assert state.committed
        with pytest.raises(SusceptibilityError):
            rotate_rod(cfg, state, 1.0)

    def test_score_known_values(self):
        cfg = RftConfig(repetitions_per_permutation=1)
        trials = generate_rft_trials(cfg, seed=0)
        finals = [2.0, -2.0, 4.0, -4.0]
        responses = [RftResponse(t.index, finals[i]) for i, t in enumerate(trials)]
        result = score_rft(trials, responses)
        assert result.errors == (2.0, 2.0, 4.0, 4.0)
        assert result.mean_error == pytest.approx(3.0, abs=1e-12)
        assert result.std_error == pytest.approx(2.0 / np.sqrt(3.0), abs=1e-12)

    def test_score_wraps_responses(self):
        cfg = RftConfig(repetitions_per_permutation=1)
        trials = generate_rft_trials(cfg, seed=0)
        responses = [RftResponse(t.index, 89.0 + i) for i, t in enumerate(trials)]
        result = score_rft(trials, responses)
        # 89, 90 stay; 91 wraps to -89, 92 to -88.
        assert result.errors == (89.0, 90.0, 89.0, 88.0)

    def test_score_rejects_mismatched_responses(self):
        cfg = RftConfig(repetitions_per_permutation=1)
        trials = generate_rft_trials(cfg, seed=0)
        with pytest.raises(SusceptibilityError):
            score_rft(trials, [RftResponse(0, 1.0)])
        wrong = [RftResponse(t.index + 100, 0.0) for t in trials]
        with pytest.raises(SusceptibilityError):
            score_rft(trials, wrong)

    def test_results_csv(self):
        cfg = RftConfig(repetitions_per_permutation=1)
        trials = generate_rft_trials(cfg, seed=0)
        responses = [RftResponse(t.index, 1.5) for t in trials]
        result = score_rft(trials, responses)
        text = rft_results_to_csv(trials, responses, result)
        lines = text.strip().split("\n")
        assert lines[0] == "trial,frame_sign,rod_sign,response_deg,abs_error_deg"
        assert len(lines) == 5
        assert lines[1].endswith("1.5,1.5")
