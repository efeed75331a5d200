import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from contactkit.errors import AssignmentError, DimensionError
from contactkit.reward import (RewardConfig, SimStateSnapshot, contact_indicator, contact_reward, kappa,
                               pose_reward, read_log, reward_report, task_reward, total_reward,
                               track_score, tracking_errors, write_log)

CFG = RewardConfig()


def snapshot(t=0, wrist=(0, 0, 0.2), phi=(0, 0, 0), theta=(0.1, 0.2), tips=None, obj=(0, 0, 0),
             goal=(0, 0, 0), ref=None, contact=None):
    tips = np.zeros((2, 3)) + obj if tips is None else tips
    ref = ref or {"w": wrist, "phi": phi, "theta": theta}
    return SimStateSnapshot(t, np.array(wrist, float), np.array(phi, float), np.array(theta, float),
                            np.array(tips, float), np.array(obj, float), np.array(goal, float),
                            {k: np.array(v, float) for k, v in ref.items()},
                            None if contact is None else np.array(contact, bool))


# ------------------------------------------------------------------ published constants

def test_constants():
    assert (CFG.lambda_w, CFG.lambda_phi, CFG.lambda_theta) == (7.0, 2.0, 0.12)
    assert (CFG.beta, CFG.beta_c, CFG.kappa_floor, CFG.kappa_horizon) == (0.55, 0.25, 0.15, 80)


def test_track_examples():
    assert track_score(np.zeros(3), np.zeros(3), np.zeros(20)) == 1.0
    assert track_score([0.1, 0, 0], np.zeros(3), np.zeros(20)) == pytest.approx(math.exp(-0.7), abs=1e-15)
    assert round(track_score([0, 0.1, 0], np.zeros(3), np.zeros(20)), 5) == 0.49659
    dth = np.zeros(20)
    dth[[0, 5]] = [0.4, -0.6]
    assert track_score(np.zeros(3), np.zeros(3), dth) == pytest.approx(math.exp(-0.12), abs=1e-15)
    assert round(track_score(np.zeros(3), np.zeros(3), dth), 5) == 0.88692
    assert track_score(np.zeros(3), [0, 0, 0.5], np.zeros(4)) == math.exp(-1.0)
    with pytest.raises(DimensionError):
        track_score(np.zeros(3), np.zeros(3), np.zeros(16), dof=20)


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1), st.floats(1.0, 2.0))
def test_track_monotone_in_error(a, b, c, s):
    lo = track_score([a, 0, 0], [0, b, 0], [c])
    hi = track_score([a * s, 0, 0], [0, b * s, 0], [c * s])
    assert 0 < hi <= lo <= 1


def test_kappa_schedule():
    assert kappa(0) == 1.0
    assert kappa(80) == kappa(81) == kappa(10 ** 6) == 0.15
    assert kappa(40) == pytest.approx(0.575, abs=1e-15)
    ks = [kappa(t) for t in range(100)]
    assert all(a >= b for a, b in zip(ks, ks[1:]))
    with pytest.raises(ValueError):
        kappa(-1)


def test_kappa_exponential_variant():
    cfg = RewardConfig(kappa_shape="exponential")
    assert kappa(0, cfg) == 1.0 and kappa(80, cfg) == 0.15
    assert kappa(40, cfg) == pytest.approx(math.sqrt(0.15), abs=1e-15)


def test_pose_and_contact_examples():
    assert pose_reward(0, 1.0) == 0.55
    assert pose_reward(5, 0.0) == 0.0
    assert pose_reward(80, 1.0) == pytest.approx(0.0825, abs=1e-15)
    assert pose_reward(200, 1.0) == pose_reward(80, 1.0)
    assert contact_reward(0, 1.0) == 0.0
    assert contact_reward(1, 1.0) == 0.25
    assert contact_reward(1, 0.5) == 0.125


def test_contact_indicator_boundary():
    pts = np.array([[0.0, 0.0, 0.0], [1.0, 1.0, 1.0]])
    assert contact_indicator([[1.0, 1.0, 1.0]], pts) == 1
    assert contact_indicator([[5.0, 0, 0], [0, 5.0, 0]], pts) == 0
    assert contact_indicator([[0.0, 0.0, 0.01]], pts, 0.01) == 1
    assert contact_indicator([[0.0, 0.0, 0.0100001]], pts, 0.01) == 0
    with pytest.raises(AssignmentError):
        contact_indicator([[0, 0, 0]], np.zeros((0, 3)))


def test_task_terms():
    a, l, g, b = task_reward(snapshot(obj=(0.1, 0, 0), goal=(0.1, 0, 0)))
    assert (a, g, b) == (0.0, 0.0, 2.0)
    _, lift, _, _ = task_reward(snapshot(obj=(0, 0, 0.3)))
    assert lift == 0.3
    _, lift, _, _ = task_reward(snapshot(obj=(0, 0, -0.1)))
    assert lift == 0.0
    _, _, goal, bonus = task_reward(snapshot(obj=(0, 0, 0), goal=(0.06, 0, 0)))
    assert bonus == 0.0 and goal == -0.06
    _, _, _, bonus = task_reward(snapshot(obj=(0, 0, 0), goal=(0.05, 0, 0)))
    assert bonus == 0.0
    approach, _, _, _ = task_reward(snapshot(tips=[[0.1, 0, 0], [0, 0.3, 0]], obj=(0, 0, 0)))
    assert approach == pytest.approx(-0.2, abs=1e-15)


# ------------------------------------------------------------------ composition

def test_total_fixture_on_reference_at_goal():
    s = snapshot(t=0, obj=(0.2, 0, 0.1), goal=(0.2, 0, 0.1))
    r = total_reward(s, s.fingertips)
    assert r.r_track == 1.0 and r.r_pose == 0.55 and r.r_contact == 0.25
    assert r.total == pytest.approx(0.55 + 0.25 + 0.1 + 2.0, abs=1e-12)


def test_total_fixture_late_no_contact():
    s = snapshot(t=90, obj=(0, 0, 0), goal=(0.06, 0, 0))
    r = total_reward(s, np.array([[1.0, 1.0, 1.0]]))
    assert r.r_pose == pytest.approx(0.0825, abs=1e-15) and r.r_contact == 0.0
    assert r.total == pytest.approx(0.0825 - 0.06, abs=1e-12)


def test_total_fixture_tracking_error():
    s = snapshot(t=40, wrist=(0.1, 0, 0.2), ref={"w": (0, 0, 0.2), "phi": (0, 0, 0), "theta": (0.1, 0.2)})
    r = total_reward(s, s.fingertips)
    e = math.exp(-0.7)
    assert r.r_track == pytest.approx(e, abs=1e-15)
    assert r.r_pose == pytest.approx(0.55 * 0.575 * e, abs=1e-15)
    assert r.r_contact == pytest.approx(0.25 * e, abs=1e-15)
    parts = r.r_pose + r.r_contact + r.r_approach + r.r_lift + r.r_goal + r.r_bonus
    assert r.total == pytest.approx(parts, abs=1e-12)


def test_orientation_error_is_relative_rotation():
    s = snapshot(phi=(0, 0, 0.7), ref={"w": (0, 0, 0.2), "phi": (0, 0, 0.2), "theta": (0.1, 0.2)})
    _, dphi, _ = tracking_errors(s)
    assert np.allclose(dphi, [0, 0, 0.5], atol=1e-15)
    assert total_reward(s, s.fingertips).r_track == pytest.approx(math.exp(-1.0), abs=1e-15)


def test_joints_reference_mode():
    s = snapshot(wrist=(0.5, 0, 0), phi=(0, 1, 0), theta=(0.1, 0.2),
                 ref={"w": (0, 0, 0), "phi": (0, 0, 0), "theta": (0.1, 0.7)})
    r = total_reward(s, s.fingertips, RewardConfig(reference_mode="joints"))
    assert r.r_track == pytest.approx(math.exp(-0.06), abs=1e-15)
    bad = snapshot(ref={"w": (0, 0, 0), "phi": (0, 0, 0), "theta": (0.1, 0.2, 0.3)})
    with pytest.raises(DimensionError):
        total_reward(bad, bad.fingertips)


def test_config_rejects_unknown_keys_and_bad_values():
    with pytest.raises(ValueError):
        RewardConfig.from_dict({"lambda_w": 7.0, "gamma": 1})
    with pytest.raises(ValueError):
        RewardConfig(reference_mode="wrist")
    assert RewardConfig.from_dict(CFG.to_dict()) == CFG


def test_log_round_trip_and_report(tmp_path):
    snaps = [snapshot(t=t, obj=(0, 0, 0.01 * t), goal=(0, 0, 0.3), contact=[True, False]) for t in range(5)]
    write_log(tmp_path / "ep.jsonl", snaps)
    back = read_log(tmp_path / "ep.jsonl")
    assert [s.to_dict() for s in back] == [s.to_dict() for s in snaps]
    rep = reward_report(back, np.zeros((1, 3)))
    assert len(rep["steps"]) == 5
    assert rep["return"] == pytest.approx(sum(r["total"] for r in rep["steps"]), abs=1e-12)
