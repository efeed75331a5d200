import math

import numpy as np
import pytest

from contactkit.errors import DimensionError, EmptyInputError, InsufficientDataError, MissingContactError
from contactkit.geometry import sphere, surface_sample
from contactkit.metrics import (EpisodeLog, MetricsConfig, coverage, episode_success, evaluate, gsr, isr,
                                msad, pairwise_mean_distance, sad, style_diversity)
from contactkit.reward import write_log

from oracles import longest_run, pairwise_mean
from scenes import RADIUS, episode, handcrafted_logs

ORIGIN = {0: np.zeros((1, 3))}


# ------------------------------------------------------------------ success

def test_success_examples():
    assert episode_success(episode([0.0] * 200))
    assert not episode_success(episode([0.3] * 50 + [0.0] * 19 + [0.3] * 50))
    assert episode_success(episode([0.3] * 50 + [0.0] * 20 + [0.3] * 50))
    assert not episode_success(episode([0.3] * 200))
    assert not episode_success(episode([0.05] * 200))
    assert episode_success(episode([0.0499999] * 20))
    # two runs of 15 do not add up
    assert not episode_success(episode([0.0] * 15 + [0.1] + [0.0] * 15))


def test_success_matches_run_oracle(rng):
    for _ in range(200):
        d = np.where(rng.random(60) < 0.8, 0.01, 0.2)
        assert episode_success(episode(d)) == (longest_run(d < 0.05) >= 20)


def test_gsr_examples():
    assert gsr([episode([0.3] * 30)] * 3) == 0.0
    assert gsr([episode([0.0] * 30)] * 4) == 1.0
    assert gsr(handcrafted_logs()) == 0.7
    with pytest.raises(EmptyInputError):
        gsr([])


# ------------------------------------------------------------------ SAD family

def test_sad_examples():
    on = episode([0.0] * 20, [[0, 0, 0], [0.1, 0, 0]])
    assert sad(on, {0: np.array([[0, 0, 0], [0.1, 0, 0]])}) == 0.0
    assert sad(episode([0.0] * 20, [[0.03, 0, 0]]), ORIGIN) == 0.03
    two = episode([0.0] * 20, [[0.02, 0, 0], [0, 0.04, 0]])
    assert sad(two, ORIGIN) == pytest.approx(0.03, abs=1e-15)
    assert sad(two, ORIGIN, "min") == 0.02
    with pytest.raises(MissingContactError):
        sad(episode([0.0] * 20), ORIGIN)
    with pytest.raises(MissingContactError):
        sad(episode([0.0] * 20, [[0, 0, 0]], intent_id=3), ORIGIN)


def test_only_final_step_contacts_count():
    log = episode([0.0] * 20, [[0.03, 0, 0]])
    s = log.snapshots
    assert not s[0].in_contact.any() and s[-1].in_contact[0]
    assert len(log.contacts()) == 1


def test_msad_examples():
    assert msad([episode([0.3] * 30, [[0.01, 0, 0]])], ORIGIN) is None
    assert msad([episode([0.0] * 30, [[0.024, 0, 0]])], ORIGIN) == 0.024
    logs = [episode([0.0] * 30, [[d, 0, 0]]) for d in (0.02, 0.03, 0.04)]
    logs += [episode([0.3] * 30, [[d, 0, 0]]) for d in (0.5, 0.9)]
    assert msad(logs, ORIGIN) == pytest.approx(0.03, abs=1e-15)


def test_isr_examples():
    ok = lambda d: episode([0.0] * 30, [[d, 0, 0]])
    assert isr([ok(0.05)], ORIGIN) == 0.0
    assert isr([ok(0.039)], ORIGIN) == 1.0
    assert isr([ok(0.04)], ORIGIN) == 0.0
    assert isr([episode([0.3] * 30, [[0.0, 0, 0]])] * 3, ORIGIN) == 0.0
    # a success without contacts is not an intent success
    assert isr([episode([0.0] * 30)], ORIGIN) == 0.0


def test_handcrafted_fixture_values():
    logs = handcrafted_logs()
    wins = [episode_success(l) for l in logs]
    assert [i + 1 for i, w in enumerate(wins) if w] == [1, 2, 3, 4, 5, 7, 10]
    sads = [sad(l, ORIGIN) for l, w in zip(logs, wins) if w]
    assert sads == [0.02, 0.03, 0.039, 0.04, 0.05, 0.01, 0.01]
    assert msad(logs, ORIGIN) == math.fsum(sads) / 7
    assert isr(logs, ORIGIN) == 0.5
    assert style_diversity(logs) == 30 / 21


# ------------------------------------------------------------------ diversity

def test_sd_examples():
    log = lambda th: episode([0.0] * 20, theta=th)
    assert style_diversity([log((1, 2, 3)), log((1, 2, 3))]) == 0.0
    assert style_diversity([log((0, 0, 0)), log((1.7, 0, 0))]) == 1.7
    with pytest.raises(InsufficientDataError):
        style_diversity([log((0, 0, 0)), episode([0.3] * 20, theta=(1, 1, 1))])
    with pytest.raises(DimensionError):
        pairwise_mean_distance([np.zeros(3), np.zeros(4)])


def test_sd_matches_double_loop(rng):
    for n in (2, 3, 7, 12):
        v = rng.normal(size=(n, 16))
        assert pairwise_mean_distance(v) == pytest.approx(pairwise_mean(v), rel=1e-14)
        assert pairwise_mean_distance(v[rng.permutation(n)]) == pairwise_mean_distance(v)
    v = [np.zeros(3), np.array([3.0, 0, 0]), np.array([0, 4.0, 0])]
    assert pairwise_mean_distance(v) == 4.0


# ------------------------------------------------------------------ coverage

def shell_points(n, radii, seed=0):
    r = np.random.default_rng(seed)
    d = r.normal(size=(n, 3))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    return np.concatenate([d * rad for rad in radii])


def test_coverage_examples():
    m = sphere(RADIUS)
    assert coverage(surface_sample(m, 200, seed=1), m, 0.002) == 100.0
    assert coverage(shell_points(50, [RADIUS + 1.0]), m, 0.005) == 0.0
    pts = shell_points(40, [RADIUS - 0.001, RADIUS + 0.001, RADIUS - 0.01, RADIUS + 0.01])
    assert coverage(pts, m, 0.005) == 50.0
    assert coverage(pts[80:], m, 0.002) == 0.0
    with pytest.raises(EmptyInputError):
        coverage(np.zeros((0, 3)), m, 0.005)


def test_coverage_monotone_in_tau():
    m = sphere(RADIUS)
    pts = shell_points(100, np.linspace(RADIUS - 0.02, RADIUS + 0.02, 9))
    vals = [coverage(pts, m, t) for t in (0.0, 0.001, 0.003, 0.006, 0.012, 0.03)]
    assert all(a <= b for a, b in zip(vals, vals[1:])) and vals[-1] == 100.0


# ------------------------------------------------------------------ report and properties

def test_evaluate_report():
    rep = evaluate(handcrafted_logs(), ORIGIN)
    assert rep["episodes"] == 10 and rep["successes"] == 7
    assert rep["gsr"] == 0.7 and rep["isr"] == 0.5 and rep["sd"] == 30 / 21
    assert rep["config"]["hold_steps"] == 20
    none = evaluate([episode([0.3] * 30, [[0, 0, 0]])], ORIGIN)
    assert none["msad"] is None and none["sd"] is None and none["gsr"] == 0.0


def test_isr_never_exceeds_gsr():
    r = np.random.default_rng(99)
    cfg = MetricsConfig(hold_steps=5)
    for _ in range(300):
        logs = []
        for k in range(int(r.integers(1, 6))):
            d = np.where(r.random(12) < 0.7, 0.0, 0.2)
            tips = r.uniform(-0.06, 0.06, (int(r.integers(1, 3)), 3))
            logs.append(episode(d, tips, name=f"e{k}"))
        assert isr(logs, ORIGIN, cfg) <= gsr(logs, cfg.success_radius, cfg.hold_steps)


def test_log_file_round_trip(tmp_path):
    log = handcrafted_logs()[2]
    write_log(tmp_path / "ep03.jsonl", log.snapshots)
    back = EpisodeLog.read(tmp_path / "ep03.jsonl")
    assert back.name == "ep03" and back.intent_id == 0
    assert episode_success(back) and sad(back, ORIGIN) == 0.039


def test_config_validation():
    with pytest.raises(ValueError):
        MetricsConfig(sad_aggregation="max")
    with pytest.raises(ValueError):
        MetricsConfig(hold_steps=0)
