import json
import math

import pytest
from hypothesis import given, strategies as st
from scipy.stats import binom

from atom_assembler import ConfigError, ExperimentConfig, PhysicsParams, Workspace, run_experiment
from atom_assembler.montecarlo import (FORECAST_PARAMS, forecast_config, resolve_target, run_trials, stats_to_csv,
                                       stats_to_json, wilson_interval)
from atom_assembler.physics import LOSSLESS


@given(st.integers(1, 5000), st.data())
def test_wilson_contains_estimate(n, data):
    k = data.draw(st.integers(0, n))
    lo, hi = wilson_interval(k, n)
    assert 0 <= lo <= k / n <= hi <= 1


def test_wilson_known_value():
    # 31 of 1000: centre and half-width from the closed form
    lo, hi = wilson_interval(31, 1000)
    assert lo == pytest.approx(0.02193, abs=1e-4) and hi == pytest.approx(0.04370, abs=1e-4)


def test_config_errors():
    with pytest.raises(ConfigError):
        ExperimentConfig(trials=0)
    with pytest.raises(ConfigError):
        ExperimentConfig(max_cycles=0)
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"target": "square:30"})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"target": "pentagon"})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"trails": 3})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"params": {"tau": -1}})


def test_config_round_trip(tmp_path):
    f = tmp_path / "t.txt"
    f.write_text("#.\n.#\n")
    cfg = ExperimentConfig.from_dict({"rows": 2, "cols": 2, "target": f"file:{f}", "trials": 3})
    assert cfg.resolve().sites == {(0, 0), (1, 1)}
    assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg


def test_target_names():
    ws = Workspace(50, 50)
    assert len(resolve_target("forecast1000", ws)) == 1000
    assert len(resolve_target("forecast1000:quasi_square", ws)) == 1000
    assert len(resolve_target("ring96", Workspace(19, 19))) == 96


def test_single_lossless_trial_is_step():
    s = run_experiment(ExperimentConfig(target="square:6", params=LOSSLESS.replace(p_load=0.6), trials=1,
                                        max_cycles=5))
    assert s.cumulative_success == [0.0, 1.0, 1.0, 1.0, 1.0, 1.0]


def test_reproducible_and_curve_monotone():
    cfg = ExperimentConfig(target="square:8", trials=60, seed=3)
    a, b = run_experiment(cfg), run_experiment(cfg)
    assert a == b
    assert a.cumulative_success == sorted(a.cumulative_success)
    assert all(lo <= r <= hi for lo, r, hi in zip(a.ci_low, a.cumulative_success, a.ci_high))
    assert run_experiment(cfg.replace(seed=4)) != a


def test_parallel_matches_serial():
    cfg = ExperimentConfig(target="square:7", trials=24, seed=99)
    assert run_trials(cfg, workers=1) == run_trials(cfg, workers=3)


def test_outputs():
    s = run_experiment(ExperimentConfig(target="square:4", trials=5, max_cycles=3))
    lines = stats_to_csv([s]).splitlines()
    assert lines[0].startswith("# atom-assembler v")
    assert lines[1] == "target,k,successes,trials,rate,ci_low,ci_high"
    assert len(lines) == 2 + 4
    doc = json.loads(stats_to_json([s]))
    assert doc["results"][0]["final_success"] == s.final_success


def test_success_decreases_with_target_size():
    finals = [run_experiment(ExperimentConfig(target=f"square:{n}", trials=300, seed=5)).final_success
              for n in range(4, 11)]
    assert finals == sorted(finals, reverse=True)


# 8x8 is insensitive to p_load above ~0.5 (extra atoms also add chain obstacles),
# so loading is probed on 10x10 where the reservoir is the bottleneck
@pytest.mark.parametrize("name, values, size", [("p_load", (0.45, 0.529, 0.62), 10),
                                                ("p_transport", (0.65, 0.75, 0.85), 8),
                                                ("tau", (4.0, 10.0, 25.0), 8)])
def test_success_increases_with_parameter(name, values, size):
    finals = [run_experiment(ExperimentConfig(target=f"square:{size}", trials=300, seed=6,
                                              params=PhysicsParams().replace(**{name: v}))).final_success
              for v in values]
    assert finals[0] < finals[1] < finals[2]


def test_forecast_lossless_limit():
    s = run_experiment(forecast_config(trials=4, params=FORECAST_PARAMS.replace(p_transport=1.0, tau=math.inf)))
    assert s.final_success == 1.0


def test_forecast_too_few_atoms():
    # at p_load = 0.35 the chance of loading 1000 of 2500 sites is negligible
    assert binom.sf(999, 2500, 0.35) < 2e-7
    s = run_experiment(forecast_config(trials=4, params=FORECAST_PARAMS.replace(p_load=0.35), max_cycles=3))
    assert s.final_success == 0.0
