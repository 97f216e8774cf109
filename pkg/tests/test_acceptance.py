"""Exit criteria for the package, one test per criterion.

Each test records a PASS/FAIL line that is printed in the pytest terminal
summary.  Trial counts and tolerances are fixed here.
"""

import math

import numpy as np
import pytest

from atom_assembler import (ExperimentConfig, PhysicsParams, Workspace, load_initial, optimal_matching_cost,
                            perpetuate, plan_cycle, plan_total_distance, replay, rng_stream, run_experiment,
                            square_pattern)
from atom_assembler.montecarlo import forecast_experiment, run_trials
from atom_assembler.planner import IllegalMoveError, Occupancy, brute_force_matching_cost
from atom_assembler.patterns import TargetPattern
from atom_assembler.lattice import Site

from conftest import ACCEPTANCE_LINES, random_instance

SEED = 20190101
SIZES = range(4, 11)
MEASURED_FINAL = {8: 0.64, 9: 0.12, 10: 0.031}


def report(criterion: str, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}")


@pytest.fixture(scope="module")
def sweep():
    """Square targets 4x4..10x10 on 19x19, default parameters, 15 cycles, 2000 trials."""
    return {n: run_experiment(ExperimentConfig(target=f"square:{n}", trials=2000, max_cycles=15, seed=SEED))
            for n in SIZES}


def test_c1_forecast():
    stats = forecast_experiment(trials=200, seed=SEED)
    ok = stats.final_success > 0.90
    report("C1 forecast 50x50, 1000 sites", ok,
           f"final cumulative success {stats.final_success:.3f} (need > 0.90), "
           f"mean max filling {stats.mean_max_filling:.4f}")
    assert ok


def test_c2_small_clusters(sweep):
    rates = {n: sweep[n].final_success for n in (4, 5)}
    ok = all(r >= 0.95 for r in rates.values())
    report("C2 small-cluster success", ok, ", ".join(f"{n}x{n}={r:.4f}" for n, r in rates.items()) + " (need >= 0.95)")
    assert ok


def _saturation():
    """Fraction of the 30-cycle success already reached at cycle 15 (1000 trials each)."""
    out = {}
    for n in MEASURED_FINAL:
        s = run_experiment(ExperimentConfig(target=f"square:{n}", trials=1000, max_cycles=30, seed=SEED))
        c = s.cumulative_success
        out[n] = (c[15], c[30])
    return out


def _sensitivity():
    variants = {
        "t_overhead=0.05": PhysicsParams(t_overhead=0.05),
        "t_overhead=0.20": PhysicsParams(t_overhead=0.2),
        "loss only during moves": PhysicsParams(t_image=0.0, t_overhead=0.0),
    }
    rows = {}
    for label, params in variants.items():
        rows[label] = {n: run_experiment(ExperimentConfig(target=f"square:{n}", trials=1000, seed=SEED,
                                                          params=params)).final_success for n in MEASURED_FINAL}
    return rows


def test_c3_large_cluster_trend(sweep):
    finals = {n: sweep[n].final_success for n in MEASURED_FINAL}
    in_window = {n: MEASURED_FINAL[n] / 3 <= finals[n] <= MEASURED_FINAL[n] * 3 for n in MEASURED_FINAL}
    decreasing = finals[8] > finals[9] > finals[10]
    detail = ", ".join(f"{n}x{n}={finals[n]:.4f} (measured {MEASURED_FINAL[n]}, {'in' if in_window[n] else 'outside'} x3)"
                       for n in MEASURED_FINAL)
    if all(in_window.values()) and decreasing:
        report("C3 large-cluster trend", True, detail)
        return
    sat = _saturation()
    saturated = {n: c15 >= 0.9 * c30 for n, (c15, c30) in sat.items()}
    sens = _sensitivity()
    for label, row in sens.items():
        ACCEPTANCE_LINES.append(f"       sensitivity {label}: " + ", ".join(f"{n}x{n}={v:.4f}" for n, v in row.items()))
    ok = decreasing and all(saturated.values())
    detail += (f"; fallback: strictly decreasing={decreasing}, success at cycle 15 / cycle 30: "
               + ", ".join(f"{n}x{n}={c15:.3f}/{c30:.3f}" for n, (c15, c30) in sat.items())
               + " (saturated if >= 0.9)")
    report("C3 large-cluster trend", ok, detail)
    assert ok


def test_c4_filling_fraction(sweep):
    ten = sweep[10].mean_max_filling
    small = {n: sweep[n].mean_max_filling for n in range(4, 9)}
    ok = 0.78 <= ten <= 0.95 and all(v > 0.90 for v in small.values())
    report("C4 max filling fraction", ok,
           f"10x10={ten:.4f} +- {sweep[10].std_max_filling:.3f} (need 0.78-0.95); "
           + ", ".join(f"{n}x{n}={v:.4f}" for n, v in small.items()) + " (need > 0.90)")
    assert ok


def test_c5_perpetuation():
    ws = Workspace(19, 19)
    target = square_pattern(5, ws)
    p = PhysicsParams()
    frames = []
    for i in range(500):
        rng = rng_stream(SEED, i)
        frames.append(perpetuate(load_initial(ws, p, rng), target, p, 80, rng)[0])
    mean = float(np.mean(frames))
    ok = 23 <= mean <= 75
    report("C5 perpetuation 5x5, 80 cycles", ok, f"mean defect-free frames {mean:.1f} +- {np.std(frames):.1f} "
           "(need 23-75)")
    assert ok


def test_c6_loading_statistics():
    ws = Workspace(19, 19)
    p = PhysicsParams()
    rng = rng_stream(SEED)
    counts = np.array([load_initial(ws, p, rng).count for _ in range(10_000)])
    ok = abs(counts.mean() - 191) <= 3
    report("C6 loading statistics", ok, f"mean {counts.mean():.2f}, std {counts.std():.2f} over 10^4 draws "
           "(need 191 +- 3)")
    assert ok


def test_c7_planner_properties():
    rng = np.random.default_rng(SEED)
    failures = []
    for i in range(10_000):
        occ, target = random_instance(rng, 12)
        plan = plan_cycle(occ, target)
        try:
            final = replay(occ, plan)
        except IllegalMoveError as exc:
            failures.append((i, f"illegal: {exc}"))
            continue
        coverable = min(len(occ.filled - target.sites), len(target.sites - occ.filled))
        filled_before = len(target.sites & occ.filled)
        if len(target.sites & final.filled) != filled_before + coverable:
            failures.append((i, "defects left unfilled"))
        if plan_total_distance(plan) < optimal_matching_cost(occ, target):
            failures.append((i, "beats the optimal matching"))
        if plan_cycle(occ, target).to_jsonl() != plan.to_jsonl():
            failures.append((i, "non-deterministic"))
    ok = not failures
    report("C7 planner properties", ok, f"10000 instances up to 12x12, {len(failures)} failures")
    assert ok, failures[:5]


def test_c8_matching_oracle():
    rng = np.random.default_rng(SEED + 1)
    mismatches = 0
    for _ in range(1000):
        rows, cols = rng.integers(2, 7, size=2)
        ws = Workspace(int(rows), int(cols))
        sites = list(ws.sites())
        n_atoms, n_tgt = rng.integers(1, min(6, len(sites)) + 1, size=2)
        atoms = [sites[i] for i in rng.choice(len(sites), n_atoms, replace=False)]
        tsites = [sites[i] for i in rng.choice(len(sites), n_tgt, replace=False)]
        got = optimal_matching_cost(Occupancy(ws, atoms), TargetPattern("t", frozenset(tsites), ws))
        mismatches += got != brute_force_matching_cost(atoms, tsites)
    ok = mismatches == 0
    report("C8 matching oracle", ok, f"1000 instances with <= 6 atoms and targets, {mismatches} mismatches")
    assert ok


def test_c9_parallel_determinism():
    cfg = ExperimentConfig(target="square:8", trials=64, seed=SEED)
    serial = run_experiment(cfg, workers=1)
    parallel = run_experiment(cfg, workers=4)
    ok = serial == parallel and run_trials(cfg, 1) == run_trials(cfg, 3)
    report("C9 determinism under parallelism", ok, "1-worker and 3/4-worker runs identical" if ok else "results differ")
    assert ok
