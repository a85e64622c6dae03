"""Acceptance criteria C1-C9, each at its stated tolerance.

Every test appends one ``[PASS]``/``[FAIL]`` line that the terminal summary
prints under "acceptance criteria".
"""

import math
import os
import subprocess
import sys
from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, DATA
from lexnet import _backend, verify
from lexnet.automaton import SimParams, Simulation, init_configuration, is_fixed_point
from lexnet.experiments import (
    PRESETS, ConvergenceStudySpec, emit_results, results_metadata, sequential_bound, sweep_epsilon,
    trajectory, transition_onset, transition_threshold,
)
from lexnet.metrics import energy_from_words, numerator_from_words
from lexnet.network import (
    DisconnectedError, DuplicateEdgeError, SelfLoopError, make_torus, random_connected_graph, read_edge_list,
)
from lexnet.rng import Stream, derive_seed


def record(cid, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] {cid} {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def eps0_family():
    """>= 100 random connected graphs with n <= 30, plus every torus up to 8x8."""
    spec = ConvergenceStudySpec(family="random", sizes=tuple(range(3, 31)), graphs_per_size=4,
                                tori=tuple((w, h) for w in range(3, 9) for h in range(3, 9)))
    return spec.graphs()


def eps0_params(schedule, seed, max_steps):
    return SimParams(epsilon=0, length=4, alphabet=4, schedule=schedule, permutation="random", seed=seed,
                     max_steps=max_steps, stop_on_fixed_point=True)


def single_word_fixed_point(config):
    m = config.word(int(config.conveyed[0]))
    return is_fixed_point(config) and all(s.memory == {m} and s.conveyed == m for s in config.states())


def test_c1_sequential_convergence_within_bound():
    graphs = eps0_family()
    random_graphs = sum(1 for g in graphs if g.name.startswith("random"))
    failures = []
    worst = 0.0
    for gi, net in enumerate(graphs):
        sim0 = Simulation(net, eps0_params("sequential", derive_seed(1, gi), 0))
        bound = sequential_bound(net.n, sim0.initial_distinct, net.diameter)
        sim = Simulation(net, eps0_params("sequential", derive_seed(1, gi), bound))
        res = sim.run()
        if not (res.converged and single_word_fixed_point(res.config) and res.steps <= bound):
            failures.append(net.name)
        worst = max(worst, res.steps / bound)
    record("C1", random_graphs >= 100 and not failures,
           f"sequential eps=0: {len(graphs) - len(failures)}/{len(graphs)} runs at a fixed point within "
           f"n(p-1)+diam*n*p ({random_graphs} random graphs; max steps/bound {worst:.3f})")


def test_c2_async_convergence_within_cap():
    graphs = eps0_family()
    runs = failures = 0
    worst = 0.0
    for gi, net in enumerate(graphs):
        for trial in range(20):
            seed = derive_seed(2, gi, trial)
            cfg = init_configuration(net, eps0_params("async", seed, 0), Stream(seed))
            initial = {cfg.word(int(i)) for i in cfg.conveyed}
            p = len(initial)
            cap = math.floor(50 * net.n ** 2 * p * math.log(net.n))
            res = Simulation(net, eps0_params("async", seed, cap)).run()
            runs += 1
            ok = res.converged and single_word_fixed_point(res.config) and res.consensus in initial
            failures += not ok
            worst = max(worst, res.steps / cap)
    record("C2", failures == 0,
           f"async eps=0: {runs - failures}/{runs} runs at a fixed point within 50 n^2 p ln n, consensus "
           f"in initial set (max steps/cap {worst:.4f})")


def test_c3_membership_rule_equivalence():
    single = verify.check_membership_rule(10_000, 3)
    traj = verify.check_trajectories(50, 4)
    mismatches = (single[1] - single[0]) + (traj[1] - traj[0])
    record("C3", mismatches == 0 and single[1] == 10_000 and traj[1] == 50,
           f"eps=0 general vs membership rule: {single[0]}/{single[1]} single updates, "
           f"{traj[0]}/{traj[1]} trajectories identical")


def test_c4_energy_properties():
    rng = np.random.default_rng(4)
    graphs = [random_connected_graph(int(rng.integers(2, 31)), float(rng.uniform(0, 0.4)), rng) for _ in range(190)]
    graphs += [make_torus(w, h) for w in range(3, 8) for h in range(3, 5)]
    bad_range = bad_iff = configs = 0
    for net in graphs:
        for _ in range(500):
            L = int(rng.integers(1, 6))
            s = int(rng.integers(2, 5))
            rows = rng.integers(0, s, (net.n, L)).astype(np.uint8)
            if rng.random() < 0.2:
                rows[:] = rows[0]
                if rng.random() < 0.5:
                    rows[int(rng.integers(net.n)), int(rng.integers(L))] ^= 1
            e = energy_from_words(net, rows)
            configs += 1
            bad_range += not 0.0 <= e <= 1.0
            bad_iff += (e == 0) != bool((rows == rows[0]).all())

    drift = checks = 0
    net = make_torus(16, 16)
    for eps, seed in ((Fraction(7, 10), 1), (Fraction(1), 2)):
        sim = Simulation(net, SimParams(epsilon=eps, length=8, alphabet=4, seed=seed, max_steps=500_000,
                                        stop_on_consensus=False))
        for _ in range(500):
            sim.advance(1000)
            checks += 1
            drift += sim.config.numerator != numerator_from_words(net, sim.config.words[sim.config.conveyed])
    steps = 2 * 500 * 1000

    big = make_torus(64, 64)
    e0 = init_configuration(big, SimParams(length=32, alphabet=10), Stream(0)).energy
    ok = bad_range == 0 and bad_iff == 0 and configs >= 10**5 and drift == 0 and abs(e0 - 0.9) <= 0.01
    record("C4", ok,
           f"E in [0,1] and E=0 iff consensus on {configs} configurations ({bad_range + bad_iff} violations); "
           f"incremental numerator exact at {checks - drift}/{checks} checkpoints over {steps} steps; "
           f"E(0) on 64x64, s=10: {e0:.4f}")


@pytest.fixture(scope="module")
def fig2_small_rows():
    spec = replace(PRESETS["fig2-small"], lengths=(8, 32))
    return sweep_epsilon(spec)


@pytest.mark.slow
def test_c5_fig2_desk_scale(fig2_small_rows):
    rows = fig2_small_rows
    low = [r for r in rows if r.L == 32 and r.epsilon <= Fraction(1, 2)]
    ok_a = all(r.mean_final_energy <= 0.05 and r.fraction_converged >= 0.9 for r in low)
    top = {r.L: r.mean_final_energy for r in rows if r.epsilon == 1}
    ok_b = all(0.3 <= top[L] <= 0.6 for L in (8, 32))
    worst = max(r.mean_final_energy for r in low)
    record("C5", ok_a and ok_b and len(low) == 6,
           f"fig2-small: L=32 eps<=0.5 max mean E {worst:.4f}, min converged "
           f"{min(r.fraction_converged for r in low):.1f}; eps=1 mean E L=8 {top[8]:.4f}, L=32 {top[32]:.4f}")


@pytest.mark.slow
def test_c6_phase_transition(fig2_small_rows):
    curve = sorted((r.epsilon, r.mean_final_energy) for r in fig2_small_rows if r.L == 32)
    eps_hat = transition_threshold(fig2_small_rows, 32, low=0.05, high=0.2)
    ok = eps_hat is not None and Fraction(1, 2) < eps_hat <= 1
    text = " ".join(f"{float(e):.1f}:{m:.3f}" for e, m in curve)
    record("C6", ok, f"fig2-small L=32 threshold eps_hat={eps_hat if eps_hat is None else float(eps_hat)} "
                     f"(curve {text})")


@pytest.mark.slow
def test_c7_trajectory_shape():
    net = make_torus(32, 32)
    n = net.n
    base = SimParams(length=32, alphabet=10, seed=0, max_steps=500 * n, stop_on_consensus=True)
    t0 = trajectory(net, replace(base, epsilon=0), trials=10)
    t1 = trajectory(net, replace(base, epsilon=1), trials=10)
    reach = next((t for t, e in t0.mean.samples if e == 0), None)
    tail = [e for t, e in t1.mean.samples if t >= 400 * n]
    ok = reach is not None and reach <= 500 * n and min(tail) >= 0.2
    record("C7", ok, f"32x32 L=32: eps=0 mean E reaches 0 at t={reach if reach is None else reach // n}n; "
                     f"eps=1 min over final 100n {min(tail):.4f}")


def test_c8_determinism_and_io(tmp_path):
    outs = []
    for name in ("a.csv", "b.csv"):
        path = tmp_path / name
        r = subprocess.run([sys.executable, "-m", "lexnet.cli", "sweep", "--preset", "smoke", "--workers", "1",
                            "--out", str(path)], capture_output=True, text=True)
        assert r.returncode == 0, r.stderr
        outs.append(path.read_bytes())
    identical = outs[0] == outs[1]

    rows = sweep_epsilon(PRESETS["smoke"], workers=1)
    fresh = emit_results(rows, "csv", results_metadata(PRESETS["smoke"])).splitlines()[1:]
    golden = (DATA / "golden_smoke_sweep.csv").read_text().splitlines()[1:]

    errors = []
    for name in ("selfloop", "duplicate", "disconnected"):
        try:
            read_edge_list(DATA / f"{name}.txt")
            errors.append(None)
        except Exception as exc:  # noqa: BLE001 - the type is what is checked
            errors.append(type(exc))
    distinct = errors == [SelfLoopError, DuplicateEdgeError, DisconnectedError]
    record("C8", identical and fresh == golden and distinct,
           f"byte-identical CLI output {identical}; golden smoke sweep match {fresh == golden}; "
           f"loader errors {[e.__name__ if e else None for e in errors]}")


@pytest.mark.fullscale
@pytest.mark.skipif(not os.environ.get("LEXNET_FULLSCALE"), reason="set LEXNET_FULLSCALE=1 (minutes at 128x128)")
def test_c9_full_scale():
    spec = replace(PRESETS["paper-fig2"], lengths=(32,))
    rows = sweep_epsilon(spec)
    top = next(r.mean_final_energy for r in rows if r.epsilon == 1)
    onset = transition_onset(rows, 32)
    split = transition_threshold(rows, 32)
    ok = abs(top - 0.5) <= 0.1 and onset is not None and abs(onset - Fraction(7, 10)) <= Fraction(1, 10)
    curve = " ".join(f"{float(r.epsilon):.1f}:{r.mean_final_energy:.3f}" for r in rows)
    record("C9", ok, f"paper-fig2 128x128 L=32: eps=1 mean E {top:.4f}, onset "
                     f"{onset if onset is None else float(onset)}, clean split "
                     f"{split if split is None else float(split)} (curve {curve}; backend {_backend.BACKEND})")
