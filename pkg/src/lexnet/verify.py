"""Differential checks between the rule implementations.

Each check returns ``(passed, total, counterexample_or_None)``.
"""

from __future__ import annotations

from dataclasses import replace
from fractions import Fraction

import numpy as np

from . import _backend
from .automaton import (
    Configuration, SimParams, Simulation, collapse_candidates, local_update,
    partition_conveyed, step,
)
from .network import Network, random_connected_graph
from .oracle import membership_rule_update, naive_candidates, naive_local_update, naive_partition
from .lexicon import word_to_text
from .rng import Stream, derive_seed


def random_star_case(rng: np.random.Generator, epsilon=None, weighted=False):
    """A hearer (vertex 0) with random memory and 1-6 neighbours conveying words from a 20-word pool."""
    length = int(rng.integers(1, 9))
    s = int(rng.integers(2, 5))
    pool = sorted({tuple(int(a) for a in rng.integers(0, s, length)) for _ in range(20)})
    k = int(rng.integers(1, 7))
    mem_size = int(rng.integers(1, min(len(pool), 6) + 1))
    memory = [pool[i] for i in rng.choice(len(pool), mem_size, replace=False)]
    conveyed = memory[int(rng.integers(mem_size))]
    heard = [pool[int(rng.integers(len(pool)))] for _ in range(k)]
    if epsilon is None:
        epsilon = Fraction(int(rng.integers(0, 11)), 10)
    net = Network.from_edges(k + 1, [(0, i) for i in range(1, k + 1)], "star")
    params = SimParams(epsilon=epsilon, length=length, alphabet=s, weighted_collapse=weighted)
    states = [(memory, conveyed)] + [([w], w) for w in heard]
    return Configuration.from_states(net, params, states)


def _describe(config: Configuration) -> str:
    st = config.state(0)
    heard = [word_to_text(config.word(int(config.conveyed[v]))) for v in config.net.neighbors(0)]
    mem = sorted(word_to_text(w) for w in st.memory)
    return (f"eps={config.params.epsilon} memory={mem} conveyed={word_to_text(st.conveyed)} "
            f"heard={heard}")


def check_partition(cases: int, seed: int):
    rng = np.random.default_rng(seed)
    passed = 0
    example = None
    for _ in range(cases):
        c = random_star_case(rng)
        st = c.state(0)
        heard = [c.word(int(c.conveyed[v])) for v in c.net.neighbors(0)]
        eps = c.params.epsilon
        ok = partition_conveyed(st.memory, heard, eps) == tuple(map(frozenset, naive_partition(st.memory, heard, eps)))
        new, known = naive_partition(st.memory, heard, eps)
        if ok and not new:
            ok = collapse_candidates(known, eps) == naive_candidates(known, eps)
        if ok:
            passed += 1
        elif example is None:
            example = _describe(c)
    return passed, cases, example


def check_local_update(cases: int, seed: int, weighted=False):
    """Optimised rule vs naive rule, both fed the same stream for the collapse index."""
    rng = np.random.default_rng(seed)
    passed = 0
    example = None
    for i in range(cases):
        a = random_star_case(rng, weighted=weighted)
        b = a.copy()
        ra = local_update(a, 0, Stream(i))
        rb = naive_local_update(b, 0, Stream(i))
        if ra == rb and a.same_state(b) and a.numerator == b.numerator:
            passed += 1
        elif example is None:
            example = _describe(a)
    return passed, cases, example


def check_membership_rule(cases: int, seed: int):
    rng = np.random.default_rng(seed)
    passed = 0
    example = None
    for i in range(cases):
        a = random_star_case(rng, epsilon=Fraction(0))
        b = a.copy()
        stream = Stream(i)
        ra = local_update(a, 0, stream)
        rb = membership_rule_update(b, 0)
        # at eps=0 the candidate set is a singleton, so no draw may be consumed
        untouched = stream.bitgen.random_raw() == Stream(i).bitgen.random_raw()
        if ra == rb and a.same_state(b) and untouched:
            passed += 1
        elif example is None:
            example = _describe(a)
    return passed, cases, example


def _instance(i: int, seed: int, epsilon, schedule: str):
    rng = np.random.default_rng(derive_seed(seed, 7, i))
    n = int(rng.integers(2, 16))
    net = random_connected_graph(n, float(rng.uniform(0, 0.5)), rng)
    params = SimParams(epsilon=epsilon, length=int(rng.integers(2, 7)), alphabet=int(rng.integers(2, 5)),
                       schedule=schedule, permutation="random", seed=derive_seed(seed, 8, i))
    return net, params


def check_trajectories(runs: int, seed: int, steps_per_vertex: int = 40):
    """At eps=0, general rule and membership rule driven from the same seed stay identical."""
    passed = 0
    example = None
    for i in range(runs):
        net, params = _instance(i, seed, Fraction(0), "async" if i % 2 else "sequential")
        a, b = Simulation(net, params, kernel="python"), Simulation(net, params, kernel="python")
        ok = True
        for _ in range(steps_per_vertex * net.n):
            ra = step(a.config, a.schedule, a.stream)
            rb = step(b.config, b.schedule, b.stream, update=membership_rule_update)
            if ra != rb or not a.config.same_state(b.config):
                ok = False
                break
        if ok:
            passed += 1
        elif example is None:
            example = f"graph={net.name} params={params}"
    return passed, runs, example


def check_kernels(runs: int, seed: int):
    """Compiled and pure-Python kernels give bit-identical runs (skipped without the extension)."""
    if "cython" not in _backend.KERNELS:
        return 0, 0, None
    passed = 0
    example = None
    for i in range(runs):
        eps = Fraction(i % 11, 10)
        net, params = _instance(i, seed, eps, "async" if i % 2 else "sequential")
        params = replace(params, max_steps=200 * net.n, stop_on_consensus=i % 3 != 0,
                         weighted_collapse=i % 4 == 1, sample_stride=7)
        out = []
        for kernel in ("python", "cython"):
            r = Simulation(net, params, kernel=kernel).run()
            out.append((r.steps, r.config.numerator, r.config.conveyed.tolist(), r.config.memories,
                        r.series.samples))
        if out[0] == out[1]:
            passed += 1
        elif example is None:
            example = f"graph={net.name} params={params}"
    return passed, runs, example


def run_all(cases: int = 10_000, runs: int = 50, seed: int = 0) -> dict:
    return {
        "partition": check_partition(cases, seed),
        "local-update": check_local_update(cases, seed + 1),
        "local-update-weighted": check_local_update(cases // 10 or 1, seed + 2, weighted=True),
        "membership-rule": check_membership_rule(cases, seed + 3),
        "trajectories": check_trajectories(runs, seed + 4),
        "kernels": check_kernels(runs, seed + 5),
    }
