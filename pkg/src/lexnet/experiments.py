"""Experiment harnesses: epsilon sweeps, averaged trajectories, convergence studies.

Every run seed is ``derive_seed(base_seed, *index)`` so output is a pure
function of the spec; workers only change wall time. Results are gathered
by index, never by completion order.
"""

from __future__ import annotations

import csv
import io
import json
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .automaton import SimParams, Simulation
from .metrics import EnergySeries
from .network import Network, make_torus, random_connected_graph, read_edge_list
from .rng import GENERATOR_ID, derive_seed

EPSILON_GRID = tuple(Fraction(k, 10) for k in range(11))
FULL_LENGTHS = (2, 4, 8, 16, 32, 64)


class ResultsIOError(OSError):
    pass


@dataclass(frozen=True)
class Topology:
    """A torus ``width x height`` or an edge-list file."""

    kind: str = "torus"
    width: int = 32
    height: int = 32
    path: str | None = None

    def build(self) -> Network:
        if self.kind == "torus":
            return make_torus(self.width, self.height)
        if self.kind == "edgelist":
            return read_edge_list(self.path)
        raise ValueError(f"unknown topology {self.kind!r}")


@dataclass(frozen=True)
class SweepSpec:
    topology: Topology = Topology()
    lengths: tuple[int, ...] = FULL_LENGTHS
    alphabet: int = 10
    epsilons: tuple[Fraction, ...] = EPSILON_GRID
    trials: int = 10
    steps_multiplier: int = 500
    base_seed: int = 0
    schedule: str = "async"
    permutation: str = "identity"
    weighted_collapse: bool = False

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if any(not 0 <= e <= 1 for e in self.epsilons):
            raise ValueError("epsilon grid must lie in [0, 1]")

    def params(self, epsilon, length, seed, n) -> SimParams:
        return SimParams(
            epsilon=epsilon, length=length, alphabet=self.alphabet, schedule=self.schedule,
            permutation=self.permutation, seed=seed, max_steps=self.steps_multiplier * n,
            stop_on_consensus=True, weighted_collapse=self.weighted_collapse,
        )


PRESETS = {
    "paper-fig2": SweepSpec(Topology("torus", 128, 128), trials=20),
    "fig2-small": SweepSpec(Topology("torus", 32, 32), trials=10),
    "smoke": SweepSpec(Topology("torus", 8, 8), lengths=(4, 8),
                       epsilons=(Fraction(0), Fraction(1, 2), Fraction(1)),
                       trials=3, steps_multiplier=50),
}


def spec_echo(spec) -> dict:
    """JSON-safe dict of a spec dataclass (fractions as ``num/den``)."""
    def conv(v):
        if isinstance(v, Fraction):
            return f"{v.numerator}/{v.denominator}"
        if isinstance(v, (list, tuple)):
            return [conv(x) for x in v]
        if isinstance(v, dict):
            return {k: conv(x) for k, x in v.items()}
        return v
    return conv(asdict(spec))


def _map(fn, tasks, workers):
    if workers == 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (8 * (workers or 8)))))


def _final_energy_task(task):
    net, params = task
    result = Simulation(net, params).run()
    return result.config.numerator, result.final_energy


@dataclass(frozen=True)
class SweepRow:
    epsilon: Fraction
    L: int
    s: int
    n: int
    trials: int
    mean_final_energy: float
    std_final_energy: float
    fraction_converged: float

    columns = ("epsilon_num", "epsilon_den", "L", "s", "n", "trials",
               "mean_final_energy", "std_final_energy", "fraction_converged")

    def record(self) -> dict:
        return {
            "epsilon_num": self.epsilon.numerator, "epsilon_den": self.epsilon.denominator,
            "L": self.L, "s": self.s, "n": self.n, "trials": self.trials,
            "mean_final_energy": self.mean_final_energy,
            "std_final_energy": self.std_final_energy,
            "fraction_converged": self.fraction_converged,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "SweepRow":
        return cls(Fraction(int(rec["epsilon_num"]), int(rec["epsilon_den"])), int(rec["L"]), int(rec["s"]),
                   int(rec["n"]), int(rec["trials"]), float(rec["mean_final_energy"]),
                   float(rec["std_final_energy"]), float(rec["fraction_converged"]))


def sweep_seed(spec: SweepSpec, eps_index: int, length_index: int, trial: int) -> int:
    return derive_seed(spec.base_seed, eps_index, length_index, trial)


def sweep_epsilon(spec: SweepSpec, workers: int | None = None) -> list[SweepRow]:
    """Final energy after ``steps_multiplier * n`` steps (or E=0) for every (eps, L) point."""
    net = spec.topology.build()
    index = []
    tasks = []
    for ei, eps in enumerate(spec.epsilons):
        for li, length in enumerate(spec.lengths):
            for trial in range(spec.trials):
                index.append((ei, li))
                tasks.append((net, spec.params(eps, length, sweep_seed(spec, ei, li, trial), net.n)))
    outcomes = _map(_final_energy_task, tasks, workers)
    rows = []
    for ei, eps in enumerate(spec.epsilons):
        for li, length in enumerate(spec.lengths):
            got = [o for (i, j), o in zip(index, outcomes) if (i, j) == (ei, li)]
            energies = [e for _, e in got]
            rows.append(SweepRow(
                eps, length, spec.alphabet, net.n, len(got),
                statistics.fmean(energies), statistics.pstdev(energies),
                sum(1 for num, _ in got if num == 0) / len(got),
            ))
    return rows


def transition_threshold(rows: list[SweepRow], length: int, low=0.05, high=0.2):
    """Smallest grid epsilon above which every point is ``>= high`` and below which every point is ``<= low``.

    Returns ``None`` when the sweep has no such clean split.
    """
    pts = sorted((r.epsilon, r.mean_final_energy) for r in rows if r.L == length)
    for i, (eps, _) in enumerate(pts):
        if all(e <= low for _, e in pts[:i]) and all(e >= high for _, e in pts[i:]):
            return eps
    return None


def transition_onset(rows: list[SweepRow], length: int, level=0.05):
    """First grid epsilon whose mean final energy exceeds ``level`` (where consensus starts to fail)."""
    pts = sorted((r.epsilon, r.mean_final_energy) for r in rows if r.L == length)
    return next((eps for eps, e in pts if e > level), None)


def _series_task(task):
    net, params = task
    sim = Simulation(net, params)
    sim.run()
    return sim.series()


@dataclass
class Trajectory:
    mean: EnergySeries
    runs: list[tuple[int, EnergySeries]] = field(default_factory=list)
    params: SimParams | None = None


def trajectory(net: Network, params: SimParams, trials: int, workers: int | None = None) -> Trajectory:
    """Energy averaged over ``trials`` seeds at steps ``0, stride, ..., max_steps``.

    Trial seeds derive from ``params.seed``; a trial that stopped at E=0
    counts as 0 from then on.
    """
    seeds = [derive_seed(params.seed, trial) for trial in range(trials)]
    runs = _map(_series_task, [(net, replace(params, seed=s)) for s in seeds], workers)
    stride = params.sample_stride or net.n
    grid = list(range(0, params.max_steps + 1, stride))
    if grid[-1] != params.max_steps:
        grid.append(params.max_steps)
    mean = EnergySeries([(t, statistics.fmean(r.at(t) for r in runs)) for t in grid], stride)
    return Trajectory(mean, list(zip(seeds, runs)), params)


@dataclass(frozen=True)
class ConvergenceStudySpec:
    """Instances for the eps=0 convergence study.

    ``family`` is ``torus`` (``sizes`` are square sides), ``random`` (``sizes``
    are vertex counts, ``graphs_per_size`` each) or ``edgelist`` (``paths``).
    ``tori`` adds extra ``(w, h)`` tori to any family.
    """

    family: str = "random"
    sizes: tuple[int, ...] = tuple(range(3, 31))
    graphs_per_size: int = 4
    paths: tuple[str, ...] = ()
    tori: tuple[tuple[int, int], ...] = ()
    schedules: tuple[str, ...] = ("sequential", "async")
    trials: int = 1
    base_seed: int = 0
    length: int = 4
    alphabet: int = 4
    permutation: str = "random"
    cap_per_vertex: int = 10**6

    def graphs(self) -> list[Network]:
        nets = []
        if self.family == "torus":
            nets += [make_torus(k, k) for k in self.sizes]
        elif self.family == "random":
            for n in self.sizes:
                for g in range(self.graphs_per_size):
                    rng = np.random.default_rng(derive_seed(self.base_seed, 1, n, g))
                    net = random_connected_graph(n, float(rng.uniform(0.0, 0.4)), rng)
                    nets.append(replace(net, name=f"random{n}-{g}"))
        elif self.family == "edgelist":
            nets += [read_edge_list(p) for p in self.paths]
        else:
            raise ValueError(f"unknown graph family {self.family!r}")
        nets += [make_torus(w, h) for w, h in self.tori]
        return nets


@dataclass(frozen=True)
class ConvergenceRow:
    graph: str
    n: int
    p: int
    schedule: str
    seed: int
    steps: int
    bound_sequential: int
    diameter: int
    converged: bool
    coupon_factor: float
    consensus_in_initial: bool

    columns = ("graph", "n", "p", "schedule", "seed", "steps", "bound_sequential", "diameter", "converged")

    def record(self) -> dict:
        return asdict(self)

    @property
    def async_cap(self) -> float:
        """Hard cap ``50 n^2 p ln n`` used to judge asynchronous runs."""
        return 50 * self.n ** 2 * self.p * math.log(self.n)


def sequential_bound(n: int, p: int, diameter: int) -> int:
    """``n (p - 1) + diameter * n * p``: every vertex collapses once, then the minimum spreads."""
    return n * (p - 1) + diameter * n * p


def _convergence_task(task):
    net, params = task
    sim = Simulation(net, params)
    initial = {sim.config.word(int(c)) for c in np.unique(sim.config.conveyed)}
    res = sim.run()
    p = sim.initial_distinct
    return ConvergenceRow(
        graph=net.name, n=net.n, p=p, schedule=params.schedule, seed=params.seed, steps=res.steps,
        bound_sequential=sequential_bound(net.n, p, net.diameter), diameter=net.diameter,
        converged=res.converged, coupon_factor=net.n * math.log(net.n),
        consensus_in_initial=res.consensus is not None and res.consensus in initial,
    )


def convergence_time_study(spec: ConvergenceStudySpec, workers: int | None = None,
                           graphs: list[Network] | None = None) -> list[ConvergenceRow]:
    """Steps to an exact fixed point at eps=0 for every graph, schedule and trial."""
    graphs = spec.graphs() if graphs is None else graphs
    tasks = []
    for gi, net in enumerate(graphs):
        for si, schedule in enumerate(spec.schedules):
            for trial in range(spec.trials):
                params = SimParams(
                    epsilon=0, length=spec.length, alphabet=spec.alphabet, schedule=schedule,
                    permutation=spec.permutation, seed=derive_seed(spec.base_seed, gi, si, trial),
                    max_steps=spec.cap_per_vertex * net.n, stop_on_fixed_point=True,
                )
                tasks.append((net, params))
    return _map(_convergence_task, tasks, workers)


def results_metadata(spec=None, **extra) -> dict:
    meta = {"tool": "lexnet", "version": __version__, "generator": GENERATOR_ID}
    if spec is not None:
        meta["spec"] = spec_echo(spec)
    meta.update(extra)
    return meta


def emit_results(rows, fmt: str = "csv", meta: dict | None = None, columns=None, path=None) -> str:
    """Render rows as CSV (comment line with metadata, then header) or JSON; optionally write to ``path``."""
    meta = meta or {}
    if columns is None:
        if not rows:
            raise ValueError("columns are required for an empty table")
        columns = type(rows[0]).columns
    if fmt == "csv":
        buf = io.StringIO()
        buf.write("# " + json.dumps(meta, sort_keys=True) + "\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            rec = row.record()
            writer.writerow([_cell(rec[c]) for c in columns])
        text = buf.getvalue()
    elif fmt == "json":
        text = json.dumps({"meta": meta, "columns": list(columns), "rows": [r.record() for r in rows]},
                          sort_keys=True, indent=1) + "\n"
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if path is not None:
        write_text(path, text)
    return text


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    return v


def write_text(path, text: str) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8", newline="\n")
    except OSError as exc:
        raise ResultsIOError(f"cannot write results to {path}: {exc.strerror or exc}") from exc


def read_sweep_json(text: str) -> list[SweepRow]:
    return [SweepRow.from_record(r) for r in json.loads(text)["rows"]]


def read_csv_rows(text: str) -> list[dict]:
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


__all__ = [
    "PRESETS", "SweepSpec", "SweepRow", "Topology", "sweep_epsilon", "transition_threshold", "transition_onset",
    "trajectory", "Trajectory", "ConvergenceStudySpec", "ConvergenceRow", "convergence_time_study",
    "sequential_bound", "emit_results", "results_metadata", "read_sweep_json", "read_csv_rows",
]
