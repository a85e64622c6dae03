"""Energy functional, consensus statistics and energy time series.

The energy is kept as an exact integer numerator
``sum_u sum_{v in V_u} H(x_u, x_v)`` (every edge counted from both ends) and
divided by ``L * sum_u deg(u)`` only when reported. On a degree-4 torus the
denominator is ``4 L n``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .lexicon import word_to_text

SERIES_HEADER = ["run_id", "seed", "epsilon_num", "epsilon_den", "L", "s", "n", "step", "energy"]


def _edge_sources(net) -> np.ndarray:
    return np.repeat(np.arange(net.n), np.diff(net.indptr))


def numerator_from_words(net, rows: np.ndarray) -> int:
    """Energy numerator for per-vertex word rows (``n x L`` array)."""
    rows = np.asarray(rows)
    return int((rows[_edge_sources(net)] != rows[net.indices]).sum())


def energy_denominator(net, length: int) -> int:
    return length * net.degree_sum


def energy_from_words(net, rows: np.ndarray) -> float:
    rows = np.asarray(rows)
    return numerator_from_words(net, rows) / energy_denominator(net, rows.shape[1])


def energy_numerator(config) -> int:
    return numerator_from_words(config.net, config.words[config.conveyed])


def energy(config, net=None) -> float:
    """Normalised energy in ``[0, 1]``; 0 exactly when all conveyed words agree."""
    net = net or config.net
    return energy_numerator(config) / energy_denominator(net, config.length)


def incremental_energy_update(config, u, old_state, new_state) -> float:
    """Change in energy when vertex ``u`` goes from ``old_state`` to ``new_state``.

    Only the conveyed word matters; the other vertices are read from
    ``config`` as they are now.
    """
    old, new = old_state.conveyed, new_state.conveyed
    if old == new:
        return 0.0
    d = 0
    for v in config.net.neighbors(u):
        x = config.word(config.conveyed[v])
        d += sum(a != b for a, b in zip(new, x)) - sum(a != b for a, b in zip(old, x))
    return 2 * d / energy_denominator(config.net, config.length)


@dataclass(frozen=True)
class ConsensusStats:
    distinct_conveyed: int
    max_memory: int
    mean_memory: float
    consensus: tuple | None

    @property
    def consensus_text(self) -> str | None:
        return None if self.consensus is None else word_to_text(self.consensus)


def consensus_stats(config) -> ConsensusStats:
    sizes = [len(m) for m in config.memories]
    ids = np.unique(config.conveyed)
    return ConsensusStats(
        distinct_conveyed=int(ids.size),
        max_memory=max(sizes),
        mean_memory=sum(sizes) / len(sizes),
        consensus=config.word(int(ids[0])) if ids.size == 1 else None,
    )


@dataclass
class EnergySeries:
    """Energy samples ``(step, E)`` taken every ``stride`` steps."""

    samples: list[tuple[int, float]] = field(default_factory=list)
    stride: int = 1

    def __post_init__(self):
        steps = [t for t, _ in self.samples]
        if any(b <= a for a, b in zip(steps, steps[1:])):
            raise ValueError("series steps must be strictly increasing")
        if any(not 0.0 <= e <= 1.0 for _, e in self.samples):
            raise ValueError("energy samples must lie in [0, 1]")

    @property
    def steps(self) -> list[int]:
        return [t for t, _ in self.samples]

    @property
    def values(self) -> list[float]:
        return [e for _, e in self.samples]

    @property
    def final(self) -> float:
        return self.samples[-1][1]

    def at(self, t: int) -> float:
        """Value at step ``t``, carrying the last sample forward (runs stop at E=0)."""
        last = None
        for s, e in self.samples:
            if s > t:
                break
            last = e
        if last is None:
            raise ValueError(f"no sample at or before step {t}")
        return last


def write_series_csv(records, out=None) -> str:
    """Write series rows in the series CSV schema.

    ``records`` is an iterable of ``(run_id, seed, epsilon, L, s, n, series)``.
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SERIES_HEADER)
    for run_id, seed, eps, length, s, n, series in records:
        for t, e in series.samples:
            writer.writerow([run_id, seed, eps.numerator, eps.denominator, length, s, n, t, repr(float(e))])
    text = buf.getvalue()
    if out is not None:
        out.write(text)
    return text
