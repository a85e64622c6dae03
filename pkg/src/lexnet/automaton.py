"""Agent states, the add/collapse local rule, and the dynamics loop.

Per step the hearer ``u`` hears the words conveyed by its neighbours. A heard
word is *new* when every word in ``u``'s memory is farther than the confusion
radius from it, and *known* otherwise. New words, if any, are added to the
memory (the conveyed word stays). With nothing new, ``u`` collapses onto one
word drawn uniformly from the known words within the radius of the smallest
known word.

Words are interned into ids in lexicographic order when a configuration is
built; since the rule never invents words the table is fixed for a run.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import _backend
from ._fallback import (
    ADDED, STOP_CONSENSUS, STOP_FIXED_POINT, STOP_NONE, apply_rule, conveyed_delta, make_hamming,
)
from .lexicon import Alphabet, Word, as_epsilon, confusion_radius, hamming, lex_min, word_to_text
from .metrics import EnergySeries, energy_denominator, energy_numerator
from .network import Network, Schedule, next_vertex
from .rng import GENERATOR_ID, Stream


@dataclass(frozen=True)
class SimParams:
    epsilon: Fraction = Fraction(0)
    length: int = 4
    alphabet: int = 10
    schedule: str = "async"
    permutation: str = "identity"
    seed: int = 0
    max_steps: int = 0
    stop_on_consensus: bool = True
    stop_on_fixed_point: bool = False
    weighted_collapse: bool = False
    # 0 means one sample every n steps
    sample_stride: int = 0

    def __post_init__(self):
        object.__setattr__(self, "epsilon", as_epsilon(self.epsilon))
        Alphabet(self.alphabet)
        if self.length < 1:
            raise ValueError(f"word length must be >= 1, got {self.length}")
        if self.schedule not in ("async", "sequential"):
            raise ValueError(f"schedule must be 'async' or 'sequential', got {self.schedule!r}")
        if self.permutation not in ("identity", "random"):
            raise ValueError(f"permutation must be 'identity' or 'random', got {self.permutation!r}")
        if self.max_steps < 0:
            raise ValueError(f"max_steps must be >= 0, got {self.max_steps}")
        if self.sample_stride < 0:
            raise ValueError(f"sample_stride must be >= 0, got {self.sample_stride}")

    @property
    def radius(self) -> int:
        return confusion_radius(self.epsilon, self.length)

    @property
    def stop_mode(self) -> int:
        if self.stop_on_fixed_point:
            return STOP_FIXED_POINT
        return STOP_CONSENSUS if self.stop_on_consensus else STOP_NONE


@dataclass(frozen=True)
class AgentState:
    memory: frozenset
    conveyed: Word

    def __post_init__(self):
        if self.conveyed not in self.memory:
            raise ValueError("conveyed word must be in memory")


@dataclass(frozen=True)
class Added:
    vertex: int
    words: tuple


@dataclass(frozen=True)
class Collapsed:
    vertex: int
    word: Word


class Configuration:
    """Population state: per-vertex memory (sorted id lists) and conveyed id."""

    def __init__(self, net: Network, params: SimParams, words: np.ndarray,
                 conveyed: np.ndarray, memories: list[list[int]], t: int = 0):
        if words.shape[1] != params.length:
            raise ValueError(f"words have length {words.shape[1]}, params say L={params.length}")
        if words.size and int(words.max()) >= params.alphabet:
            raise ValueError(f"word symbol outside alphabet of size {params.alphabet}")
        self.net = net
        self.params = params
        self.words = words
        self.conveyed = np.asarray(conveyed, dtype=np.int32)
        self.memories = memories
        self.t = t
        self._index = {tuple(int(a) for a in row): i for i, row in enumerate(words)}
        self._ham = None
        self.numerator = energy_numerator(self)

    @classmethod
    def from_rows(cls, net: Network, params: SimParams, rows: np.ndarray) -> "Configuration":
        """Initial configuration ``({x_u}, x_u)`` from an ``n x L`` array of words."""
        rows = np.asarray(rows, dtype=np.uint8)
        if rows.shape[0] != net.n:
            raise ValueError(f"need {net.n} words, got {rows.shape[0]}")
        table, inverse = _intern(rows)
        conveyed = inverse.astype(np.int32)
        return cls(net, params, table, conveyed, [[int(c)] for c in conveyed])

    @classmethod
    def from_states(cls, net: Network, params: SimParams,
                    states: Sequence[tuple[Iterable[Sequence[int]], Sequence[int]]]) -> "Configuration":
        """Arbitrary configuration from ``(memory words, conveyed word)`` per vertex."""
        if len(states) != net.n:
            raise ValueError(f"need {net.n} states, got {len(states)}")
        norm = []
        for mem, x in states:
            mem = {tuple(w) for w in mem}
            x = tuple(x)
            AgentState(frozenset(mem), x)
            norm.append((mem, x))
        every = sorted(set().union(*(m for m, _ in norm)))
        table = np.array(every, dtype=np.uint8).reshape(len(every), params.length)
        index = {w: i for i, w in enumerate(every)}
        conveyed = np.array([index[x] for _, x in norm], dtype=np.int32)
        memories = [sorted(index[w] for w in m) for m, _ in norm]
        return cls(net, params, table, conveyed, memories)

    @property
    def n(self) -> int:
        return self.net.n

    @property
    def length(self) -> int:
        return self.params.length

    @property
    def ham(self):
        if self._ham is None:
            self._ham = make_hamming(self.words)
        return self._ham

    @property
    def energy(self) -> float:
        return self.numerator / energy_denominator(self.net, self.length)

    def word(self, i: int) -> Word:
        return tuple(int(a) for a in self.words[i])

    def word_id(self, word: Sequence[int]) -> int:
        try:
            return self._index[tuple(word)]
        except KeyError:
            raise ValueError(f"word {word_to_text(word)} is not in this configuration's word table") from None

    def state(self, u: int) -> AgentState:
        return AgentState(frozenset(self.word(i) for i in self.memories[u]), self.word(int(self.conveyed[u])))

    def states(self) -> list[AgentState]:
        return [self.state(u) for u in range(self.n)]

    def set_state(self, u: int, memory: Iterable[Sequence[int]], conveyed: Sequence[int]) -> None:
        """Overwrite vertex ``u`` (words must already be in the table); keeps the energy exact."""
        mem = sorted({self.word_id(w) for w in memory})
        x = self.word_id(conveyed)
        if x not in mem:
            raise ValueError("conveyed word must be in memory")
        old = int(self.conveyed[u])
        self.numerator += conveyed_delta(self.ham, self.net.indptr, self.net.indices, self.conveyed, u, old, x)
        self.memories[u] = mem
        self.conveyed[u] = x

    def copy(self) -> "Configuration":
        other = object.__new__(Configuration)
        other.__dict__.update(self.__dict__)
        other.conveyed = self.conveyed.copy()
        other.memories = [list(m) for m in self.memories]
        return other

    def same_state(self, other: "Configuration") -> bool:
        return self.states() == other.states()

    def all_singletons(self) -> bool:
        return all(len(m) == 1 for m in self.memories)

    def snapshot(self) -> str:
        """One line per vertex: ``vertex conveyed memory-words...``."""
        lines = []
        for u in range(self.n):
            mem = " ".join(word_to_text(self.word(i)) for i in self.memories[u])
            lines.append(f"{u} {word_to_text(self.word(int(self.conveyed[u])))} {mem}")
        return "\n".join(lines) + "\n"


def _intern(rows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    order = np.lexsort(rows.T[::-1])
    srt = rows[order]
    first = np.ones(len(srt), dtype=bool)
    first[1:] = np.any(srt[1:] != srt[:-1], axis=1)
    table = srt[first]
    ids_sorted = np.cumsum(first) - 1
    inverse = np.empty(len(rows), dtype=np.int64)
    inverse[order] = ids_sorted
    return np.ascontiguousarray(table), inverse


def partition_conveyed(memory: Iterable[Sequence[int]], conveyed: Iterable[Sequence[int]], epsilon):
    """Split the distinct heard words into ``(new, known)`` frozensets.

    A word is known when some memory word lies within the confusion radius.
    """
    mem = [tuple(w) for w in memory]
    new, known = set(), set()
    for c in {tuple(w) for w in conveyed}:
        radius = confusion_radius(epsilon, len(c))
        if any(hamming(c, y) <= radius for y in mem):
            known.add(c)
        else:
            new.add(c)
    return frozenset(new), frozenset(known)


def collapse_candidates(known: Iterable[Sequence[int]], epsilon) -> list[Word]:
    """Sorted words of ``known`` within the confusion radius of its minimum."""
    ws = sorted({tuple(w) for w in known})
    if not ws:
        raise ValueError("collapse candidates of an empty set")
    m = lex_min(ws)
    radius = confusion_radius(epsilon, len(m))
    return [w for w in ws if hamming(w, m) <= radius]


def local_update(config: Configuration, u: int, stream) -> Added | Collapsed:
    """Apply the local rule at vertex ``u`` in place and report what happened."""
    p = config.params
    net = config.net
    kind, what = apply_rule(config.ham, p.length, net.indptr, net.indices, config.conveyed,
                            config.memories, p.radius, p.weighted_collapse, u, stream.below)
    if kind == ADDED:
        return Added(u, tuple(config.word(i) for i in sorted(what)))
    old = int(config.conveyed[u])
    config.numerator += conveyed_delta(config.ham, net.indptr, net.indices, config.conveyed, u, old, what)
    config.conveyed[u] = what
    return Collapsed(u, config.word(what))


def init_configuration(net: Network, params: SimParams, stream) -> Configuration:
    """Every vertex gets an independent uniform random word ``x`` and state ``({x}, x)``."""
    rows = stream.below_many(params.alphabet, net.n * params.length)
    return Configuration.from_rows(net, params, rows.reshape(net.n, params.length))


def make_schedule(net: Network, params: SimParams, stream) -> Schedule:
    if params.schedule == "sequential":
        return Schedule.sequential(net.n, params.permutation, stream)
    return Schedule.asynchronous(net.n)


def step(config: Configuration, schedule: Schedule, stream, update=local_update):
    """One hearer update chosen by ``schedule``; ``update`` may be swapped for an oracle rule."""
    u = next_vertex(schedule, config.t, stream)
    action = update(config, u, stream)
    config.t += 1
    return action


def is_fixed_point(config: Configuration) -> bool:
    """No application of the rule, with any collapse draw, can change any state.

    Evaluated literally vertex by vertex: the memory must be ``{x_u}``,
    nothing heard may be new, and the collapse candidates must be ``{x_u}``.
    """
    p = config.params
    radius = p.radius
    ham = config.ham
    for u in range(config.n):
        x = int(config.conveyed[u])
        if config.memories[u] != [x]:
            return False
        heard = {int(config.conveyed[v]) for v in config.net.neighbors(u)}
        if any(ham(c, x) > radius for c in heard):
            return False
        m = min(heard)
        cands = {c for c in heard if ham(c, m) <= radius}
        if cands != {x}:
            return False
    return True


@dataclass
class RunResult:
    config: Configuration
    series: EnergySeries
    steps: int
    converged: bool
    consensus: Word | None
    metadata: dict = field(default_factory=dict)

    @property
    def final_energy(self) -> float:
        return self.config.energy


class Simulation:
    """A seeded run that can be advanced in chunks.

    One stream drives, in order, the initial words, the random sequential
    permutation (if any), then schedule and collapse draws.
    """

    def __init__(self, net: Network, params: SimParams, kernel: str | None = None,
                 config: Configuration | None = None):
        self.net = net
        self.params = params
        self.stream = Stream(params.seed)
        self.config = config if config is not None else init_configuration(net, params, self.stream)
        self.schedule = make_schedule(net, params, self.stream)
        self.kernel = kernel or _backend.BACKEND
        self._advance = _backend.get_kernel(self.kernel)
        self.stride = params.sample_stride or net.n
        self.initial_distinct = int(np.unique(self.config.conveyed).size)
        self._denom = energy_denominator(net, params.length)
        self._samples = [(self.config.t, self.config.numerator)]

    @property
    def converged(self) -> bool:
        if self.config.numerator != 0:
            return False
        return self.config.all_singletons() if self.params.stop_on_fixed_point else True

    def advance(self, steps: int) -> int:
        """Run up to ``steps`` more updates (fewer if the stop criterion hits); returns steps done."""
        c = self.config
        perm = self.schedule.permutation if self.schedule.kind == "sequential" else None
        done, num, st, sn = self._advance(
            c.words, self.net.indptr, self.net.indices, c.conveyed, c.memories,
            self.params.radius, perm, c.t, self.stream, steps, self.stride,
            self.params.stop_mode, self.params.weighted_collapse, c.numerator)
        c.t += done
        c.numerator = num
        self._samples.extend(zip(st, sn))
        return done

    def series(self) -> EnergySeries:
        samples = list(self._samples)
        if samples[-1][0] != self.config.t:
            samples.append((self.config.t, self.config.numerator))
        return EnergySeries([(t, n / self._denom) for t, n in samples], self.stride)

    def metadata(self) -> dict:
        p = self.params
        return {
            "seed": p.seed,
            "generator": GENERATOR_ID,
            "kernel": self.kernel,
            "epsilon": f"{p.epsilon.numerator}/{p.epsilon.denominator}",
            "L": p.length,
            "s": p.alphabet,
            "n": self.net.n,
            "graph": self.net.name,
            "schedule": p.schedule,
            "permutation": p.permutation if p.schedule == "sequential" else None,
            "collapse_weighting": "multiset" if p.weighted_collapse else "set",
            "stop": {STOP_NONE: "none", STOP_CONSENSUS: "energy-zero",
                     STOP_FIXED_POINT: "fixed-point"}[p.stop_mode],
            "initial_distinct_words": self.initial_distinct,
        }

    def result(self) -> RunResult:
        c = self.config
        ids = np.unique(c.conveyed)
        consensus = c.word(int(ids[0])) if ids.size == 1 else None
        return RunResult(c, self.series(), c.t, self.converged, consensus, self.metadata())

    def run(self) -> RunResult:
        self.advance(max(self.params.max_steps - self.config.t, 0))
        return self.result()


def run(net: Network, params: SimParams, kernel: str | None = None) -> RunResult:
    """Run from a fresh seeded configuration until ``max_steps`` or the stop criterion."""
    return Simulation(net, params, kernel).run()


