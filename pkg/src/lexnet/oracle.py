"""Naive reference rules for differential testing.

Nothing here shares code with the kernels: words are plain tuples, sets are
built by comprehension, and thresholds compare against ``eps * L`` as exact
fractions. Slow on purpose.
"""

from __future__ import annotations

from .automaton import Added, Collapsed, Configuration
from .lexicon import as_epsilon


def _h(x, y) -> int:
    return sum(1 for a, b in zip(x, y) if a != b)


def _heard(config: Configuration, u: int) -> list[tuple]:
    return [config.word(int(config.conveyed[v])) for v in config.net.neighbors(u)]


def naive_partition(memory, conveyed, epsilon):
    """``(new, known)`` where new words are farther than ``eps*L`` from every memory word."""
    eps = as_epsilon(epsilon)
    memory = {tuple(y) for y in memory}
    conveyed = {tuple(x) for x in conveyed}
    new = {x for x in conveyed if all(_h(x, y) > eps * len(x) for y in memory)}
    known = {x for x in conveyed if any(_h(x, y) <= eps * len(x) for y in memory)}
    return new, known


def naive_candidates(known, epsilon, heard=None):
    """Sorted collapse candidates; with ``heard`` given, one entry per neighbour (multiset draw)."""
    eps = as_epsilon(epsilon)
    m = min(known)
    pool = heard if heard is not None else known
    return sorted(x for x in pool if x in known and _h(x, m) <= eps * len(m))


def naive_local_update(config: Configuration, u: int, stream):
    """Same contract as ``automaton.local_update``, straight from the set definitions."""
    eps = config.params.epsilon
    heard = _heard(config, u)
    state = config.state(u)
    new, known = naive_partition(state.memory, heard, eps)
    if new:
        config.set_state(u, state.memory | new, state.conveyed)
        return Added(u, tuple(sorted(new)))
    cands = naive_candidates(known, eps, heard if config.params.weighted_collapse else None)
    chosen = cands[stream.below(len(cands))] if len(cands) > 1 else cands[0]
    config.set_state(u, [chosen], chosen)
    return Collapsed(u, chosen)


def membership_rule_update(config: Configuration, u: int, stream=None):
    """The simplified rule valid at ``eps = 0``: new means "not in memory", collapse onto the minimum."""
    if config.params.epsilon != 0:
        raise ValueError(f"membership rule only holds at epsilon=0, got {config.params.epsilon}")
    heard = set(_heard(config, u))
    state = config.state(u)
    new = {x for x in heard if x not in state.memory}
    known = {x for x in heard if x in state.memory}
    if new:
        config.set_state(u, state.memory | new, state.conveyed)
        return Added(u, tuple(sorted(new)))
    m = min(known)
    config.set_state(u, [m], m)
    return Collapsed(u, m)


def literal_forall_partition(memory, conveyed, epsilon):
    """Both sets with a universal quantifier over memory, plus the words in neither.

    ``known`` here requires *every* memory word to be confounded with the
    heard word, so heard words close to some memory words but not others
    fall through as orphans.
    """
    eps = as_epsilon(epsilon)
    memory = {tuple(y) for y in memory}
    conveyed = {tuple(x) for x in conveyed}
    new = {x for x in conveyed if all(_h(x, y) > eps * len(x) for y in memory)}
    known = {x for x in conveyed if all(_h(x, y) <= eps * len(x) for y in memory)}
    orphans = conveyed - new - known
    return new, known, orphans
